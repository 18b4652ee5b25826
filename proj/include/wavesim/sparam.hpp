#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "wavesim/wave_core.hpp"

namespace wavesim {

// Scattering matrix: s(i, j) is the field leaving port i per unit field
// entering port j. Ports are 0-based in code.
class smatrix {
public:
    smatrix() = default;
    explicit smatrix(int n) : m_(Eigen::MatrixXcd::Zero(n, n)) {}
    explicit smatrix(Eigen::MatrixXcd m);

    int ports() const { return static_cast<int>(m_.rows()); }
    complex& operator()(int i, int j) { return m_(i, j); }
    const complex& operator()(int i, int j) const { return m_(i, j); }
    const Eigen::MatrixXcd& mat() const { return m_; }
    Eigen::MatrixXcd& mat() { return m_; }

    // b = S a
    std::vector<complex> apply(const std::vector<complex>& a) const;

private:
    Eigen::MatrixXcd m_;
};

// Wavelength-gridded scattering data. Grid strictly ascending, >= 2 points,
// all matrices share the port count.
struct sparam_table {
    int ports = 0;
    std::vector<double> wavelengths;
    std::vector<smatrix> matrices;

    void check() const;
};

// Entrywise linear interpolation on real and imaginary parts. Exact grid
// hits return the stored matrix; wavelengths outside the grid are an error,
// never an extrapolation.
smatrix interpolate(const sparam_table& t, double lambda);

// Text format, one table per file:
//   SPARAM v1
//   ports <n>
//   points <m>
// followed by m blocks of `wl <meters>` plus n rows of n entries `re+imj`.
// `#` starts a comment. save_table writes 17 significant digits so a
// save/load cycle is value-exact.
sparam_table load_table(const std::string& path);
void save_table(const sparam_table& t, const std::string& path);

// 2x2 transfer matrix relating the (forward, backward) field pair on the
// left of a 2-port to the pair on its right. Cascades multiply in
// left-to-right traversal order.
struct tmatrix {
    complex t11{1.0, 0.0}, t12{0.0, 0.0};
    complex t21{0.0, 0.0}, t22{1.0, 0.0};
};

tmatrix operator*(const tmatrix& a, const tmatrix& b);
complex det(const tmatrix& t);

smatrix t_to_s(const tmatrix& t);
tmatrix s_to_t(const smatrix& s);

// Generators. Port orders: couplers (in1, in2, out1, out2); Y-branch
// (stem, branch1, branch2); all 2-ports (left, right).

smatrix gen_directional_coupler(double kappa, double excess_loss_db, double imbalance);

smatrix gen_y_branch(double excess_loss_db);

smatrix gen_waveguide(double length, double n_eff0, double ng, double lambda0,
                      double loss_db_per_cm, double lambda);

// Index-step interface and uniform propagation segment, the two factors of
// the Bragg transfer-matrix model.
tmatrix t_interface(double n_from, double n_to);
tmatrix t_propagation(double n, double w, double lambda);

// One grating period: segment of n1 (width w1), step into n2, segment of n2
// (width w2), step back into n1.
tmatrix gen_bragg_period(double n1, double n2, double w1, double w2, double lambda);

// Grating of `periods` identical periods, as a 2-port. Peak reflectivity
// sits near lambda_B = 2 * mean_index * (w1 + w2).
smatrix gen_bragg_reflector(int periods, double n1, double n2, double w1, double w2,
                            double lambda);

inline constexpr double passivity_tol = 1e-9;
inline constexpr double losslessness_tol = 1e-9;
inline constexpr double reciprocity_tol = 1e-12;

struct validation_report {
    double max_singular_value = 0.0;
    double unitarity_defect = 0.0;    // max entry of |S†S - I|
    double reciprocity_defect = 0.0;  // max entry of |S - Sᵀ|
    bool passive = false;
    bool lossless = false;
    bool reciprocal = false;
};

// Pure report; callers decide what to enforce.
validation_report validate(const smatrix& s);

} // namespace wavesim
