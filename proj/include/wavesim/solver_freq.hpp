#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wavesim/circuit.hpp"
#include "wavesim/components.hpp"
#include "wavesim/wave_core.hpp"

namespace wavesim {

// Block-diagonal scattering view of an elaborated circuit at one wavelength:
// outgoing b = s_block * incident a + e_vec. Laser emissions appear twice, in
// equivalent forms: e_vec holds them at the laser's own port, a_src holds them
// as incident waves at the port each laser faces.
struct assembled_system {
    Eigen::MatrixXcd s_block;
    Eigen::VectorXcd a_src;
    Eigen::VectorXcd e_vec;
};

assembled_system assemble(const circuit& c, double lambda, const voltage_map& volts);

struct freq_solution {
    std::vector<complex> a, b; // incident / outgoing wave per port
    std::vector<complex> v, i; // voltage and into-port current per port
    double condition = 1.0;    // 1 / rcond of the solved system
    double residual = 0.0;     // relative infinity-norm defect of the solve
    std::vector<monitor_reading> monitors; // monitor declaration order
    std::vector<double> pd_currents;       // pd declaration order
};

// Scattered-wave formulation: solve (I - S P) b = S a_src where P routes each
// outgoing wave to the paired port. Reported b folds laser emissions back in,
// so a[k] == b[pairing[k]] holds on every port.
freq_solution solve_wave(const circuit& c, double lambda, const voltage_map& volts);
freq_solution solve_wave(const circuit& c, double lambda);

// Nodal formulation: one voltage and one current unknown per net, coupled
// through the same scattering blocks. Agrees with solve_wave port for port.
freq_solution solve_nodal(const circuit& c, double lambda, const voltage_map& volts);
freq_solution solve_nodal(const circuit& c, double lambda);

struct sweep_result {
    std::vector<double> wavelengths;
    std::vector<std::string> monitor_names;
    std::vector<std::string> pd_names;
    std::vector<std::vector<monitor_reading>> monitors; // [row][monitor]
    std::vector<std::vector<double>> pd_currents;       // [row][pd]
    std::vector<std::string> status;                    // "ok" or error text
};

// Uniform wavelength grid, endpoints included. Rows that fail to solve carry
// NaN data and the error message in their status column.
sweep_result sweep(const circuit& c, double start, double stop, int points);
std::string sweep_csv(const sweep_result& r);

struct param_range {
    std::string instance;
    std::string param;
    double lo = 0.0;
    double hi = 0.0;
    int count = 0;
};

struct sweep2d_result {
    std::string name_a, name_b; // "<instance>.<param>" column labels
    std::vector<double> values_a, values_b;
    std::vector<std::string> monitor_names;
    std::vector<std::string> pd_names;
    std::vector<std::vector<monitor_reading>> monitors; // row-major, a outer
    std::vector<std::vector<double>> pd_currents;
    std::vector<std::string> status;
};

// Drive-voltage grid at a fixed wavelength; cell (ia, ib) lands at row
// ia * count_b + ib. Undriven phase shifters keep their netlist drives.
sweep2d_result sweep2d(const circuit& c, const param_range& pa, const param_range& pb,
                       double lambda);
std::string sweep2d_csv(const sweep2d_result& r);

// Worker-thread cap from WAVESIM_THREADS; results never depend on it.
int thread_budget();

} // namespace wavesim
