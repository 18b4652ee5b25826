#include "wavesim/sparam.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <utility>

#include <Eigen/SVD>

#include "wavesim/errors.hpp"

namespace wavesim {

smatrix::smatrix(Eigen::MatrixXcd m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols())
        throw validation_error("scattering matrix must be square, got " +
                               std::to_string(m_.rows()) + "x" + std::to_string(m_.cols()));
    if (!m_.allFinite())
        throw validation_error("scattering matrix has non-finite entries");
}

std::vector<complex> smatrix::apply(const std::vector<complex>& a) const {
    const int n = ports();
    if (static_cast<int>(a.size()) != n)
        throw validation_error("apply: vector length " + std::to_string(a.size()) +
                               " does not match port count " + std::to_string(n));
    std::vector<complex> b(a.size());
    Eigen::Map<const Eigen::VectorXcd> av(a.data(), n);
    Eigen::Map<Eigen::VectorXcd> bv(b.data(), n);
    bv = mat() * av;
    return b;
}

void sparam_table::check() const {
    if (ports < 1)
        throw validation_error("s-parameter table needs at least one port");
    if (wavelengths.size() < 2)
        throw validation_error("s-parameter table needs at least two grid points");
    if (matrices.size() != wavelengths.size())
        throw validation_error("s-parameter table has " + std::to_string(matrices.size()) +
                               " matrices for " + std::to_string(wavelengths.size()) +
                               " grid points");
    for (size_t k = 0; k < wavelengths.size(); ++k) {
        if (!(wavelengths[k] > 0.0))
            throw validation_error("s-parameter table wavelengths must be positive");
        if (k > 0 && !(wavelengths[k] > wavelengths[k - 1]))
            throw validation_error("s-parameter table grid must be strictly ascending");
        if (matrices[k].ports() != ports)
            throw validation_error("s-parameter table matrix " + std::to_string(k) +
                                   " has wrong port count");
    }
}

smatrix interpolate(const sparam_table& t, double lambda) {
    t.check();
    const auto& wl = t.wavelengths;
    if (lambda < wl.front() || lambda > wl.back()) {
        std::ostringstream os;
        os << "wavelength " << lambda << " m outside table grid [" << wl.front() << ", "
           << wl.back() << "] m; extrapolation is not supported";
        throw validation_error(os.str());
    }
    auto it = std::lower_bound(wl.begin(), wl.end(), lambda);
    size_t hi = static_cast<size_t>(it - wl.begin());
    if (hi < wl.size() && wl[hi] == lambda)
        return t.matrices[hi];
    size_t lo = hi - 1;
    double f = (lambda - wl[lo]) / (wl[hi] - wl[lo]);
    return smatrix(((1.0 - f) * t.matrices[lo].mat() + f * t.matrices[hi].mat()).eval());
}

namespace {

// Reads logical lines: comments stripped, blank lines skipped, line numbers
// tracked for error reporting.
class line_reader {
public:
    explicit line_reader(std::istream& in) : in_(in) {}

    bool next(std::string& out) {
        std::string raw;
        while (std::getline(in_, raw)) {
            ++lineno_;
            if (auto pos = raw.find('#'); pos != std::string::npos)
                raw.erase(pos);
            while (!raw.empty() && (raw.back() == '\r' || raw.back() == ' ' || raw.back() == '\t'))
                raw.pop_back();
            size_t start = raw.find_first_not_of(" \t");
            if (start == std::string::npos)
                continue;
            out = raw.substr(start);
            return true;
        }
        return false;
    }

    int lineno() const { return lineno_; }

private:
    std::istream& in_;
    int lineno_ = 0;
};

std::optional<double> parse_double(const std::string& s) {
    if (s.empty())
        return std::nullopt;
    const char* begin = s.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end != begin + s.size())
        return std::nullopt;
    return v;
}

// Entry syntax: <re><+|-><im>j, both parts decimal floats.
std::optional<complex> parse_complex_token(const std::string& tok) {
    if (tok.size() < 4 || tok.back() != 'j')
        return std::nullopt;
    std::string body = tok.substr(0, tok.size() - 1);
    size_t split = std::string::npos;
    for (size_t i = 1; i < body.size(); ++i) {
        if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E')
            split = i;
    }
    if (split == std::string::npos)
        return std::nullopt;
    auto re = parse_double(body.substr(0, split));
    auto im = parse_double(body.substr(split));
    if (!re || !im)
        return std::nullopt;
    return complex(*re, *im);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok)
        out.push_back(tok);
    return out;
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw parse_error(line, 1, msg);
}

std::string require_line(line_reader& rd, const std::string& what) {
    std::string line;
    if (!rd.next(line))
        fail(rd.lineno() + 1, "unexpected end of file, expected " + what);
    return line;
}

long parse_count(line_reader& rd, const std::string& line, const std::string& key) {
    auto fields = split_fields(line);
    if (fields.size() != 2 || fields[0] != key)
        fail(rd.lineno(), "expected `" + key + " <count>`");
    char* end = nullptr;
    long v = std::strtol(fields[1].c_str(), &end, 10);
    if (end != fields[1].c_str() + fields[1].size() || v < 1)
        fail(rd.lineno(), "invalid " + key + " count `" + fields[1] + "`");
    return v;
}

std::string format_complex(complex v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g%+.17gj", v.real(), v.imag());
    return buf;
}

} // namespace

sparam_table load_table(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open s-parameter file `" + path + "`");
    line_reader rd(in);

    if (require_line(rd, "format header") != "SPARAM v1")
        fail(rd.lineno(), "expected `SPARAM v1` header");
    long nports = parse_count(rd, require_line(rd, "`ports <n>`"), "ports");
    long npoints = parse_count(rd, require_line(rd, "`points <m>`"), "points");
    if (npoints < 2)
        fail(rd.lineno(), "a table needs at least 2 grid points, got " +
                          std::to_string(npoints));

    sparam_table t;
    t.ports = static_cast<int>(nports);
    for (long k = 0; k < npoints; ++k) {
        auto fields = split_fields(require_line(rd, "`wl <wavelength>`"));
        if (fields.size() != 2 || fields[0] != "wl")
            fail(rd.lineno(), "expected `wl <wavelength>`");
        auto wl = parse_double(fields[1]);
        if (!wl || !(*wl > 0.0))
            fail(rd.lineno(), "invalid wavelength `" + fields[1] + "`");
        if (!t.wavelengths.empty() && !(*wl > t.wavelengths.back()))
            fail(rd.lineno(), "wavelength grid not strictly ascending");
        t.wavelengths.push_back(*wl);

        Eigen::MatrixXcd m(nports, nports);
        for (long i = 0; i < nports; ++i) {
            auto row = split_fields(require_line(rd, "matrix row"));
            if (static_cast<long>(row.size()) != nports)
                fail(rd.lineno(), "expected " + std::to_string(nports) + " entries in row, got " +
                                  std::to_string(row.size()));
            for (long j = 0; j < nports; ++j) {
                auto v = parse_complex_token(row[j]);
                if (!v)
                    fail(rd.lineno(), "malformed complex entry `" + row[j] +
                                      "` (expected re+imj)");
                m(i, j) = *v;
            }
        }
        t.matrices.emplace_back(std::move(m));
    }
    std::string extra;
    if (rd.next(extra))
        fail(rd.lineno(), "trailing content after last matrix block");
    t.check();
    return t;
}

void save_table(const sparam_table& t, const std::string& path) {
    t.check();
    std::ofstream out(path);
    if (!out)
        throw io_error("cannot open `" + path + "` for writing");
    out << "SPARAM v1\n";
    out << "ports " << t.ports << "\n";
    out << "points " << t.wavelengths.size() << "\n";
    char buf[64];
    for (size_t k = 0; k < t.wavelengths.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g", t.wavelengths[k]);
        out << "wl " << buf << "\n";
        const auto& m = t.matrices[k];
        for (int i = 0; i < t.ports; ++i) {
            for (int j = 0; j < t.ports; ++j) {
                if (j)
                    out << ' ';
                out << format_complex(m(i, j));
            }
            out << "\n";
        }
    }
    if (!out.flush())
        throw io_error("failed writing `" + path + "`");
}

tmatrix operator*(const tmatrix& a, const tmatrix& b) {
    return {a.t11 * b.t11 + a.t12 * b.t21, a.t11 * b.t12 + a.t12 * b.t22,
            a.t21 * b.t11 + a.t22 * b.t21, a.t21 * b.t12 + a.t22 * b.t22};
}

complex det(const tmatrix& t) {
    return t.t11 * t.t22 - t.t12 * t.t21;
}

smatrix t_to_s(const tmatrix& t) {
    if (std::abs(t.t11) < 1e-300)
        throw validation_error("transfer matrix not convertible: t11 is singular");
    smatrix s(2);
    s(0, 0) = t.t21 / t.t11;
    s(0, 1) = det(t) / t.t11;
    s(1, 0) = 1.0 / t.t11;
    s(1, 1) = -t.t12 / t.t11;
    return s;
}

tmatrix s_to_t(const smatrix& s) {
    if (s.ports() != 2)
        throw validation_error("transfer matrices exist only for 2-ports");
    const complex s11 = s(0, 0), s12 = s(0, 1), s21 = s(1, 0), s22 = s(1, 1);
    if (std::abs(s21) < 1e-300)
        throw validation_error("scattering matrix not convertible: s21 is singular");
    return {1.0 / s21, -s22 / s21, s11 / s21, (s12 * s21 - s11 * s22) / s21};
}

namespace {

double field_gain(double loss_db) {
    return std::pow(10.0, -loss_db / 20.0);
}

} // namespace

smatrix gen_directional_coupler(double kappa, double excess_loss_db, double imbalance) {
    if (!(kappa >= 0.0 && kappa <= 1.0))
        throw validation_error("coupler kappa must lie in [0, 1], got " + std::to_string(kappa));
    if (!(excess_loss_db >= 0.0))
        throw validation_error("coupler excess loss must be >= 0 dB");
    double k = std::clamp(kappa + imbalance, 0.0, 1.0);
    double g = field_gain(excess_loss_db);
    complex thru = g * std::sqrt(1.0 - k);
    complex cross = complex(0.0, 1.0) * g * std::sqrt(k);
    smatrix s(4);
    // ports: 0=in1, 1=in2, 2=out1, 3=out2
    s(2, 0) = s(0, 2) = thru;
    s(3, 1) = s(1, 3) = thru;
    s(3, 0) = s(0, 3) = cross;
    s(2, 1) = s(1, 2) = cross;
    return s;
}

smatrix gen_y_branch(double excess_loss_db) {
    if (!(excess_loss_db >= 0.0))
        throw validation_error("y-branch excess loss must be >= 0 dB");
    double g = field_gain(excess_loss_db);
    complex split = g / std::numbers::sqrt2;
    smatrix s(3);
    // ports: 0=stem, 1=branch1, 2=branch2
    s(1, 0) = s(0, 1) = split;
    s(2, 0) = s(0, 2) = split;
    return s;
}

smatrix gen_waveguide(double length, double n_eff0, double ng, double lambda0,
                      double loss_db_per_cm, double lambda) {
    if (!(length >= 0.0))
        throw validation_error("waveguide length must be >= 0");
    if (!(lambda > 0.0))
        throw validation_error("wavelength must be > 0");
    double n_eff = n_eff0 - (ng - n_eff0) * (lambda - lambda0) / lambda0;
    double g = field_gain(loss_db_per_cm * length * 100.0);
    complex s21 = g * std::exp(complex(0.0, -2.0 * std::numbers::pi * n_eff * length / lambda));
    smatrix s(2);
    s(1, 0) = s(0, 1) = s21;
    return s;
}

tmatrix t_interface(double n_from, double n_to) {
    if (!(n_from > 0.0) || !(n_to > 0.0))
        throw validation_error("interface indices must be > 0");
    double rho = (n_from - n_to) / (n_from + n_to);
    double t = 2.0 * std::sqrt(n_from * n_to) / (n_from + n_to);
    return {1.0 / t, rho / t, rho / t, 1.0 / t};
}

tmatrix t_propagation(double n, double w, double lambda) {
    if (!(n > 0.0) || !(w >= 0.0) || !(lambda > 0.0))
        throw validation_error("propagation segment needs n > 0, w >= 0, lambda > 0");
    complex phase = std::exp(complex(0.0, -2.0 * std::numbers::pi * n * w / lambda));
    return {phase, 0.0, 0.0, 1.0 / phase};
}

tmatrix gen_bragg_period(double n1, double n2, double w1, double w2, double lambda) {
    return t_propagation(n1, w1, lambda) * t_interface(n1, n2) *
           t_propagation(n2, w2, lambda) * t_interface(n2, n1);
}

smatrix gen_bragg_reflector(int periods, double n1, double n2, double w1, double w2,
                            double lambda) {
    if (periods < 1)
        throw validation_error("a grating needs at least one period");
    tmatrix period = gen_bragg_period(n1, n2, w1, w2, lambda);
    tmatrix total;
    for (int k = 0; k < periods; ++k)
        total = total * period;
    return t_to_s(total);
}

validation_report validate(const smatrix& s) {
    validation_report r;
    const int n = s.ports();
    if (n == 0) {
        r.passive = r.lossless = r.reciprocal = true;
        return r;
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(s.mat());
    r.max_singular_value = svd.singularValues()(0);
    Eigen::MatrixXcd gram = s.mat().adjoint() * s.mat();
    gram.diagonal().array() -= 1.0;
    r.unitarity_defect = gram.cwiseAbs().maxCoeff();
    r.reciprocity_defect = (s.mat() - s.mat().transpose()).cwiseAbs().maxCoeff();
    r.passive = r.max_singular_value <= 1.0 + passivity_tol;
    r.lossless = r.unitarity_defect <= losslessness_tol;
    r.reciprocal = r.reciprocity_defect <= reciprocity_tol;
    return r;
}

} // namespace wavesim
