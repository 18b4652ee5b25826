#include "wavesim/solver_freq.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>
#include <utility>

#include "wavesim/errors.hpp"

namespace wavesim {

namespace {

constexpr double condition_limit = 1e12;

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Status cells share the CSV with data columns; keep them one-field safe.
std::string sanitize_status(std::string s) {
    for (char& ch : s)
        if (ch == ',' || ch == '\n' || ch == '\r')
            ch = ';';
    return s;
}

void run_indexed(int n, const std::function<void(int)>& fn) {
    int workers = std::min(thread_budget(), n);
    if (workers <= 1) {
        for (int k = 0; k < n; ++k)
            fn(k);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex mu;
    auto drain = [&] {
        for (;;) {
            int k = next.fetch_add(1);
            if (k >= n)
                return;
            try {
                fn(k);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!first_error)
                    first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t)
        pool.emplace_back(drain);
    for (auto& th : pool)
        th.join();
    if (first_error)
        std::rethrow_exception(first_error);
}

void check_condition(double condition, double lambda) {
    if (!(condition < condition_limit))
        throw solver_error("resonant system near-singular: add loss (wavelength " +
                           fmt_g17(lambda) + " m)");
}

double relative_defect(const Eigen::MatrixXcd& m, const Eigen::VectorXcd& x,
                       const Eigen::VectorXcd& rhs) {
    double denom = rhs.lpNorm<Eigen::Infinity>();
    if (denom == 0.0)
        return 0.0;
    return (m * x - rhs).lpNorm<Eigen::Infinity>() / denom;
}

void fill_readings(const circuit& c, freq_solution& out) {
    out.monitors.reserve(c.monitors.size());
    for (int mi : c.monitors) {
        const component& mc = c.comps[mi];
        out.monitors.push_back(monitor_read(out.a[mc.first_port], out.a[mc.first_port + 1]));
    }
    out.pd_currents.reserve(c.pds.size());
    for (int pi : c.pds) {
        const component& pc = c.comps[pi];
        out.pd_currents.push_back(pd_read(std::get<pd_model>(pc.model), out.a[pc.first_port]));
    }
}

int find_phase_shifter(const circuit& c, const param_range& p) {
    if (p.param != "v")
        throw validation_error("phase shifters expose only parameter 'v', not '" + p.param +
                               "'");
    for (size_t k = 0; k < c.comps.size(); ++k)
        if (c.comps[k].name == p.instance) {
            if (c.comps[k].kind != comp_kind::thermal_ps && c.comps[k].kind != comp_kind::pn_ps)
                throw validation_error("instance '" + p.instance + "' is not a phase shifter");
            return static_cast<int>(k);
        }
    throw validation_error("unknown instance '" + p.instance + "'");
}

std::vector<double> grid(double lo, double hi, int count) {
    std::vector<double> v(count);
    for (int k = 0; k < count; ++k)
        v[k] = (count == 1) ? lo : lo + (hi - lo) * static_cast<double>(k) / (count - 1);
    return v;
}

const std::string& ok_status() {
    static const std::string ok = "ok";
    return ok;
}

} // namespace

assembled_system assemble(const circuit& c, double lambda, const voltage_map& volts) {
    assembled_system sys;
    sys.s_block = Eigen::MatrixXcd::Zero(c.num_ports, c.num_ports);
    sys.a_src = Eigen::VectorXcd::Zero(c.num_ports);
    sys.e_vec = Eigen::VectorXcd::Zero(c.num_ports);
    for (size_t ci = 0; ci < c.comps.size(); ++ci) {
        const component& comp = c.comps[ci];
        smatrix s = component_smatrix(c, static_cast<int>(ci), lambda, volts);
        for (int i = 0; i < comp.port_count; ++i)
            for (int j = 0; j < comp.port_count; ++j)
                sys.s_block(comp.first_port + i, comp.first_port + j) = s(i, j);
        if (comp.kind == comp_kind::laser) {
            complex e = laser_emission(std::get<laser_model>(comp.model));
            sys.e_vec(comp.first_port) = e;
            sys.a_src(c.pairing[comp.first_port]) = e;
        }
    }
    return sys;
}

freq_solution solve_wave(const circuit& c, double lambda, const voltage_map& volts) {
    const int n = c.num_ports;
    freq_solution out;
    if (n == 0)
        return out;
    assembled_system sys = assemble(c, lambda, volts);

    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(n, n);
    for (int j = 0; j < n; ++j)
        m.col(j) -= sys.s_block.col(c.pairing[j]);
    Eigen::VectorXcd rhs = sys.s_block * sys.a_src;

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
    double rc = lu.rcond();
    out.condition = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
    check_condition(out.condition, lambda);

    Eigen::VectorXcd b_lin = lu.solve(rhs);
    out.residual = relative_defect(m, b_lin, rhs);

    Eigen::VectorXcd b = b_lin + sys.e_vec;
    out.a.resize(n);
    out.b.resize(n);
    out.v.resize(n);
    out.i.resize(n);
    for (int k = 0; k < n; ++k) {
        out.b[k] = b(k);
        out.a[k] = b(c.pairing[k]);
    }
    for (int k = 0; k < n; ++k) {
        port_vi pe = waves_to_vi({out.a[k], out.b[k]}, c.rr);
        out.v[k] = pe.v;
        out.i[k] = pe.i;
    }
    fill_readings(c, out);
    return out;
}

freq_solution solve_wave(const circuit& c, double lambda) {
    return solve_wave(c, lambda, drive_voltages(c, 0.0));
}

freq_solution solve_nodal(const circuit& c, double lambda, const voltage_map& volts) {
    const int n = c.num_ports;
    freq_solution out;
    if (n == 0)
        return out;
    assembled_system sys = assemble(c, lambda, volts);

    // Net index and orientation per port: the lower-numbered port of each pair
    // defines the positive current direction. Pure relabeling, no physics.
    const int nets = n / 2;
    std::vector<int> net_of(n, -1);
    std::vector<double> sigma(n);
    int mcount = 0;
    for (int k = 0; k < n; ++k)
        if (k < c.pairing[k]) {
            net_of[k] = net_of[c.pairing[k]] = mcount++;
        }
    for (int k = 0; k < n; ++k)
        sigma[k] = k < c.pairing[k] ? 1.0 : -1.0;

    const double r = c.rr;
    const double sr = std::sqrt(r);
    // Unknowns x = [V_net..., I_net...]; one scattering relation per port.
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
    for (int k = 0; k < n; ++k) {
        m(k, net_of[k]) += 1.0;
        m(k, nets + net_of[k]) -= r * sigma[k];
        for (int j = 0; j < n; ++j) {
            complex skj = sys.s_block(k, j);
            if (skj == complex(0.0, 0.0))
                continue;
            m(k, net_of[j]) -= skj;
            m(k, nets + net_of[j]) -= skj * r * sigma[j];
        }
        rhs(k) = 2.0 * sr * sys.e_vec(k);
    }

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
    double rc = lu.rcond();
    out.condition = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
    check_condition(out.condition, lambda);

    Eigen::VectorXcd x = lu.solve(rhs);
    out.residual = relative_defect(m, x, rhs);

    out.a.resize(n);
    out.b.resize(n);
    out.v.resize(n);
    out.i.resize(n);
    for (int k = 0; k < n; ++k) {
        complex vk = x(net_of[k]);
        complex ik = sigma[k] * x(nets + net_of[k]);
        wave_pair w = vi_to_waves({vk, ik}, r);
        out.v[k] = vk;
        out.i[k] = ik;
        out.a[k] = w.a;
        out.b[k] = w.b;
    }
    fill_readings(c, out);
    return out;
}

freq_solution solve_nodal(const circuit& c, double lambda) {
    return solve_nodal(c, lambda, drive_voltages(c, 0.0));
}

sweep_result sweep(const circuit& c, double start, double stop, int points) {
    if (points < 2)
        throw validation_error("sweep needs at least 2 points");
    if (!(start > 0.0) || !(stop >= start))
        throw validation_error("sweep range must satisfy 0 < start <= stop");

    sweep_result r;
    r.wavelengths.resize(points);
    for (int k = 0; k < points; ++k)
        r.wavelengths[k] = start + (stop - start) * static_cast<double>(k) / (points - 1);
    for (int mi : c.monitors)
        r.monitor_names.push_back(c.comps[mi].name);
    for (int pi : c.pds)
        r.pd_names.push_back(c.comps[pi].name);
    r.monitors.assign(points, {});
    r.pd_currents.assign(points, {});
    r.status.assign(points, "");

    const voltage_map volts = drive_voltages(c, 0.0);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    run_indexed(points, [&](int k) {
        try {
            freq_solution s = solve_wave(c, r.wavelengths[k], volts);
            r.monitors[k] = std::move(s.monitors);
            r.pd_currents[k] = std::move(s.pd_currents);
            r.status[k] = ok_status();
        } catch (const sim_error& e) {
            r.monitors[k].assign(r.monitor_names.size(), monitor_reading{nan, nan, nan, nan});
            r.pd_currents[k].assign(r.pd_names.size(), nan);
            r.status[k] = sanitize_status(e.what());
        }
    });
    return r;
}

std::string sweep_csv(const sweep_result& r) {
    std::string out = "wavelength_m";
    for (const auto& m : r.monitor_names)
        out += "," + m + ".p_fwd_w," + m + ".p_bwd_w," + m + ".phase_fwd_rad," + m +
               ".phase_bwd_rad";
    for (const auto& p : r.pd_names)
        out += "," + p + ".i_a";
    out += ",status\n";
    for (size_t k = 0; k < r.wavelengths.size(); ++k) {
        out += fmt_g17(r.wavelengths[k]);
        for (const auto& mr : r.monitors[k])
            out += "," + fmt_g17(mr.p_fwd) + "," + fmt_g17(mr.p_bwd) + "," +
                   fmt_g17(mr.phase_fwd) + "," + fmt_g17(mr.phase_bwd);
        for (double cur : r.pd_currents[k])
            out += "," + fmt_g17(cur);
        out += "," + r.status[k] + "\n";
    }
    return out;
}

sweep2d_result sweep2d(const circuit& c, const param_range& pa, const param_range& pb,
                       double lambda) {
    if (pa.count < 1 || pb.count < 1)
        throw validation_error("sweep2d needs at least 1 point per axis");
    if (!(lambda > 0.0))
        throw validation_error("sweep2d wavelength must be positive");
    find_phase_shifter(c, pa);
    find_phase_shifter(c, pb);
    if (pa.instance == pb.instance)
        throw validation_error("sweep2d axes must target distinct instances");

    sweep2d_result r;
    r.name_a = pa.instance + "." + pa.param;
    r.name_b = pb.instance + "." + pb.param;
    r.values_a = grid(pa.lo, pa.hi, pa.count);
    r.values_b = grid(pb.lo, pb.hi, pb.count);
    for (int mi : c.monitors)
        r.monitor_names.push_back(c.comps[mi].name);
    for (int pi : c.pds)
        r.pd_names.push_back(c.comps[pi].name);

    const int cells = pa.count * pb.count;
    r.monitors.assign(cells, {});
    r.pd_currents.assign(cells, {});
    r.status.assign(cells, "");

    const voltage_map base = drive_voltages(c, 0.0);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    run_indexed(cells, [&](int cell) {
        voltage_map volts = base;
        volts[pa.instance] = r.values_a[cell / pb.count];
        volts[pb.instance] = r.values_b[cell % pb.count];
        try {
            freq_solution s = solve_wave(c, lambda, volts);
            r.monitors[cell] = std::move(s.monitors);
            r.pd_currents[cell] = std::move(s.pd_currents);
            r.status[cell] = ok_status();
        } catch (const sim_error& e) {
            r.monitors[cell].assign(r.monitor_names.size(),
                                    monitor_reading{nan, nan, nan, nan});
            r.pd_currents[cell].assign(r.pd_names.size(), nan);
            r.status[cell] = sanitize_status(e.what());
        }
    });
    return r;
}

std::string sweep2d_csv(const sweep2d_result& r) {
    std::string out = r.name_a + "," + r.name_b;
    for (const auto& m : r.monitor_names)
        out += "," + m + ".p_fwd_w," + m + ".p_bwd_w," + m + ".phase_fwd_rad," + m +
               ".phase_bwd_rad";
    for (const auto& p : r.pd_names)
        out += "," + p + ".i_a";
    out += ",status\n";
    const size_t nb = r.values_b.size();
    for (size_t cell = 0; cell < r.status.size(); ++cell) {
        out += fmt_g17(r.values_a[cell / nb]) + "," + fmt_g17(r.values_b[cell % nb]);
        for (const auto& mr : r.monitors[cell])
            out += "," + fmt_g17(mr.p_fwd) + "," + fmt_g17(mr.p_bwd) + "," +
                   fmt_g17(mr.phase_fwd) + "," + fmt_g17(mr.phase_bwd);
        for (double cur : r.pd_currents[cell])
            out += "," + fmt_g17(cur);
        out += "," + r.status[cell] + "\n";
    }
    return out;
}

int thread_budget() {
    if (const char* env = std::getenv("WAVESIM_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v >= 1)
            return static_cast<int>(std::min(v, 64L));
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(std::min(hc, 16u)) : 1;
}

} // namespace wavesim
