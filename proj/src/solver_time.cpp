#include "wavesim/solver_time.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "wavesim/components.hpp"
#include "wavesim/errors.hpp"
#include "wavesim/sparam.hpp"

namespace wavesim {

namespace {

constexpr double speed_of_light = 299792458.0;

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct delay_line {
    int comp;
    int left, right; // port indices
    long steps;
    complex s21, s12; // carrier response, applied at the exit
    std::vector<complex> buf_lr, buf_rl;
    size_t head = 0;
};

} // namespace

long quantize_delay(double tau, double dt, std::vector<std::string>* warnings,
                    const std::string& what) {
    if (tau <= 0.0)
        return 0;
    long steps = std::llround(tau / dt);
    if (steps < 1)
        steps = 1;
    double err = std::abs(static_cast<double>(steps) * dt - tau) / tau;
    if (err > 0.01 && warnings)
        warnings->push_back(what + ": group delay " + fmt_g17(tau) + " s quantized to " +
                            std::to_string(steps) + " step(s) of " + fmt_g17(dt) + " s (" +
                            fmt_g17(err * 100.0) + "% error); reduce dt for accuracy");
    return steps;
}

transient_result run_transient(const circuit& c, double tstop, double dt, double carrier) {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw validation_error("transient dt must be positive");
    if (!(carrier > 0.0))
        throw validation_error("transient carrier wavelength must be positive");
    const long nsteps = std::llround(tstop / dt);
    if (nsteps < 1)
        throw validation_error("transient tstop must cover at least one step");

    transient_result out;
    const long rows = nsteps + 1;
    out.time.resize(rows);

    // Classify: lasers pin their outgoing wave, nonzero-length waveguides turn
    // into delay lines, everything else scatters instantaneously.
    std::vector<delay_line> delays;
    std::vector<int> instant;
    double e_max = 0.0;
    for (size_t ci = 0; ci < c.comps.size(); ++ci) {
        const component& comp = c.comps[ci];
        if (comp.kind == comp_kind::laser) {
            e_max = std::max(e_max,
                             std::abs(laser_emission(std::get<laser_model>(comp.model))));
            continue;
        }
        if (comp.kind == comp_kind::waveguide) {
            const auto& m = std::get<wg_model>(comp.model);
            if (m.length > 0.0) {
                delay_line dl;
                dl.comp = static_cast<int>(ci);
                dl.left = comp.first_port;
                dl.right = comp.first_port + 1;
                double tau = m.ng * m.length / speed_of_light;
                dl.steps = quantize_delay(tau, dt, &out.warnings, comp.name);
                smatrix s = component_smatrix(c, dl.comp, carrier, {});
                dl.s21 = s(1, 0);
                dl.s12 = s(0, 1);
                dl.buf_lr.assign(dl.steps, complex(0.0, 0.0));
                dl.buf_rl.assign(dl.steps, complex(0.0, 0.0));
                delays.push_back(std::move(dl));
                continue;
            }
        }
        instant.push_back(static_cast<int>(ci));
    }

    // Static scattering blocks; driven and crosstalk-coupled phase shifters
    // are refreshed every step.
    std::vector<smatrix> s_of(c.comps.size(), smatrix(1));
    voltage_map volts = drive_voltages(c, 0.0);
    for (int ci : instant)
        s_of[ci] = component_smatrix(c, ci, carrier, volts);

    std::vector<complex> a(c.num_ports, complex(0.0, 0.0));
    std::vector<complex> b(c.num_ports, complex(0.0, 0.0));
    for (int li : c.lasers)
        b[c.comps[li].first_port] = laser_emission(std::get<laser_model>(c.comps[li].model));

    out.drive_names.reserve(c.drives.size());
    for (const auto& d : c.drives)
        out.drive_names.push_back(d.label);
    out.drives.assign(c.drives.size(), std::vector<double>(rows));
    for (int mi : c.monitors)
        out.monitor_names.push_back(c.comps[mi].name);
    out.mon_fwd.assign(c.monitors.size(), std::vector<double>(rows));
    out.mon_bwd.assign(c.monitors.size(), std::vector<double>(rows));
    for (int pi : c.pds)
        out.pd_names.push_back(c.comps[pi].name);
    out.pd_currents.assign(c.pds.size(), std::vector<double>(rows));
    std::vector<double> pd_state(c.pds.size(), 0.0);

    const double conv_floor = e_max > 0.0 ? e_max : 1.0;
    auto comp_list = [&] {
        std::string names;
        for (int ci : instant) {
            if (!names.empty())
                names += ", ";
            names += c.comps[ci].name;
        }
        return names;
    };

    for (long step = 0; step < rows; ++step) {
        const double t = static_cast<double>(step) * dt;
        out.time[step] = t;

        if (!c.drives.empty()) {
            volts = drive_voltages(c, t);
            for (size_t ci = 0; ci < c.comps.size(); ++ci)
                if (c.comps[ci].kind == comp_kind::thermal_ps ||
                    c.comps[ci].kind == comp_kind::pn_ps)
                    s_of[ci] = component_smatrix(c, static_cast<int>(ci), carrier, volts);
        }

        // Delayed arrivals become this step's outgoing waves.
        for (auto& dl : delays) {
            b[dl.right] = dl.s21 * dl.buf_lr[dl.head];
            b[dl.left] = dl.s12 * dl.buf_rl[dl.head];
        }

        // Relax the instantaneous components to a mutual fixed point.
        bool converged = false;
        for (int phase = 0; phase < 2 && !converged; ++phase) {
            const double damp = phase == 0 ? 1.0 : 0.5;
            for (int iter = 0; iter < 1000; ++iter) {
                double delta = 0.0;
                double scale = conv_floor;
                for (int ci : instant) {
                    const component& comp = c.comps[ci];
                    const smatrix& s = s_of[ci];
                    for (int q = 0; q < comp.port_count; ++q)
                        a[comp.first_port + q] = b[c.pairing[comp.first_port + q]];
                    for (int i = 0; i < comp.port_count; ++i) {
                        complex bn(0.0, 0.0);
                        for (int j = 0; j < comp.port_count; ++j)
                            bn += s(i, j) * a[comp.first_port + j];
                        complex& slot = b[comp.first_port + i];
                        complex next = damp == 1.0 ? bn : (1.0 - damp) * slot + damp * bn;
                        delta = std::max(delta, std::abs(next - slot));
                        slot = next;
                        scale = std::max(scale, std::abs(next));
                    }
                }
                if (delta <= 1e-12 * scale) {
                    converged = true;
                    break;
                }
            }
        }
        if (!converged)
            throw solver_error(
                "instantaneous feedback failed to converge at t = " + fmt_g17(t) +
                " s (components: " + comp_list() + "); break the loop with a delay");

        for (int k = 0; k < c.num_ports; ++k)
            a[k] = b[c.pairing[k]];

        double b_peak = 0.0;
        for (int k = 0; k < c.num_ports; ++k)
            b_peak = std::max(b_peak, std::abs(b[k]));
        if (e_max > 0.0 && b_peak > 1e3 * e_max)
            throw solver_error("transient instability at t = " + fmt_g17(t) +
                               " s: wave amplitudes exceed 1e3 x source scale");

        for (size_t di = 0; di < c.drives.size(); ++di)
            out.drives[di][step] = eval_stimulus(c.drives[di].stim, t);
        for (size_t mi = 0; mi < c.monitors.size(); ++mi) {
            const component& mc = c.comps[c.monitors[mi]];
            out.mon_fwd[mi][step] = std::norm(a[mc.first_port]);
            out.mon_bwd[mi][step] = std::norm(a[mc.first_port + 1]);
        }
        for (size_t pi = 0; pi < c.pds.size(); ++pi) {
            const component& pc = c.comps[c.pds[pi]];
            const auto& m = std::get<pd_model>(pc.model);
            double x = pd_read(m, a[pc.first_port]);
            if (m.bandwidth_hz > 0.0) {
                double wc = 2.0 * std::numbers::pi * m.bandwidth_hz;
                pd_state[pi] = (pd_state[pi] + dt * wc * x) / (1.0 + dt * wc);
                x = pd_state[pi];
            }
            out.pd_currents[pi][step] = x;
        }

        for (auto& dl : delays) {
            dl.buf_lr[dl.head] = a[dl.left];
            dl.buf_rl[dl.head] = a[dl.right];
            dl.head = (dl.head + 1) % static_cast<size_t>(dl.steps);
        }
    }
    return out;
}

transient_result run_transient(const circuit& c, double tstop, double dt) {
    return run_transient(c, tstop, dt, default_carrier(c));
}

std::string transient_csv(const transient_result& r) {
    std::string out = "time_s";
    for (const auto& d : r.drive_names)
        out += "," + d;
    for (const auto& m : r.monitor_names)
        out += "," + m + ".p_fwd_w," + m + ".p_bwd_w";
    for (const auto& p : r.pd_names)
        out += "," + p + ".i_a";
    out += "\n";
    for (size_t row = 0; row < r.time.size(); ++row) {
        out += fmt_g17(r.time[row]);
        for (const auto& col : r.drives)
            out += "," + fmt_g17(col[row]);
        for (size_t mi = 0; mi < r.monitor_names.size(); ++mi)
            out += "," + fmt_g17(r.mon_fwd[mi][row]) + "," + fmt_g17(r.mon_bwd[mi][row]);
        for (const auto& col : r.pd_currents)
            out += "," + fmt_g17(col[row]);
        out += "\n";
    }
    return out;
}

} // namespace wavesim
