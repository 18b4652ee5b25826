#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "wavesim/circuit.hpp"
#include "wavesim/errors.hpp"
#include "wavesim/solver_freq.hpp"
#include "wavesim/solver_time.hpp"
#include "wavesim/sparam.hpp"

using namespace wavesim;

namespace {

struct shared_opts {
    std::string netlist_path;
    std::string preset;
    std::string out;
    double rr = std::numeric_limits<double>::quiet_NaN();
    bool unidirectional = false;
};

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw io_error("cannot read netlist file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& data) {
    if (path.empty()) {
        std::fwrite(data.data(), 1, data.size(), stdout);
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw io_error("cannot open output file '" + path + "'");
    f << data;
    f.flush();
    if (!f)
        throw io_error("failed writing output file '" + path + "'");
}

circuit build_circuit(const shared_opts& o) {
    const bool have_netlist = !o.netlist_path.empty();
    const bool have_preset = !o.preset.empty();
    if (have_netlist == have_preset)
        throw validation_error("provide exactly one of --netlist or --preset");
    std::string text = have_netlist ? read_file(o.netlist_path) : preset_text(o.preset);
    circuit c = elaborate(parse_netlist(text));
    if (!std::isnan(o.rr)) {
        if (!(o.rr > 0.0))
            throw validation_error("--rr must be positive");
        c.rr = o.rr;
    }
    if (o.unidirectional)
        c.unidirectional = true;
    return c;
}

const char* kind_label(comp_kind k) {
    switch (k) {
    case comp_kind::laser: return "laser";
    case comp_kind::photodetector: return "pd";
    case comp_kind::waveguide: return "wg";
    case comp_kind::coupler: return "dc";
    case comp_kind::ybranch: return "ybranch";
    case comp_kind::bragg: return "bragg";
    case comp_kind::thermal_ps: return "ps_thermal";
    case comp_kind::pn_ps: return "ps_pn";
    case comp_kind::terminator: return "term";
    case comp_kind::spfile: return "spfile";
    case comp_kind::monitor: return "monitor";
    }
    return "?";
}

int run_check(const shared_opts& o) {
    circuit c = build_circuit(o);
    double probe = 1.55e-6;
    if (c.lasers.size() == 1)
        probe = std::get<laser_model>(c.comps[c.lasers[0]].model).wavelength0;
    voltage_map volts = drive_voltages(c, 0.0);

    std::string report;
    std::string violator;
    double violator_sigma = 0.0;
    int scatterers = 0;
    for (size_t ci = 0; ci < c.comps.size(); ++ci) {
        const component& comp = c.comps[ci];
        if (comp.kind == comp_kind::laser || comp.kind == comp_kind::photodetector)
            continue;
        ++scatterers;
        double sigma = 0.0;
        bool passive = true, lossless = true, reciprocal = true;
        if (comp.kind == comp_kind::spfile) {
            // a stored table must be valid at every tabulated wavelength
            for (const auto& s : std::get<spfile_model>(comp.model).table.matrices) {
                validation_report rep = validate(s);
                sigma = std::max(sigma, rep.max_singular_value);
                passive = passive && rep.passive;
                lossless = lossless && rep.lossless;
                reciprocal = reciprocal && rep.reciprocal;
            }
        } else {
            validation_report rep = validate(component_smatrix(c, static_cast<int>(ci),
                                                               probe, volts));
            sigma = rep.max_singular_value;
            passive = rep.passive;
            lossless = rep.lossless;
            reciprocal = rep.reciprocal;
        }
        char line[256];
        std::snprintf(line, sizeof line, "%s (%s): max singular value %.12g, %s, %s%s\n",
                      comp.name.c_str(), kind_label(comp.kind), sigma,
                      lossless ? "lossless" : "lossy",
                      reciprocal ? "reciprocal" : "non-reciprocal",
                      passive ? "" : " [NOT PASSIVE]");
        report += line;
        if (!passive && violator.empty()) {
            violator = comp.name;
            violator_sigma = sigma;
        }
    }
    if (violator.empty()) {
        char tail[128];
        std::snprintf(tail, sizeof tail, "check passed: %d scattering components at %.9g m\n",
                      scatterers, probe);
        report += tail;
    }
    write_output(o.out, report);
    if (!violator.empty()) {
        char msg[192];
        std::snprintf(msg, sizeof msg,
                      "component '%s' is not passive: max singular value %.12g exceeds 1",
                      violator.c_str(), violator_sigma);
        throw validation_error(msg);
    }
    return 0;
}

int run_sweep(const shared_opts& o, double start, double stop, int points) {
    circuit c = build_circuit(o);
    sweep_result r = sweep(c, start, stop, points);
    write_output(o.out, sweep_csv(r));

    size_t failed = 0;
    for (const auto& st : r.status)
        if (st != "ok")
            ++failed;
    if (failed == r.status.size())
        throw solver_error("all " + std::to_string(r.status.size()) +
                           " sweep points failed; first: " + r.status.front());
    for (size_t mi = 0; mi < r.monitor_names.size(); ++mi) {
        double best = -1.0, best_l = 0.0;
        for (size_t k = 0; k < r.status.size(); ++k)
            if (r.status[k] == "ok" && r.monitors[k][mi].p_fwd > best) {
                best = r.monitors[k][mi].p_fwd;
                best_l = r.wavelengths[k];
            }
        std::fprintf(stderr, "monitor %s: peak p_fwd %.9g W at %.9g m\n",
                     r.monitor_names[mi].c_str(), best, best_l);
    }
    if (failed > 0)
        std::fprintf(stderr, "%zu of %zu points failed\n", failed, r.status.size());
    return 0;
}

param_range parse_param_spec(const std::string& spec) {
    const std::string usage = "bad --param '" + spec +
                              "': expected <instance>.<param>=<lo>:<hi>:<count>";
    auto eq = spec.find('=');
    if (eq == std::string::npos)
        throw validation_error(usage);
    std::string name = spec.substr(0, eq);
    auto dot = name.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 >= name.size())
        throw validation_error(usage);
    param_range p;
    p.instance = name.substr(0, dot);
    p.param = name.substr(dot + 1);
    std::string rest = spec.substr(eq + 1);
    auto c1 = rest.find(':');
    auto c2 = rest.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw validation_error(usage);
    try {
        size_t used = 0;
        p.lo = std::stod(rest.substr(0, c1), &used);
        if (used != c1)
            throw std::invalid_argument("");
        std::string hi_s = rest.substr(c1 + 1, c2 - c1 - 1);
        p.hi = std::stod(hi_s, &used);
        if (used != hi_s.size())
            throw std::invalid_argument("");
        std::string cnt_s = rest.substr(c2 + 1);
        long cnt = std::stol(cnt_s, &used);
        if (used != cnt_s.size() || cnt < 1)
            throw std::invalid_argument("");
        p.count = static_cast<int>(cnt);
    } catch (const std::logic_error&) {
        throw validation_error(usage);
    }
    return p;
}

int run_sweep2d(const shared_opts& o, const std::vector<std::string>& specs, double lambda,
                const std::string& monitor_name) {
    if (specs.size() != 2)
        throw validation_error("sweep2d needs exactly two --param ranges");
    circuit c = build_circuit(o);
    param_range pa = parse_param_spec(specs[0]);
    param_range pb = parse_param_spec(specs[1]);
    if (std::isnan(lambda))
        lambda = default_carrier(c);
    sweep2d_result r = sweep2d(c, pa, pb, lambda);
    write_output(o.out, sweep2d_csv(r));

    size_t failed = 0;
    for (const auto& st : r.status)
        if (st != "ok")
            ++failed;
    if (failed == r.status.size())
        throw solver_error("all " + std::to_string(r.status.size()) +
                           " grid cells failed; first: " + r.status.front());

    // minimum of backward power on the designated monitor
    int mon = -1;
    if (!monitor_name.empty()) {
        for (size_t k = 0; k < r.monitor_names.size(); ++k)
            if (r.monitor_names[k] == monitor_name)
                mon = static_cast<int>(k);
        if (mon < 0)
            throw validation_error("unknown monitor '" + monitor_name + "'");
    } else if (!r.monitor_names.empty()) {
        mon = 0;
    }
    if (mon >= 0) {
        double best = std::numeric_limits<double>::infinity();
        size_t best_cell = 0;
        for (size_t cell = 0; cell < r.status.size(); ++cell)
            if (r.status[cell] == "ok" && r.monitors[cell][mon].p_bwd < best) {
                best = r.monitors[cell][mon].p_bwd;
                best_cell = cell;
            }
        const size_t nb = r.values_b.size();
        std::fprintf(stderr, "monitor %s: min p_bwd %.9g W at %s=%.9g, %s=%.9g (cell %zu,%zu)\n",
                     r.monitor_names[mon].c_str(), best, r.name_a.c_str(),
                     r.values_a[best_cell / nb], r.name_b.c_str(), r.values_b[best_cell % nb],
                     best_cell / nb, best_cell % nb);
    }
    if (failed > 0)
        std::fprintf(stderr, "%zu of %zu cells failed\n", failed, r.status.size());
    return 0;
}

int run_transient_cmd(const shared_opts& o, double tstop, double dt, double lambda) {
    circuit c = build_circuit(o);
    if (std::isnan(lambda))
        lambda = default_carrier(c);
    transient_result r = run_transient(c, tstop, dt, lambda);
    write_output(o.out, transient_csv(r));
    for (const auto& w : r.warnings)
        std::fprintf(stderr, "warning: %s\n", w.c_str());
    for (size_t mi = 0; mi < r.monitor_names.size(); ++mi)
        std::fprintf(stderr, "final %s.p_fwd_w = %.9g W\n", r.monitor_names[mi].c_str(),
                     r.mon_fwd[mi].back());
    for (size_t pi = 0; pi < r.pd_names.size(); ++pi)
        std::fprintf(stderr, "final %s.i_a = %.9g A\n", r.pd_names[pi].c_str(),
                     r.pd_currents[pi].back());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"wavesim: bidirectional photonic circuit simulation"};
    app.require_subcommand(1);

    shared_opts o;
    double start = 0.0, stop = 0.0;
    int points = 201;
    std::vector<std::string> param_specs;
    double lambda = std::numeric_limits<double>::quiet_NaN();
    double tstop = 0.0, dt = 0.0;
    std::string monitor_name;

    CLI::App* c_check =
        app.add_subcommand("check", "parse a netlist and validate every scattering block");
    CLI::App* c_sweep = app.add_subcommand("sweep", "wavelength sweep, CSV output");
    CLI::App* c_s2d =
        app.add_subcommand("sweep2d", "grid over two drive voltages at one wavelength");
    CLI::App* c_tran = app.add_subcommand("transient", "time-domain envelope simulation");
    CLI::App* c_preset = app.add_subcommand("preset", "emit a built-in testbench netlist");

    auto add_shared = [&](CLI::App* sub) {
        sub->add_option("--netlist", o.netlist_path, "netlist file");
        sub->add_option("--preset", o.preset, "built-in testbench: fpc, mi, mim, rcc");
        sub->add_option("--out", o.out, "output path (default: stdout)");
        sub->add_option("--rr", o.rr, "reference resistance override, ohms");
        sub->add_flag("--unidirectional", o.unidirectional,
                      "drop reverse and reflection paths");
    };
    add_shared(c_check);
    add_shared(c_sweep);
    add_shared(c_s2d);
    add_shared(c_tran);

    c_sweep->add_option("--start", start, "first wavelength, m")->required();
    c_sweep->add_option("--stop", stop, "last wavelength, m")->required();
    c_sweep->add_option("--points", points, "grid size (default 201)");

    c_s2d->add_option("--param", param_specs,
                      "<instance>.<param>=<lo>:<hi>:<count>, exactly twice");
    c_s2d->add_option("--lambda", lambda, "wavelength, m (default: laser wavelength)");
    c_s2d->add_option("--monitor", monitor_name, "monitor named in the minimum summary");

    c_tran->add_option("--tstop", tstop, "end time, s")->required();
    c_tran->add_option("--dt", dt, "timestep, s")->required();
    c_tran->add_option("--lambda", lambda, "carrier wavelength, m (default: laser wavelength)");

    c_preset->add_option("--preset", o.preset, "fpc, mi, mim, rcc")->required();
    c_preset->add_option("--out", o.out, "output path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*c_check)
            return run_check(o);
        if (*c_sweep)
            return run_sweep(o, start, stop, points);
        if (*c_s2d)
            return run_sweep2d(o, param_specs, lambda, monitor_name);
        if (*c_tran)
            return run_transient_cmd(o, tstop, dt, lambda);
        if (*c_preset) {
            write_output(o.out, preset_text(o.preset));
            return 0;
        }
        return 0;
    } catch (const sim_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        switch (e.kind()) {
        case error_kind::validation: return 1;
        case error_kind::solver: return 2;
        case error_kind::io: return 3;
        }
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
