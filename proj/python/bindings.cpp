// Python bindings: netlist text in, plain dicts and lists out.
#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <optional>

#include "wavesim/circuit.hpp"
#include "wavesim/errors.hpp"
#include "wavesim/solver_freq.hpp"
#include "wavesim/solver_time.hpp"
#include "wavesim/sparam.hpp"
#include "wavesim/wave_core.hpp"

namespace py = pybind11;
using namespace wavesim;

namespace {

circuit build(const std::string& text, std::optional<double> rr, bool unidirectional) {
    circuit c = elaborate(parse_netlist(text));
    if (rr) {
        check_reference(*rr);
        c.rr = *rr;
    }
    if (unidirectional)
        c.unidirectional = true;
    return c;
}

voltage_map to_volts(const std::map<std::string, double>& in) {
    voltage_map out;
    for (const auto& [k, v] : in)
        out.emplace(k, v);
    return out;
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

py::dict reading_dict(const monitor_reading& m) {
    py::dict d;
    d["p_fwd_w"] = m.p_fwd;
    d["p_bwd_w"] = m.p_bwd;
    d["phase_fwd_rad"] = m.phase_fwd;
    d["phase_bwd_rad"] = m.phase_bwd;
    return d;
}

py::dict reading_columns(const std::vector<std::vector<monitor_reading>>& rows, size_t j) {
    std::vector<double> pf, pb, ff, fb;
    pf.reserve(rows.size());
    for (const auto& row : rows) {
        pf.push_back(row[j].p_fwd);
        pb.push_back(row[j].p_bwd);
        ff.push_back(row[j].phase_fwd);
        fb.push_back(row[j].phase_bwd);
    }
    py::dict d;
    d["p_fwd_w"] = pf;
    d["p_bwd_w"] = pb;
    d["phase_fwd_rad"] = ff;
    d["phase_bwd_rad"] = fb;
    return d;
}

py::dict pd_columns(const std::vector<std::string>& names,
                    const std::vector<std::vector<double>>& rows) {
    py::dict d;
    for (size_t j = 0; j < names.size(); ++j) {
        std::vector<double> col;
        col.reserve(rows.size());
        for (const auto& row : rows)
            col.push_back(row[j]);
        d[py::str(names[j])] = col;
    }
    return d;
}

py::dict solve_py(const std::string& text, double lambda,
                  std::optional<std::map<std::string, double>> volts,
                  std::optional<double> rr, bool unidirectional, bool nodal) {
    circuit c = build(text, rr, unidirectional);
    freq_solution s;
    if (volts) {
        voltage_map vm = to_volts(*volts);
        s = nodal ? solve_nodal(c, lambda, vm) : solve_wave(c, lambda, vm);
    } else {
        s = nodal ? solve_nodal(c, lambda) : solve_wave(c, lambda);
    }
    py::dict mons;
    for (size_t k = 0; k < c.monitors.size(); ++k)
        mons[py::str(c.comps[c.monitors[k]].name)] = reading_dict(s.monitors[k]);
    py::dict pds;
    for (size_t k = 0; k < c.pds.size(); ++k)
        pds[py::str(c.comps[c.pds[k]].name)] = s.pd_currents[k];
    py::dict d;
    d["monitors"] = mons;
    d["pd_currents"] = pds;
    d["condition"] = s.condition;
    d["residual"] = s.residual;
    return d;
}

py::dict sweep_py(const std::string& text, double start, double stop, int points,
                  std::optional<double> rr, bool unidirectional) {
    circuit c = build(text, rr, unidirectional);
    sweep_result r = sweep(c, start, stop, points);
    py::dict mons;
    for (size_t j = 0; j < r.monitor_names.size(); ++j)
        mons[py::str(r.monitor_names[j])] = reading_columns(r.monitors, j);
    py::dict d;
    d["wavelength_m"] = r.wavelengths;
    d["monitors"] = mons;
    d["pd_currents"] = pd_columns(r.pd_names, r.pd_currents);
    d["status"] = r.status;
    return d;
}

param_range to_range(const std::tuple<std::string, std::string, double, double, int>& t) {
    return {std::get<0>(t), std::get<1>(t), std::get<2>(t), std::get<3>(t), std::get<4>(t)};
}

py::dict sweep2d_py(const std::string& text,
                    const std::tuple<std::string, std::string, double, double, int>& pa,
                    const std::tuple<std::string, std::string, double, double, int>& pb,
                    double lambda, std::optional<double> rr, bool unidirectional) {
    circuit c = build(text, rr, unidirectional);
    sweep2d_result r = sweep2d(c, to_range(pa), to_range(pb), lambda);
    py::dict mons;
    for (size_t j = 0; j < r.monitor_names.size(); ++j)
        mons[py::str(r.monitor_names[j])] = reading_columns(r.monitors, j);
    py::dict d;
    d["name_a"] = r.name_a;
    d["name_b"] = r.name_b;
    d["values_a"] = r.values_a;
    d["values_b"] = r.values_b;
    d["monitors"] = mons; // row-major, axis a outer
    d["pd_currents"] = pd_columns(r.pd_names, r.pd_currents);
    d["status"] = r.status;
    return d;
}

py::dict transient_py(const std::string& text, double tstop, double dt,
                      std::optional<double> lambda, std::optional<double> rr,
                      bool unidirectional) {
    circuit c = build(text, rr, unidirectional);
    double carrier = lambda ? *lambda : default_carrier(c);
    transient_result r = run_transient(c, tstop, dt, carrier);
    py::dict drives;
    for (size_t j = 0; j < r.drive_names.size(); ++j)
        drives[py::str(r.drive_names[j])] = r.drives[j];
    py::dict mons;
    for (size_t j = 0; j < r.monitor_names.size(); ++j) {
        py::dict m;
        m["p_fwd_w"] = r.mon_fwd[j];
        m["p_bwd_w"] = r.mon_bwd[j];
        mons[py::str(r.monitor_names[j])] = m;
    }
    py::dict pds;
    for (size_t j = 0; j < r.pd_names.size(); ++j)
        pds[py::str(r.pd_names[j])] = r.pd_currents[j];
    py::dict d;
    d["time_s"] = r.time;
    d["drives"] = drives;
    d["monitors"] = mons;
    d["pd_currents"] = pds;
    d["warnings"] = r.warnings;
    return d;
}

py::list check_py(const std::string& text, std::optional<double> lambda,
                  std::optional<double> rr, bool unidirectional) {
    circuit c = build(text, rr, unidirectional);
    double probe = lambda ? *lambda : default_carrier(c);
    voltage_map volts = drive_voltages(c, 0.0);
    py::list out;
    for (size_t k = 0; k < c.comps.size(); ++k) {
        const component& comp = c.comps[k];
        if (comp.kind == comp_kind::laser || comp.kind == comp_kind::photodetector)
            continue;
        validation_report rep = validate(component_smatrix(c, static_cast<int>(k), probe, volts));
        py::dict d;
        d["name"] = comp.name;
        d["type"] = kind_label(comp.kind);
        d["max_singular_value"] = rep.max_singular_value;
        d["passive"] = rep.passive;
        d["lossless"] = rep.lossless;
        d["reciprocal"] = rep.reciprocal;
        out.append(d);
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Bidirectional photonic circuit simulation on power waves";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const validation_error& e) {
            PyErr_SetString(PyExc_ValueError, e.what()); // parse errors included
        } catch (const io_error& e) {
            PyErr_SetString(PyExc_OSError, e.what());
        } catch (const solver_error& e) {
            PyErr_SetString(PyExc_RuntimeError, e.what());
        }
    });

    m.def("preset", &preset_text, py::arg("name"),
          "Built-in testbench netlist text: 'mi', 'mim', 'fpc' or 'rcc'.");
    m.def(
        "canonical", [](const std::string& text) { return print_netlist(parse_netlist(text)); },
        py::arg("text"), "Parse a netlist and print it back in canonical form.");
    m.def(
        "vi_to_waves",
        [](complex v, complex i, double r) {
            wave_pair w = vi_to_waves({v, i}, r);
            return py::make_tuple(w.a, w.b);
        },
        py::arg("v"), py::arg("i"), py::arg("r") = 1.0,
        "Port voltage and into-port current to the (a, b) power-wave pair.");
    m.def(
        "waves_to_vi",
        [](complex a, complex b, double r) {
            port_vi vi = waves_to_vi({a, b}, r);
            return py::make_tuple(vi.v, vi.i);
        },
        py::arg("a"), py::arg("b"), py::arg("r") = 1.0,
        "Power-wave pair back to port voltage and into-port current.");
    m.def("reflection_coefficient", &reflection_coefficient, py::arg("z_load"),
          py::arg("r") = 1.0, "Power-wave reflection coefficient of a lumped load.");
    m.def("solve", &solve_py, py::arg("text"), py::arg("lambda_m"),
          py::arg("volts") = py::none(), py::arg("rr") = py::none(),
          py::arg("unidirectional") = false, py::arg("nodal") = false,
          "Single-wavelength steady state; monitor readings and detector currents.");
    m.def("sweep", &sweep_py, py::arg("text"), py::arg("start_m"), py::arg("stop_m"),
          py::arg("points"), py::arg("rr") = py::none(), py::arg("unidirectional") = false,
          "Wavelength sweep; columns keyed like the CSV output.");
    m.def("sweep2d", &sweep2d_py, py::arg("text"), py::arg("param_a"), py::arg("param_b"),
          py::arg("lambda_m"), py::arg("rr") = py::none(),
          py::arg("unidirectional") = false,
          "Two-parameter grid at fixed wavelength; params are "
          "(instance, param, lo, hi, count) tuples, rows vary param_b fastest.");
    m.def("transient", &transient_py, py::arg("text"), py::arg("tstop_s"), py::arg("dt_s"),
          py::arg("lambda_m") = py::none(), py::arg("rr") = py::none(),
          py::arg("unidirectional") = false,
          "Time-domain run on the carrier; drive, monitor and detector traces.");
    m.def("check", &check_py, py::arg("text"), py::arg("lambda_m") = py::none(),
          py::arg("rr") = py::none(), py::arg("unidirectional") = false,
          "Per-component scattering-matrix report at the probe wavelength.");
}
