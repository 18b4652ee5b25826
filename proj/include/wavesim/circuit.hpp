#pragma once

#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wavesim/components.hpp"
#include "wavesim/sparam.hpp"

namespace wavesim {

// ---------- netlist AST ----------

// Attribute values are numbers except free-form tokens such as file paths;
// whichever way the token parses decides the alternative.
using attr_value = std::variant<double, std::string>;

struct param_decl {
    std::string name;
    double value = 0.0;

    bool operator==(const param_decl&) const = default;
};

struct instance_decl {
    std::string type;
    std::string name;
    std::vector<std::string> nets;
    std::vector<std::pair<std::string, attr_value>> attrs; // declaration order
    int line = 0; // source line, not part of identity

    bool operator==(const instance_decl& o) const {
        return type == o.type && name == o.name && nets == o.nets && attrs == o.attrs;
    }
};

struct monitor_decl {
    std::string name;
    std::string net;
    int line = 0;

    bool operator==(const monitor_decl& o) const { return name == o.name && net == o.net; }
};

struct stimulus {
    enum class kind_t { dc, pwl, square };

    kind_t kind = kind_t::dc;
    std::vector<double> args;

    // dc(v) | pwl(t0 v0 t1 v1 ...) | square(v_lo v_hi period duty t_rise)
    void check() const;

    bool operator==(const stimulus&) const = default;
};

// Volts at time t. pwl clamps at both ends; square starts each cycle with
// the rising ramp and holds high for duty * period.
double eval_stimulus(const stimulus& s, double t);

struct drive_decl {
    std::string instance;
    std::string param;
    stimulus stim;
    int line = 0;

    bool operator==(const drive_decl& o) const {
        return instance == o.instance && param == o.param && stim == o.stim;
    }
};

struct crosstalk_decl {
    std::string a;
    std::string b;
    double chi = 0.0;
    int line = 0;

    bool operator==(const crosstalk_decl& o) const {
        return a == o.a && b == o.b && chi == o.chi;
    }
};

struct netlist {
    std::vector<param_decl> params;
    std::vector<instance_decl> instances;
    std::vector<monitor_decl> monitors;
    std::vector<drive_decl> drives;
    std::vector<crosstalk_decl> crosstalks;

    bool operator==(const netlist&) const = default;
};

netlist parse_netlist(const std::string& text);

// Canonical text form; parse_netlist(print_netlist(nl)) == nl.
std::string print_netlist(const netlist& nl);

// ---------- elaborated circuit ----------

enum class comp_kind {
    laser,
    photodetector,
    waveguide,
    coupler,
    ybranch,
    bragg,
    thermal_ps,
    pn_ps,
    terminator,
    spfile,
    monitor,
};

struct wg_model {
    double length = 0.0;
    double n_eff0 = 2.4;
    double ng = 4.2;
    double lambda0 = 1.55e-6;
    double loss_db_per_cm = 0.0;
};

struct coupler_model {
    double kappa = 0.5;
    double excess_loss_db = 0.0;
    double imbalance = 0.0;
};

struct ybranch_model {
    double excess_loss_db = 0.0;
};

struct bragg_model {
    int periods = 120;
    double n1 = 2.4006;
    double n2 = 2.4606;
    double w1 = 158.5e-9;
    double w2 = 158.5e-9;
};

struct spfile_model {
    std::string path;
    sparam_table table; // loaded at elaboration
};

using comp_model =
    std::variant<laser_model, pd_model, wg_model, coupler_model, ybranch_model,
                 bragg_model, thermal_ps_model, pn_ps_model, term_model, spfile_model,
                 monitor_model>;

struct component {
    comp_kind kind{};
    std::string name;
    int first_port = 0;
    int port_count = 0;
    comp_model model;
};

struct drive_binding {
    int comp = 0; // index into circuit::comps
    stimulus stim;
    std::string label; // "<instance>.v", used for trace columns
};

using voltage_map = std::map<std::string, double, std::less<>>;

struct circuit {
    double rr = 1.0;
    bool unidirectional = false;
    std::vector<component> comps;
    int num_ports = 0;
    std::vector<int> pairing;   // fixed-point-free involution over ports
    std::vector<int> port_rank; // net traversal order; defines "forward"
    std::vector<int> monitors;  // comp indices, .monitor order
    std::vector<int> pds;       // comp indices, declaration order
    std::vector<int> lasers;    // comp indices, declaration order
    std::vector<drive_binding> drives;
};

// Monitors are spliced inline (their nets gain an identity 2-port), every
// net must end up with exactly two endpoints, ports are numbered by
// declaration order.
circuit elaborate(const netlist& nl);

// Self-contained testbench netlists: "mi", "mim", "fpc", "rcc".
std::string preset_text(const std::string& name);

// Scattering block of one component at a wavelength under the given drive
// voltages. When the circuit is flagged unidirectional only entries whose
// output port sits later in net order than the input port survive.
smatrix component_smatrix(const circuit& c, int comp_index, double lambda,
                          const voltage_map& volts);

// Stimulus-defined voltages at time t; undriven instruments read 0 V.
voltage_map drive_voltages(const circuit& c, double t);

// Carrier implied by the circuit's lasers; errors if they disagree.
double default_carrier(const circuit& c);

} // namespace wavesim
