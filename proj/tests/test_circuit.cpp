#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <string>

#include "doctest.h"
#include "wavesim/circuit.hpp"
#include "wavesim/errors.hpp"

using namespace wavesim;
using doctest::Contains;

namespace {

bool close(double x, double y, double tol = 1e-12) { return std::abs(x - y) <= tol; }

struct temp_file {
    std::string path;
    explicit temp_file(const std::string& name) : path("/tmp/wavesim_circ_" + name) {}
    ~temp_file() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("single instance line") {
    netlist nl = parse_netlist("laser LD1 (n1) power=1e-3\n");
    REQUIRE(nl.instances.size() == 1);
    const auto& inst = nl.instances[0];
    CHECK(inst.type == "laser");
    CHECK(inst.name == "LD1");
    REQUIRE(inst.nets.size() == 1);
    CHECK(inst.nets[0] == "n1");
    REQUIRE(inst.attrs.size() == 1);
    CHECK(inst.attrs[0].first == "power");
    CHECK(std::get<double>(inst.attrs[0].second) == 1e-3);
}

TEST_CASE("empty file is a valid empty netlist") {
    CHECK(parse_netlist("") == netlist{});
    CHECK(parse_netlist("\n# only a comment\n   \n") == netlist{});
}

TEST_CASE("arity is enforced per type") {
    CHECK_THROWS_WITH_AS(parse_netlist("dc DC1 (a b c)\n"), Contains("dc requires 4 nets"),
                         parse_error);
    CHECK_THROWS_WITH_AS(parse_netlist("ybranch Y (a b)\n"), Contains("3 nets"), parse_error);
    CHECK_THROWS_WITH_AS(parse_netlist("term T (a b)\n"), Contains("1 net"), parse_error);
}

TEST_CASE("parse errors carry the source position") {
    CHECK_THROWS_WITH_AS(parse_netlist("laser LD (n1)\nfoo F (a)\n"),
                         Contains("line 2"), parse_error);
    CHECK_THROWS_WITH_AS(parse_netlist("laser LD (n1)\nfoo F (a)\n"),
                         Contains("unknown component type 'foo'"), parse_error);
    CHECK_THROWS_WITH_AS(parse_netlist("wg W (a b\n"), Contains("unexpected end of line"),
                         parse_error);
    CHECK_THROWS_WITH_AS(parse_netlist("wg W (a b) length\n"), Contains("expected '='"),
                         parse_error);
    try {
        parse_netlist("laser LD (n1)\n\nwg W (a 4bad)\n");
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.line() == 3);
        CHECK(e.column() > 1);
    }
}

TEST_CASE("duplicate names are rejected across instances and monitors") {
    CHECK_THROWS_WITH_AS(parse_netlist("laser A (x)\nterm A (y)\n"),
                         Contains("duplicate instance name 'A'"), parse_error);
    CHECK_THROWS_WITH_AS(parse_netlist("laser A (x)\n.monitor A x\n"),
                         Contains("duplicate instance name 'A'"), parse_error);
}

TEST_CASE("directives parse") {
    std::string text =
        ".param RR 50\n"
        "laser LD (n1) power=2e-3 phase=0.5\n"
        "wg W (n1 n2) length=1e-4\n"
        "term T (n2) reflectivity=1\n"
        ".monitor M1 n1\n"
        ".drive X.v square(0 4.8 2e-9 0.5 1e-11)\n"
        ".crosstalk P1 P2 0.1\n"
        ".end\n"
        "this garbage is ignored after .end\n";
    netlist nl = parse_netlist(text);
    REQUIRE(nl.params.size() == 1);
    CHECK(nl.params[0].name == "RR");
    CHECK(nl.params[0].value == 50.0);
    REQUIRE(nl.monitors.size() == 1);
    CHECK(nl.monitors[0].net == "n1");
    REQUIRE(nl.drives.size() == 1);
    CHECK(nl.drives[0].instance == "X");
    CHECK(nl.drives[0].param == "v");
    CHECK(nl.drives[0].stim.kind == stimulus::kind_t::square);
    REQUIRE(nl.drives[0].stim.args.size() == 5);
    CHECK(nl.drives[0].stim.args[2] == 2e-9);
    REQUIRE(nl.crosstalks.size() == 1);
    CHECK(nl.crosstalks[0].chi == 0.1);
}

TEST_CASE("bad stimulus declarations are rejected with positions") {
    CHECK_THROWS_WITH_AS(parse_netlist(".drive A.v dc(1 2)\n"), Contains("one value"),
                         parse_error);
    CHECK_THROWS_WITH_AS(parse_netlist(".drive A.v pwl(1e-9 0 0.5e-9 1)\n"),
                         Contains("ascending"), parse_error);
    CHECK_THROWS_WITH_AS(parse_netlist(".drive A.v square(0 1 2e-9 1.5 0)\n"),
                         Contains("duty"), parse_error);
    CHECK_THROWS_WITH_AS(parse_netlist(".drive A.v ramp(0 1)\n"), Contains("unknown stimulus"),
                         parse_error);
    CHECK_THROWS_WITH_AS(parse_netlist(".drive Av dc(1)\n"),
                         Contains("<instance>.<param>"), parse_error);
}

TEST_CASE("parse then print round-trips the AST") {
    std::string text =
        "# comment survives nowhere, structure everywhere\n"
        ".param RR 2.5\n"
        "laser LD (n_src) power=1e-3 wl=1.55e-6\n"
        "dc DC1 (n_src n_det a b) kappa=0.5 imbalance=0\n"
        "wg WA (a sa) length=100e-6 loss=0.3\n"
        "wg WB (b sb) length=1.5e-4\n"
        "ybranch YA (sa l1 l2)\n"
        "wg LA (l1 l2)\n"
        "term TB (sb) reflectivity=0.5 phase=-0.25\n"
        "pd PD1 (n_det) resp=0.8\n"
        ".monitor M1 n_src\n"
        ".monitor M2 n_src\n"
        ".drive X.v pwl(0 0 1e-9 4.8 2e-9 0)\n"
        ".crosstalk P1 P2 0.05\n"
        ".end\n";
    netlist nl = parse_netlist(text);
    std::string printed = print_netlist(nl);
    netlist reparsed = parse_netlist(printed);
    CHECK(nl == reparsed);
    CHECK(print_netlist(reparsed) == printed);
}

TEST_CASE("stimulus evaluation") {
    stimulus s;
    s.kind = stimulus::kind_t::dc;
    s.args = {3.3};
    CHECK(eval_stimulus(s, 0.0) == 3.3);
    CHECK(eval_stimulus(s, 1e9) == 3.3);

    s.kind = stimulus::kind_t::pwl;
    s.args = {0, 0, 1e-9, 4.8};
    CHECK(close(eval_stimulus(s, 0.5e-9), 2.4));
    CHECK(eval_stimulus(s, -1.0) == 0.0);
    CHECK(eval_stimulus(s, 5e-9) == 4.8);

    s.kind = stimulus::kind_t::square;
    s.args = {0, 4.8, 2e-9, 0.5, 0};
    CHECK(eval_stimulus(s, 0.4e-9) == 4.8);
    CHECK(eval_stimulus(s, 1.5e-9) == 0.0);
    CHECK(eval_stimulus(s, 2.4e-9) == 4.8); // periodic

    s.args = {1.0, 2.0, 1e-9, 0.5, 0.2e-9};
    CHECK(close(eval_stimulus(s, 0.1e-9), 1.5));  // mid rise
    CHECK(close(eval_stimulus(s, 0.3e-9), 2.0));  // high
    CHECK(close(eval_stimulus(s, 0.6e-9), 1.5));  // mid fall
    CHECK(close(eval_stimulus(s, 0.9e-9), 1.0));  // low
}

TEST_CASE("chain elaborates to counted ports and a clean pairing") {
    circuit c = elaborate(parse_netlist("laser LD (a)\nwg W (a b)\nterm T (b)\n"));
    CHECK(c.comps.size() == 3);
    CHECK(c.num_ports == 4);
    REQUIRE(c.pairing.size() == 4);
    for (int k = 0; k < 4; ++k) {
        CHECK(c.pairing[k] != k);
        CHECK(c.pairing[c.pairing[k]] == k);
    }
    CHECK(c.pairing[0] == 1); // laser - wg left
    CHECK(c.pairing[2] == 3); // wg right - term
    CHECK(c.lasers.size() == 1);
    CHECK(c.rr == 1.0);
}

TEST_CASE("net shape errors name the net") {
    CHECK_THROWS_WITH_AS(elaborate(parse_netlist("laser LD (a)\nwg W (a b)\n")),
                         Contains("unterminated net 'b'"), validation_error);
    CHECK_THROWS_WITH_AS(
        elaborate(parse_netlist("laser LD (x)\nwg W (x y)\nterm T (x)\nterm U (y)\n")),
        Contains("multi-drop net 'x'"), validation_error);
}

TEST_CASE("monitor splicing keeps ports paired and ordered") {
    circuit plain = elaborate(parse_netlist("laser LD (a)\nterm T (a)\n"));
    CHECK(plain.num_ports == 2);
    CHECK(plain.pairing[0] == 1);

    circuit c = elaborate(parse_netlist("laser LD (a)\nterm T (a)\n.monitor M a\n"));
    CHECK(c.comps.size() == 3);
    CHECK(c.num_ports == 4);
    REQUIRE(c.monitors.size() == 1);
    const component& mon = c.comps[c.monitors[0]];
    CHECK(mon.kind == comp_kind::monitor);
    // port 0 of the monitor faces the net's first endpoint (the laser)
    CHECK(c.pairing[0] == mon.first_port);
    CHECK(c.pairing[mon.first_port + 1] == 1);
    // forward rank order: laser-side segment precedes term-side segment
    CHECK(c.port_rank[mon.first_port] < c.port_rank[mon.first_port + 1]);

    // two monitors on one net chain deterministically
    circuit c2 = elaborate(
        parse_netlist("laser LD (a)\nterm T (a)\n.monitor M1 a\n.monitor M2 a\n"));
    const component& m1 = c2.comps[c2.monitors[0]];
    const component& m2 = c2.comps[c2.monitors[1]];
    CHECK(c2.pairing[0] == m1.first_port);
    CHECK(c2.pairing[m1.first_port + 1] == m2.first_port);
    CHECK(c2.pairing[m2.first_port + 1] == 1);

    CHECK_THROWS_WITH_AS(elaborate(parse_netlist("laser LD (a)\nterm T (b)\n.monitor M c\n")),
                         Contains("unknown net 'c'"), validation_error);
}

TEST_CASE("attribute validation") {
    CHECK_THROWS_WITH_AS(elaborate(parse_netlist("wg W (a b) width=1\nterm X (a)\nterm Y (b)\n")),
                         Contains("unknown attribute 'width'"), validation_error);
    CHECK_THROWS_WITH_AS(
        elaborate(parse_netlist("wg W (a b) length=abc\nterm X (a)\nterm Y (b)\n")),
        Contains("must be a number"), validation_error);
    CHECK_THROWS_WITH_AS(
        elaborate(parse_netlist("wg W (a b) length=1 length=2\nterm X (a)\nterm Y (b)\n")),
        Contains("duplicate attribute"), validation_error);
    CHECK_THROWS_WITH_AS(
        elaborate(parse_netlist("dc D (a b c d) kappa=1.5\nterm W (a)\nterm X (b)\nterm Y (c)\nterm Z (d)\n")),
        Contains("kappa"), validation_error);
    CHECK_THROWS_WITH_AS(
        elaborate(parse_netlist("bragg B (a b) periods=2.5\nterm X (a)\nterm Y (b)\n")),
        Contains("integer"), validation_error);
    CHECK_THROWS_WITH_AS(elaborate(parse_netlist("laser L (a) isolator=0\nterm T (a)\n")),
                         Contains("isolator"), validation_error);
    CHECK_THROWS_WITH_AS(elaborate(parse_netlist(".param RR -1\n")),
                         Contains("RR"), validation_error);
    CHECK_THROWS_WITH_AS(elaborate(parse_netlist(".param FOO 1\n")),
                         Contains("unknown parameter 'FOO'"), validation_error);
    circuit c = elaborate(parse_netlist(".param RR 50\n"));
    CHECK(c.rr == 50.0);
}

TEST_CASE("drive and crosstalk binding") {
    std::string base =
        "laser LD (a)\n"
        "ps_thermal P1 (a b)\n"
        "ps_thermal P2 (b c)\n"
        "term T (c)\n";
    circuit c = elaborate(parse_netlist(base + ".drive P1.v dc(2)\n.crosstalk P1 P2 0.2\n"));
    REQUIRE(c.drives.size() == 1);
    CHECK(c.drives[0].label == "P1.v");
    CHECK(eval_stimulus(c.drives[0].stim, 0.0) == 2.0);
    const auto& m1 = std::get<thermal_ps_model>(c.comps[c.drives[0].comp].model);
    CHECK(m1.neighbor == "P2");
    CHECK(m1.crosstalk_chi == 0.2);

    voltage_map volts = drive_voltages(c, 0.0);
    CHECK(volts.at("P1") == 2.0);
    CHECK(volts.count("P2") == 0);

    CHECK_THROWS_WITH_AS(elaborate(parse_netlist(base + ".drive NOPE.v dc(1)\n")),
                         Contains("unknown instance 'NOPE'"), validation_error);
    CHECK_THROWS_WITH_AS(elaborate(parse_netlist(base + ".drive LD.v dc(1)\n")),
                         Contains("not a phase shifter"), validation_error);
    CHECK_THROWS_WITH_AS(elaborate(parse_netlist(base + ".drive P1.volt dc(1)\n")),
                         Contains("no parameter 'volt'"), validation_error);
    CHECK_THROWS_WITH_AS(
        elaborate(parse_netlist(base + ".drive P1.v dc(1)\n.drive P1.v dc(2)\n")),
        Contains("duplicate drive"), validation_error);
    CHECK_THROWS_WITH_AS(elaborate(parse_netlist(base + ".crosstalk P1 LD 0.1\n")),
                         Contains("not a thermal phase shifter"), validation_error);
    CHECK_THROWS_WITH_AS(elaborate(parse_netlist(base + ".crosstalk P1 P2 1.5\n")),
                         Contains("chi"), validation_error);
}

TEST_CASE("spfile loads its table at elaboration") {
    temp_file f("two_port.sparam");
    {
        sparam_table t;
        t.ports = 2;
        t.wavelengths = {1.5e-6, 1.6e-6};
        smatrix s(2);
        s(0, 1) = s(1, 0) = complex(0.0, -1.0);
        t.matrices = {s, s};
        save_table(t, f.path);
    }
    circuit c = elaborate(parse_netlist("laser LD (a)\nspfile SP (a b) path=" + f.path +
                                        "\nterm T (b)\n"));
    CHECK(c.comps[1].kind == comp_kind::spfile);
    CHECK(c.comps[1].port_count == 2);
    smatrix s = component_smatrix(c, 1, 1.55e-6, {});
    CHECK(std::abs(s(1, 0) - complex(0.0, -1.0)) <= 1e-15);

    CHECK_THROWS_WITH_AS(
        elaborate(parse_netlist("laser LD (a)\nspfile SP (a b c) path=" + f.path +
                                "\nterm T (b)\nterm U (c)\n")),
        Contains("2 ports but 3 nets"), validation_error);
    CHECK_THROWS_WITH_AS(
        elaborate(parse_netlist("spfile SP (a b) path=/nonexistent/x.sparam\nterm T (a)\nterm U (b)\n")),
        Contains("SP"), io_error);
    CHECK_THROWS_WITH_AS(elaborate(parse_netlist("spfile SP (a b)\nterm T (a)\nterm U (b)\n")),
                         Contains("missing required attribute 'path'"), validation_error);

    // wavelength outside the table names the instance
    CHECK_THROWS_WITH_AS(component_smatrix(c, 1, 1.7e-6, {}), Contains("SP"),
                         validation_error);
}

TEST_CASE("component matrices honor drive voltages") {
    circuit c = elaborate(parse_netlist(
        "laser LD (a)\nps_thermal PT (a b)\nps_pn PP (b c)\nterm T (c)\n"
        ".drive PT.v dc(0)\n.drive PP.v dc(2.4)\n"));
    voltage_map volts = drive_voltages(c, 0.0);
    smatrix st = component_smatrix(c, 1, 1.55e-6, volts);
    CHECK(std::abs(st(1, 0) - complex(1.0, 0.0)) <= 1e-15);
    // half of v_pi=4.8 gives a quarter wave
    smatrix sp = component_smatrix(c, 2, 1.55e-6, volts);
    CHECK(std::abs(sp(1, 0) - std::exp(complex(0.0, -std::numbers::pi / 2))) <= 1e-15);
}

TEST_CASE("unidirectional projection follows net declaration order") {
    netlist nl = parse_netlist("laser LD (a)\nwg W (a b) length=1e-5\nterm T (b) reflectivity=1\n");
    circuit c = elaborate(nl);
    c.unidirectional = true;
    smatrix w = component_smatrix(c, 1, 1.55e-6, {});
    CHECK(std::abs(w(1, 0)) > 0.99);      // forward survives
    CHECK(w(0, 1) == complex(0.0, 0.0));  // reverse dropped
    smatrix t = component_smatrix(c, 2, 1.55e-6, {});
    CHECK(t(0, 0) == complex(0.0, 0.0));  // reflections dropped

    // flipped declaration: the wg still passes source-to-sink
    netlist nl2 = parse_netlist("laser LD (a)\nwg W (b a) length=1e-5\nterm T (b)\n");
    circuit c2 = elaborate(nl2);
    c2.unidirectional = true;
    smatrix w2 = component_smatrix(c2, 1, 1.55e-6, {});
    CHECK(w2(1, 0) == complex(0.0, 0.0));
    CHECK(std::abs(w2(0, 1)) > 0.99);
}

TEST_CASE("default carrier comes from the lasers") {
    circuit c = elaborate(parse_netlist("laser LD (a) wl=1.3e-6\nterm T (a)\n"));
    CHECK(default_carrier(c) == 1.3e-6);
    CHECK_THROWS_WITH_AS(default_carrier(elaborate(parse_netlist("term T (a)\nterm U (a)\n"))),
                         Contains("no laser"), validation_error);
    CHECK_THROWS_WITH_AS(
        default_carrier(elaborate(parse_netlist(
            "laser L1 (a) wl=1.3e-6\nlaser L2 (b) wl=1.55e-6\nterm T (a)\nterm U (b)\n"))),
        Contains("disagree"), validation_error);
}

TEST_CASE("presets parse, elaborate, and carry their headline parameters") {
    for (const char* name : {"mi", "mim", "fpc", "rcc"}) {
        netlist nl = parse_netlist(preset_text(name));
        circuit c = elaborate(nl);
        CHECK(c.lasers.size() == 1);
        CHECK(c.pds.size() >= 1);
        CHECK(c.monitors.size() >= 1);
        for (int k = 0; k < c.num_ports; ++k)
            CHECK(c.pairing[c.pairing[k]] == k);
        // canonical print re-parses to the same AST
        CHECK(parse_netlist(print_netlist(nl)) == nl);
    }

    circuit mi = elaborate(parse_netlist(preset_text("mi")));
    int ndc = 0;
    for (const auto& comp : mi.comps)
        if (comp.kind == comp_kind::coupler) {
            ++ndc;
            CHECK(std::get<coupler_model>(comp.model).kappa == 0.5);
        }
    CHECK(ndc == 1);

    circuit fpc = elaborate(parse_netlist(preset_text("fpc")));
    int nbragg = 0;
    for (const auto& comp : fpc.comps)
        if (comp.kind == comp_kind::bragg) {
            ++nbragg;
            CHECK(std::get<bragg_model>(comp.model).periods == 120);
        }
    CHECK(nbragg == 2);

    circuit rcc = elaborate(parse_netlist(preset_text("rcc")));
    bool has_tap = false;
    for (const auto& comp : rcc.comps)
        if (comp.kind == comp_kind::coupler &&
            std::get<coupler_model>(comp.model).kappa == 0.1)
            has_tap = true;
    CHECK(has_tap);
    CHECK(rcc.drives.size() == 3);

    circuit mim = elaborate(parse_netlist(preset_text("mim")));
    int nps = 0;
    for (const auto& comp : mim.comps)
        if (comp.kind == comp_kind::pn_ps) {
            ++nps;
            CHECK(std::get<pn_ps_model>(comp.model).v_pi == 4.8);
        }
    CHECK(nps == 2);

    CHECK_THROWS_WITH_AS(preset_text("nope"), Contains("unknown preset"), validation_error);
}
