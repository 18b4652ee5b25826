#include "wavesim/circuit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <set>
#include <sstream>

#include "wavesim/errors.hpp"

namespace wavesim {

// ---------- stimuli ----------

void stimulus::check() const {
    switch (kind) {
    case kind_t::dc:
        if (args.size() != 1)
            throw validation_error("dc stimulus takes exactly one value");
        break;
    case kind_t::pwl:
        if (args.size() < 2 || args.size() % 2 != 0)
            throw validation_error("pwl stimulus takes time/value pairs");
        for (size_t i = 2; i < args.size(); i += 2)
            if (!(args[i] > args[i - 2]))
                throw validation_error("pwl times must be strictly ascending");
        break;
    case kind_t::square: {
        if (args.size() != 5)
            throw validation_error("square stimulus takes v_lo v_hi period duty t_rise");
        double period = args[2], duty = args[3], t_rise = args[4];
        if (!(period > 0.0))
            throw validation_error("square period must be > 0");
        if (!(duty > 0.0 && duty < 1.0))
            throw validation_error("square duty must lie in (0, 1)");
        if (!(t_rise >= 0.0))
            throw validation_error("square rise time must be >= 0");
        if (t_rise > duty * period || duty * period + t_rise > period)
            throw validation_error("square rise time must fit inside both levels");
        break;
    }
    }
}

double eval_stimulus(const stimulus& s, double t) {
    switch (s.kind) {
    case stimulus::kind_t::dc:
        return s.args[0];
    case stimulus::kind_t::pwl: {
        const auto& a = s.args;
        size_t n = a.size() / 2;
        if (t <= a[0])
            return a[1];
        if (t >= a[2 * (n - 1)])
            return a[2 * (n - 1) + 1];
        for (size_t i = 1; i < n; ++i) {
            if (t <= a[2 * i]) {
                double t0 = a[2 * (i - 1)], v0 = a[2 * (i - 1) + 1];
                double t1 = a[2 * i], v1 = a[2 * i + 1];
                return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
            }
        }
        return a.back();
    }
    case stimulus::kind_t::square: {
        double lo = s.args[0], hi = s.args[1];
        double period = s.args[2], duty = s.args[3], t_rise = s.args[4];
        double tau = std::fmod(t, period);
        if (tau < 0.0)
            tau += period;
        double fall = duty * period;
        if (tau < t_rise)
            return lo + (hi - lo) * (tau / t_rise);
        if (tau < fall)
            return hi;
        if (tau < fall + t_rise)
            return hi + (lo - hi) * ((tau - fall) / t_rise);
        return lo;
    }
    }
    return 0.0;
}

// ---------- parsing ----------

namespace {

struct token {
    std::string text;
    int col = 0; // 1-based
};

std::vector<token> tokenize_line(const std::string& line) {
    std::vector<token> out;
    size_t i = 0;
    while (i < line.size()) {
        char ch = line[i];
        if (ch == '#')
            break;
        if (std::isspace(static_cast<unsigned char>(ch))) {
            ++i;
            continue;
        }
        if (ch == '(' || ch == ')' || ch == '=') {
            out.push_back({std::string(1, ch), static_cast<int>(i) + 1});
            ++i;
            continue;
        }
        size_t start = i;
        while (i < line.size()) {
            char c = line[i];
            if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' ||
                c == '=' || c == '#')
                break;
            ++i;
        }
        out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
    }
    return out;
}

bool is_identifier(const std::string& s) {
    if (s.empty())
        return false;
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_'))
        return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
            return false;
    return true;
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty())
        return false;
    const char* p = s.c_str();
    char* end = nullptr;
    out = std::strtod(p, &end);
    return end == p + s.size() && std::isfinite(out);
}

// arity per component type; -1 means taken from the s-parameter table
const std::map<std::string, int>& type_arities() {
    static const std::map<std::string, int> arities = {
        {"laser", 1}, {"pd", 1},         {"wg", 2},    {"dc", 4},
        {"ybranch", 3}, {"bragg", 2},    {"ps_thermal", 2},
        {"ps_pn", 2},   {"term", 1},     {"spfile", -1},
    };
    return arities;
}

class line_parser {
public:
    line_parser(int lineno, std::vector<token> toks)
        : lineno_(lineno), toks_(std::move(toks)) {}

    size_t size() const { return toks_.size(); }
    bool done() const { return pos_ >= toks_.size(); }

    const token& peek() const {
        if (done())
            throw parse_error(lineno_, end_col(), "unexpected end of line");
        return toks_[pos_];
    }

    const token& next() {
        const token& t = peek();
        ++pos_;
        return t;
    }

    std::string identifier(const std::string& what) {
        const token& t = next();
        if (!is_identifier(t.text))
            throw parse_error(lineno_, t.col, "expected " + what + ", got '" + t.text + "'");
        return t.text;
    }

    double number(const std::string& what) {
        const token& t = next();
        double v = 0.0;
        if (!parse_number(t.text, v))
            throw parse_error(lineno_, t.col, "expected " + what + ", got '" + t.text + "'");
        return v;
    }

    void literal(const std::string& text) {
        if (done())
            throw parse_error(lineno_, end_col(), "expected '" + text + "' before end of line");
        const token& t = next();
        if (t.text != text)
            throw parse_error(lineno_, t.col, "expected '" + text + "', got '" + t.text + "'");
    }

    void finish() {
        if (!done())
            throw parse_error(lineno_, toks_[pos_].col,
                              "unexpected trailing token '" + toks_[pos_].text + "'");
    }

    parse_error fail_here(const std::string& msg) const {
        return parse_error(lineno_, done() ? end_col() : toks_[pos_].col, msg);
    }

    int lineno() const { return lineno_; }

private:
    int end_col() const { return toks_.empty() ? 1 : toks_.back().col + 1; }

    int lineno_;
    std::vector<token> toks_;
    size_t pos_ = 0;
};

stimulus parse_stimulus(line_parser& lp) {
    const token& kind_tok = lp.peek();
    stimulus st;
    std::string kind = lp.identifier("stimulus kind");
    if (kind == "dc")
        st.kind = stimulus::kind_t::dc;
    else if (kind == "pwl")
        st.kind = stimulus::kind_t::pwl;
    else if (kind == "square")
        st.kind = stimulus::kind_t::square;
    else
        throw parse_error(lp.lineno(), kind_tok.col,
                          "unknown stimulus '" + kind + "' (dc, pwl, square)");
    lp.literal("(");
    while (lp.peek().text != ")")
        st.args.push_back(lp.number("stimulus value"));
    lp.literal(")");
    try {
        st.check();
    } catch (const validation_error& e) {
        throw parse_error(lp.lineno(), kind_tok.col, e.what());
    }
    return st;
}

} // namespace

netlist parse_netlist(const std::string& text) {
    netlist nl;
    std::set<std::string> names; // instances and monitors share one namespace

    std::istringstream is(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        if (!raw.empty() && raw.back() == '\r')
            raw.pop_back();
        auto toks = tokenize_line(raw);
        if (toks.empty())
            continue;
        line_parser lp(lineno, std::move(toks));
        const token head = lp.peek();

        if (head.text == ".end") {
            lp.next();
            lp.finish();
            break; // anything after .end is ignored, SPICE style
        }
        if (head.text == ".param") {
            lp.next();
            param_decl p;
            p.name = lp.identifier("parameter name");
            p.value = lp.number("parameter value");
            lp.finish();
            nl.params.push_back(std::move(p));
            continue;
        }
        if (head.text == ".monitor") {
            lp.next();
            monitor_decl m;
            m.line = lineno;
            m.name = lp.identifier("monitor name");
            m.net = lp.identifier("net name");
            lp.finish();
            if (!names.insert(m.name).second)
                throw parse_error(lineno, head.col, "duplicate instance name '" + m.name + "'");
            nl.monitors.push_back(std::move(m));
            continue;
        }
        if (head.text == ".drive") {
            lp.next();
            drive_decl d;
            d.line = lineno;
            const token target = lp.next();
            size_t dot = target.text.find('.');
            if (dot == std::string::npos || dot + 1 >= target.text.size())
                throw parse_error(lineno, target.col,
                                  "drive target must be <instance>.<param>");
            d.instance = target.text.substr(0, dot);
            d.param = target.text.substr(dot + 1);
            if (!is_identifier(d.instance) || !is_identifier(d.param))
                throw parse_error(lineno, target.col,
                                  "drive target must be <instance>.<param>");
            d.stim = parse_stimulus(lp);
            lp.finish();
            nl.drives.push_back(std::move(d));
            continue;
        }
        if (head.text == ".crosstalk") {
            lp.next();
            crosstalk_decl x;
            x.line = lineno;
            x.a = lp.identifier("instance name");
            x.b = lp.identifier("instance name");
            x.chi = lp.number("crosstalk coefficient");
            lp.finish();
            nl.crosstalks.push_back(std::move(x));
            continue;
        }
        if (!head.text.empty() && head.text[0] == '.')
            throw parse_error(lineno, head.col, "unknown directive '" + head.text + "'");

        // instance line: <type> <name> ( <net> ... ) [key=value ...]
        instance_decl inst;
        inst.line = lineno;
        inst.type = lp.next().text;
        auto arity_it = type_arities().find(inst.type);
        if (arity_it == type_arities().end())
            throw parse_error(lineno, head.col, "unknown component type '" + inst.type + "'");
        inst.name = lp.identifier("instance name");
        if (!names.insert(inst.name).second)
            throw parse_error(lineno, head.col, "duplicate instance name '" + inst.name + "'");
        lp.literal("(");
        while (lp.peek().text != ")")
            inst.nets.push_back(lp.identifier("net name"));
        lp.literal(")");
        int arity = arity_it->second;
        if (arity >= 0 && static_cast<int>(inst.nets.size()) != arity)
            throw parse_error(lineno, head.col,
                              inst.type + " requires " + std::to_string(arity) + " nets, got " +
                                  std::to_string(inst.nets.size()));
        if (arity < 0 && inst.nets.empty())
            throw lp.fail_here(inst.type + " requires at least one net");
        while (!lp.done()) {
            std::string key = lp.identifier("attribute name");
            lp.literal("=");
            const token& val = lp.next();
            double num = 0.0;
            if (parse_number(val.text, num))
                inst.attrs.emplace_back(key, attr_value(num));
            else
                inst.attrs.emplace_back(key, attr_value(val.text));
        }
        nl.instances.push_back(std::move(inst));
    }
    return nl;
}

namespace {

std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_attr(const attr_value& v) {
    if (const double* d = std::get_if<double>(&v))
        return fmt_num(*d);
    return std::get<std::string>(v);
}

} // namespace

std::string print_netlist(const netlist& nl) {
    std::string out;
    for (const auto& p : nl.params)
        out += ".param " + p.name + " " + fmt_num(p.value) + "\n";
    for (const auto& inst : nl.instances) {
        out += inst.type + " " + inst.name + " (";
        for (size_t i = 0; i < inst.nets.size(); ++i)
            out += (i ? " " : "") + inst.nets[i];
        out += ")";
        for (const auto& [k, v] : inst.attrs)
            out += " " + k + "=" + fmt_attr(v);
        out += "\n";
    }
    for (const auto& m : nl.monitors)
        out += ".monitor " + m.name + " " + m.net + "\n";
    for (const auto& d : nl.drives) {
        out += ".drive " + d.instance + "." + d.param + " ";
        switch (d.stim.kind) {
        case stimulus::kind_t::dc: out += "dc("; break;
        case stimulus::kind_t::pwl: out += "pwl("; break;
        case stimulus::kind_t::square: out += "square("; break;
        }
        for (size_t i = 0; i < d.stim.args.size(); ++i)
            out += (i ? " " : "") + fmt_num(d.stim.args[i]);
        out += ")\n";
    }
    for (const auto& x : nl.crosstalks)
        out += ".crosstalk " + x.a + " " + x.b + " " + fmt_num(x.chi) + "\n";
    out += ".end\n";
    return out;
}

// ---------- elaboration ----------

namespace {

class attr_set {
public:
    explicit attr_set(const instance_decl& inst) : inst_(inst) {
        for (const auto& [k, v] : inst.attrs)
            if (!byname_.emplace(k, &v).second)
                throw validation_error("instance '" + inst.name + "': duplicate attribute '" +
                                       k + "'");
    }

    double num(const std::string& key, double fallback) {
        auto it = byname_.find(key);
        if (it == byname_.end())
            return fallback;
        used_.insert(key);
        if (const double* d = std::get_if<double>(it->second))
            return *d;
        throw validation_error("instance '" + inst_.name + "': attribute '" + key +
                               "' must be a number");
    }

    std::string str(const std::string& key) {
        auto it = byname_.find(key);
        if (it == byname_.end())
            throw validation_error("instance '" + inst_.name + "': missing required attribute '" +
                                   key + "'");
        used_.insert(key);
        if (const std::string* s = std::get_if<std::string>(it->second))
            return *s;
        throw validation_error("instance '" + inst_.name + "': attribute '" + key +
                               "' must be a path, not a number");
    }

    void finish() const {
        for (const auto& [k, v] : byname_)
            if (!used_.count(k))
                throw validation_error("instance '" + inst_.name + "': unknown attribute '" + k +
                                       "' for type '" + inst_.type + "'");
    }

private:
    const instance_decl& inst_;
    std::map<std::string, const attr_value*> byname_;
    std::set<std::string> used_;
};

int attr_int(attr_set& attrs, const std::string& key, int fallback, const std::string& inst) {
    double v = attrs.num(key, fallback);
    double r = std::round(v);
    if (v != r || std::abs(v) > 1e9)
        throw validation_error("instance '" + inst + "': attribute '" + key +
                               "' must be an integer");
    return static_cast<int>(r);
}

void require(bool ok, const std::string& inst, const std::string& msg) {
    if (!ok)
        throw validation_error("instance '" + inst + "': " + msg);
}

struct net_entry {
    std::string name;
    std::pair<int, int> key; // (appearance index, splice slot): traversal order
    std::vector<int> ports;
};

} // namespace

circuit elaborate(const netlist& nl) {
    circuit c;
    for (const auto& p : nl.params) {
        if (p.name == "RR") {
            if (!(p.value > 0.0) || !std::isfinite(p.value))
                throw validation_error("parameter RR must be a positive real");
            c.rr = p.value;
        } else {
            throw validation_error("unknown parameter '" + p.name + "'");
        }
    }

    std::vector<net_entry> nets;
    std::map<std::string, int> net_index;
    std::map<std::string, int> comp_index;

    auto add_endpoint = [&](const std::string& net, int port) {
        auto [it, fresh] = net_index.try_emplace(net, static_cast<int>(nets.size()));
        if (fresh)
            nets.push_back({net, {static_cast<int>(nets.size()), 0}, {}});
        nets[it->second].ports.push_back(port);
    };

    for (const auto& inst : nl.instances) {
        component comp;
        comp.name = inst.name;
        comp.first_port = c.num_ports;
        attr_set attrs(inst);

        if (inst.type == "laser") {
            comp.kind = comp_kind::laser;
            laser_model m;
            m.power = attrs.num("power", m.power);
            m.wavelength0 = attrs.num("wl", m.wavelength0);
            m.phase = attrs.num("phase", m.phase);
            m.isolator = attrs.num("isolator", 1.0) != 0.0;
            comp.port_count = 1;
            comp.model = m;
        } else if (inst.type == "pd") {
            comp.kind = comp_kind::photodetector;
            pd_model m;
            m.responsivity = attrs.num("resp", m.responsivity);
            m.bandwidth_hz = attrs.num("bw", m.bandwidth_hz);
            comp.port_count = 1;
            comp.model = m;
        } else if (inst.type == "wg") {
            comp.kind = comp_kind::waveguide;
            wg_model m;
            m.length = attrs.num("length", m.length);
            m.n_eff0 = attrs.num("neff", m.n_eff0);
            m.ng = attrs.num("ng", m.ng);
            m.lambda0 = attrs.num("lambda0", m.lambda0);
            m.loss_db_per_cm = attrs.num("loss", m.loss_db_per_cm);
            require(m.length >= 0.0, inst.name, "length must be >= 0");
            require(m.n_eff0 > 0.0, inst.name, "neff must be > 0");
            require(m.ng > 0.0, inst.name, "ng must be > 0");
            require(m.lambda0 > 0.0, inst.name, "lambda0 must be > 0");
            require(m.loss_db_per_cm >= 0.0, inst.name, "loss must be >= 0 dB/cm");
            comp.port_count = 2;
            comp.model = m;
        } else if (inst.type == "dc") {
            comp.kind = comp_kind::coupler;
            coupler_model m;
            m.kappa = attrs.num("kappa", m.kappa);
            m.excess_loss_db = attrs.num("loss", m.excess_loss_db);
            m.imbalance = attrs.num("imbalance", m.imbalance);
            require(m.kappa >= 0.0 && m.kappa <= 1.0, inst.name, "kappa must lie in [0, 1]");
            require(m.excess_loss_db >= 0.0, inst.name, "loss must be >= 0 dB");
            require(std::isfinite(m.imbalance), inst.name, "imbalance must be finite");
            comp.port_count = 4;
            comp.model = m;
        } else if (inst.type == "ybranch") {
            comp.kind = comp_kind::ybranch;
            ybranch_model m;
            m.excess_loss_db = attrs.num("loss", m.excess_loss_db);
            require(m.excess_loss_db >= 0.0, inst.name, "loss must be >= 0 dB");
            comp.port_count = 3;
            comp.model = m;
        } else if (inst.type == "bragg") {
            comp.kind = comp_kind::bragg;
            bragg_model m;
            m.periods = attr_int(attrs, "periods", m.periods, inst.name);
            m.n1 = attrs.num("n1", m.n1);
            m.n2 = attrs.num("n2", m.n2);
            m.w1 = attrs.num("w1", m.w1);
            m.w2 = attrs.num("w2", m.w2);
            require(m.periods >= 1, inst.name, "periods must be >= 1");
            require(m.n1 > 0.0 && m.n2 > 0.0, inst.name, "indices must be > 0");
            require(m.w1 >= 0.0 && m.w2 >= 0.0, inst.name, "segment widths must be >= 0");
            comp.port_count = 2;
            comp.model = m;
        } else if (inst.type == "ps_thermal") {
            comp.kind = comp_kind::thermal_ps;
            thermal_ps_model m;
            m.p_pi = attrs.num("p_pi", m.p_pi);
            m.r_heater = attrs.num("r_heater", m.r_heater);
            m.insertion_loss_db = attrs.num("loss", m.insertion_loss_db);
            comp.port_count = 2;
            comp.model = m;
        } else if (inst.type == "ps_pn") {
            comp.kind = comp_kind::pn_ps;
            pn_ps_model m;
            m.v_pi = attrs.num("v_pi", m.v_pi);
            m.length = attrs.num("length", m.length);
            m.insertion_loss_db = attrs.num("loss", m.insertion_loss_db);
            comp.port_count = 2;
            comp.model = m;
        } else if (inst.type == "term") {
            comp.kind = comp_kind::terminator;
            term_model m;
            m.reflectivity = attrs.num("reflectivity", m.reflectivity);
            m.phase = attrs.num("phase", m.phase);
            comp.port_count = 1;
            comp.model = m;
        } else if (inst.type == "spfile") {
            comp.kind = comp_kind::spfile;
            spfile_model m;
            m.path = attrs.str("path");
            try {
                m.table = load_table(m.path);
            } catch (const io_error& e) {
                throw io_error("instance '" + inst.name + "': " + e.what());
            } catch (const validation_error& e) {
                throw validation_error("instance '" + inst.name + "': " + e.what());
            }
            comp.port_count = m.table.ports;
            if (static_cast<int>(inst.nets.size()) != comp.port_count)
                throw validation_error("instance '" + inst.name + "': s-parameter file has " +
                                       std::to_string(comp.port_count) + " ports but " +
                                       std::to_string(inst.nets.size()) + " nets are wired");
            comp.model = std::move(m);
        } else {
            throw validation_error("unknown component type '" + inst.type + "'");
        }
        attrs.finish();

        // models carrying their own invariants
        try {
            std::visit(
                [](const auto& m) {
                    if constexpr (requires { m.check(); })
                        m.check();
                },
                comp.model);
        } catch (const validation_error& e) {
            throw validation_error("instance '" + inst.name + "': " + e.what());
        }

        c.num_ports += comp.port_count;
        for (size_t i = 0; i < inst.nets.size(); ++i)
            add_endpoint(inst.nets[i], comp.first_port + static_cast<int>(i));
        int index = static_cast<int>(c.comps.size());
        comp_index.emplace(comp.name, index);
        if (comp.kind == comp_kind::laser)
            c.lasers.push_back(index);
        if (comp.kind == comp_kind::photodetector)
            c.pds.push_back(index);
        c.comps.push_back(std::move(comp));
    }

    auto net_shape_error = [](const net_entry& n) -> validation_error {
        if (n.ports.size() < 2)
            return validation_error("unterminated net '" + n.name +
                                    "': every net joins exactly two ports (close open ends "
                                    "with a term instance)");
        return validation_error("multi-drop net '" + n.name +
                                "' unsupported: nets join exactly two ports (split with "
                                "couplers or Y-branches)");
    };

    for (const auto& mon : nl.monitors) {
        auto it = net_index.find(mon.net);
        if (it == net_index.end())
            throw validation_error("monitor '" + mon.name + "' references unknown net '" +
                                   mon.net + "'");
        int ni = it->second;
        if (nets[ni].ports.size() != 2)
            throw net_shape_error(nets[ni]);

        component comp;
        comp.kind = comp_kind::monitor;
        comp.name = mon.name;
        comp.model = monitor_model{};
        comp.first_port = c.num_ports;
        comp.port_count = 2;
        c.num_ports += 2;
        int q0 = comp.first_port, q1 = comp.first_port + 1;

        // net X with endpoints (p1, p2) becomes p1 - [q0 monitor q1] - p2;
        // the segment that keeps the name X is the one continuing to p2, so
        // a later monitor on X lands downstream of this one.
        int p1 = nets[ni].ports[0], p2 = nets[ni].ports[1];
        auto key = nets[ni].key;
        nets.push_back({nets[ni].name + "\x01" + mon.name, key, {p1, q0}});
        nets[ni].key = {key.first, key.second + 1};
        nets[ni].ports = {q1, p2};

        c.monitors.push_back(static_cast<int>(c.comps.size()));
        comp_index.emplace(comp.name, static_cast<int>(c.comps.size()));
        c.comps.push_back(std::move(comp));
    }

    c.pairing.assign(c.num_ports, -1);
    for (const auto& n : nets) {
        if (n.ports.size() != 2)
            throw net_shape_error(n);
        c.pairing[n.ports[0]] = n.ports[1];
        c.pairing[n.ports[1]] = n.ports[0];
    }

    std::vector<int> order(nets.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return nets[x].key < nets[y].key; });
    c.port_rank.assign(c.num_ports, 0);
    for (size_t r = 0; r < order.size(); ++r)
        for (int p : nets[order[r]].ports)
            c.port_rank[p] = static_cast<int>(r);

    std::set<std::string> driven;
    for (const auto& d : nl.drives) {
        auto it = comp_index.find(d.instance);
        if (it == comp_index.end())
            throw validation_error("drive references unknown instance '" + d.instance + "'");
        const component& comp = c.comps[it->second];
        if (comp.kind != comp_kind::thermal_ps && comp.kind != comp_kind::pn_ps)
            throw validation_error("instance '" + d.instance +
                                   "' is not a phase shifter and cannot be driven");
        if (d.param != "v")
            throw validation_error("instance '" + d.instance + "' has no parameter '" + d.param +
                                   "'; phase shifters expose 'v'");
        if (!driven.insert(d.instance).second)
            throw validation_error("duplicate drive for '" + d.instance + ".v'");
        c.drives.push_back({it->second, d.stim, d.instance + "." + d.param});
    }

    for (const auto& x : nl.crosstalks) {
        auto ia = comp_index.find(x.a);
        auto ib = comp_index.find(x.b);
        if (ia == comp_index.end() || ib == comp_index.end())
            throw validation_error("crosstalk references unknown instance '" +
                                   (ia == comp_index.end() ? x.a : x.b) + "'");
        if (x.a == x.b)
            throw validation_error("crosstalk pairs two distinct thermal shifters");
        for (auto [self, other] : {std::pair{ia->second, x.b}, std::pair{ib->second, x.a}}) {
            component& comp = c.comps[self];
            if (comp.kind != comp_kind::thermal_ps)
                throw validation_error("crosstalk instance '" + comp.name +
                                       "' is not a thermal phase shifter");
            auto& m = std::get<thermal_ps_model>(comp.model);
            if (!m.neighbor.empty())
                throw validation_error("instance '" + comp.name +
                                       "' already has a crosstalk neighbor");
            m.crosstalk_chi = x.chi;
            m.neighbor = other;
            try {
                m.check();
            } catch (const validation_error& e) {
                throw validation_error("instance '" + comp.name + "': " + e.what());
            }
        }
    }

    return c;
}

// ---------- per-component scattering ----------

namespace {

double lookup_volts(const voltage_map& volts, const std::string& name) {
    auto it = volts.find(name);
    return it == volts.end() ? 0.0 : it->second;
}

} // namespace

smatrix component_smatrix(const circuit& c, int comp_index, double lambda,
                          const voltage_map& volts) {
    const component& comp = c.comps[comp_index];
    smatrix s;
    switch (comp.kind) {
    case comp_kind::laser:
    case comp_kind::photodetector:
        s = smatrix(1); // absorbing
        break;
    case comp_kind::waveguide: {
        const auto& m = std::get<wg_model>(comp.model);
        s = gen_waveguide(m.length, m.n_eff0, m.ng, m.lambda0, m.loss_db_per_cm, lambda);
        break;
    }
    case comp_kind::coupler: {
        const auto& m = std::get<coupler_model>(comp.model);
        s = gen_directional_coupler(m.kappa, m.excess_loss_db, m.imbalance);
        break;
    }
    case comp_kind::ybranch:
        s = gen_y_branch(std::get<ybranch_model>(comp.model).excess_loss_db);
        break;
    case comp_kind::bragg: {
        const auto& m = std::get<bragg_model>(comp.model);
        s = gen_bragg_reflector(m.periods, m.n1, m.n2, m.w1, m.w2, lambda);
        break;
    }
    case comp_kind::thermal_ps: {
        const auto& m = std::get<thermal_ps_model>(comp.model);
        double v_self = lookup_volts(volts, comp.name);
        double v_nb = m.neighbor.empty() ? 0.0 : lookup_volts(volts, m.neighbor);
        s = phase_shifter_smatrix(thermal_phase(m, v_self, v_nb), m.insertion_loss_db);
        break;
    }
    case comp_kind::pn_ps: {
        const auto& m = std::get<pn_ps_model>(comp.model);
        s = phase_shifter_smatrix(depletion_phase(m, lookup_volts(volts, comp.name)),
                                  m.insertion_loss_db);
        break;
    }
    case comp_kind::terminator:
        s = terminator_smatrix(std::get<term_model>(comp.model));
        break;
    case comp_kind::monitor:
        s = monitor_smatrix();
        break;
    case comp_kind::spfile: {
        const auto& m = std::get<spfile_model>(comp.model);
        try {
            s = interpolate(m.table, lambda);
        } catch (const validation_error& e) {
            throw validation_error("instance '" + comp.name + "': " + e.what());
        }
        break;
    }
    }

    if (c.unidirectional) {
        // keep only entries whose output net lies later in traversal order
        for (int i = 0; i < comp.port_count; ++i)
            for (int j = 0; j < comp.port_count; ++j)
                if (c.port_rank[comp.first_port + i] <= c.port_rank[comp.first_port + j])
                    s(i, j) = 0.0;
    }
    return s;
}

voltage_map drive_voltages(const circuit& c, double t) {
    voltage_map volts;
    for (const auto& d : c.drives)
        volts[c.comps[d.comp].name] = eval_stimulus(d.stim, t);
    return volts;
}

double default_carrier(const circuit& c) {
    if (c.lasers.empty())
        throw validation_error("circuit has no laser; pass an explicit wavelength");
    double wl = 0.0;
    for (int ci : c.lasers) {
        double w = std::get<laser_model>(c.comps[ci].model).wavelength0;
        if (wl == 0.0)
            wl = w;
        else if (w != wl)
            throw validation_error(
                "lasers disagree on wavelength; pass an explicit wavelength");
    }
    return wl;
}

// ---------- presets ----------

namespace {

const char* const preset_mi = R"(# Michelson interferometer: 3 dB splitter feeding two unequal arms, each
# closed by a loop mirror. The 50 um arm difference sets the fringe
# spacing: FSR = lambda^2 / (2 ng dL), about 5.7 nm near 1550 nm.
laser LD (n_src) power=1e-3 wl=1.55e-6
.monitor MSRC n_src
dc DC1 (n_src n_det arm_a arm_b) kappa=0.5
wg ARM_A (arm_a stem_a) length=100e-6 neff=2.4 ng=4.2 lambda0=1.55e-6 loss=0
wg ARM_B (arm_b stem_b) length=150e-6 neff=2.4 ng=4.2 lambda0=1.55e-6 loss=0
ybranch YA (stem_a loop_a1 loop_a2)
wg LOOP_A (loop_a1 loop_a2) length=60e-6 neff=2.4 ng=4.2 lambda0=1.55e-6 loss=0
ybranch YB (stem_b loop_b1 loop_b2)
wg LOOP_B (loop_b1 loop_b2) length=60e-6 neff=2.4 ng=4.2 lambda0=1.55e-6 loss=0
pd PD1 (n_det)
.monitor MDET n_det
.end
)";

const char* const preset_mim = R"(# Michelson interferometer modulator: balanced arms with a depletion
# shifter inside each loop mirror. PSA swings 0 <-> v_pi at 250 MHz while
# PSB holds a 0.2 pi bias, so the detected level toggles between two
# interior points of the fringe.
laser LD (n_src) power=1e-3 wl=1.55e-6
.monitor MSRC n_src
dc DC1 (n_src n_det arm_a arm_b) kappa=0.5
wg ARM_A (arm_a stem_a) length=100e-6 neff=2.4 ng=4.2 lambda0=1.55e-6 loss=0
wg ARM_B (arm_b stem_b) length=100e-6 neff=2.4 ng=4.2 lambda0=1.55e-6 loss=0
ybranch YA (stem_a loop_a1 loop_a2)
ps_pn PSA (loop_a1 mid_a) v_pi=4.8 length=800e-6
wg LOOP_A (mid_a loop_a2) length=60e-6 neff=2.4 ng=4.2 lambda0=1.55e-6 loss=0
ybranch YB (stem_b loop_b1 loop_b2)
ps_pn PSB (loop_b1 mid_b) v_pi=4.8 length=800e-6
wg LOOP_B (mid_b loop_b2) length=60e-6 neff=2.4 ng=4.2 lambda0=1.55e-6 loss=0
pd PD1 (n_det)
.monitor MDET n_det
.drive PSA.v square(0 4.8 4e-9 0.5 20e-12)
.drive PSB.v dc(0.96)
.end
)";

const char* const preset_fpc = R"(# Fabry-Perot cavity: two 120-period Bragg reflectors around a
# single-period spacer. Both gratings turn the same face toward the
# cavity, which keeps the round-trip phase crossing inside the stopband;
# the transmission peak lands near 1541 nm.
laser LD (n_src) power=1e-3 wl=1.54124e-6
.monitor MSRC n_src
bragg BL (n_src cav_l) periods=120 n1=2.4006 n2=2.4606 w1=158.5e-9 w2=158.5e-9
wg CAV (cav_l cav_r) length=317e-9 neff=2.4306 ng=2.4306 lambda0=1.55e-6 loss=0
bragg BR (n_det cav_r) periods=120 n1=2.4006 n2=2.4606 w1=158.5e-9 w2=158.5e-9
pd PD1 (n_det)
.monitor MDET n_det
.end
)";

const char* const preset_rcc = R"(# Reflection cancellation: a 90/10 tap watches the wave running back
# toward the laser. An MZI splitter (C1, PS1, C2) divides the light
# between a tunable loop reflector (PS2 + Y-branch loop) and the device
# path, whose return passes twice through an MZI attenuator (C3, PS3, C4)
# before a partially reflective device. Tuning PS1 and PS2 makes the two
# returns cancel at the tap.
laser LD (n_laser) power=1e-3 wl=1.55e-6
.monitor MBACK n_laser
dc TAP (n_laser n_back main_in tap_fwd) kappa=0.1 imbalance=0
pd PDBACK (n_back)
term TFWD (tap_fwd)
dc C1 (main_in c1_in2 mzi_up mzi_lo) kappa=0.5 imbalance=0
term T1 (c1_in2)
ps_thermal PS1 (mzi_up mzi_up2) p_pi=0.05625 r_heater=100
dc C2 (mzi_up2 mzi_lo refl_arm dev_arm) kappa=0.5 imbalance=0
ps_thermal PS2 (refl_arm refl_b) p_pi=0.05625 r_heater=100
ybranch YLOOP (refl_b loop_1 loop_2)
wg WLOOP (loop_1 loop_2) length=10e-6 neff=2.4 ng=2.4 lambda0=1.55e-6 loss=0
dc C3 (dev_arm c3_in2 att_up att_lo) kappa=0.5 imbalance=0
term T3 (c3_in2)
ps_thermal PS3 (att_up att_up2) p_pi=0.05625 r_heater=100
dc C4 (att_up2 att_lo att_dump dev_port) kappa=0.5 imbalance=0
term TDUMP (att_dump)
term DEV (dev_port) reflectivity=0.6184311969442494 phase=-0.43971036961535664
.drive PS1.v dc(0)
.drive PS2.v dc(0)
.drive PS3.v dc(1.1858541225631423)
.crosstalk PS1 PS2 0.0
.end
)";

} // namespace

std::string preset_text(const std::string& name) {
    if (name == "mi")
        return preset_mi;
    if (name == "mim")
        return preset_mim;
    if (name == "fpc")
        return preset_fpc;
    if (name == "rcc")
        return preset_rcc;
    throw validation_error("unknown preset '" + name + "' (valid: fpc, mi, mim, rcc)");
}

} // namespace wavesim
