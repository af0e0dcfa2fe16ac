#include "gfcsim/scenario.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "gfcsim/network_io.hpp"

namespace gfcsim {

using nlohmann::json;

namespace {

/// Reads one JSON object level, recording provenance per consumed key and
/// rejecting keys it does not know.
class Reader {
public:
    Reader(const json& j, std::string prefix, ProvenanceMap& prov,
           const std::set<std::string>& override_paths)
        : j_(j), prefix_(std::move(prefix)), prov_(prov), ovr_(override_paths) {
        if (!j_.is_object())
            throw ConfigError("expected an object at '" + prefix_ + "'");
    }

    bool has(const char* key) const { return j_.contains(key); }

    double num(const char* key, double def, bool paper = false) {
        return get<double>(key, def, paper, "number");
    }
    double num_req(const char* key) { return req<double>(key, "number"); }
    int integer(const char* key, int def) { return get<int>(key, def, false, "integer"); }
    bool boolean(const char* key, bool def) { return get<bool>(key, def, false, "boolean"); }
    std::string str(const char* key, const std::string& def, bool paper = false) {
        return get<std::string>(key, def, paper, "string");
    }
    std::string str_req(const char* key) { return req<std::string>(key, "string"); }

    const json& raw(const char* key) {
        used_.insert(key);
        return j_.at(key);
    }
    const json* raw_opt(const char* key) {
        if (!j_.contains(key)) return nullptr;
        used_.insert(key);
        return &j_.at(key);
    }

    void done(std::initializer_list<const char*> allowed) const {
        std::set<std::string> ok(allowed.begin(), allowed.end());
        ok.insert(used_.begin(), used_.end());
        for (const auto& [key, _] : j_.items())
            if (!ok.count(key))
                throw ConfigError("unknown key '" + path(key.c_str()) + "'");
    }

    std::string path(const char* key) const {
        return prefix_.empty() ? key : prefix_ + "." + key;
    }

private:
    template <typename T>
    T get(const char* key, T def, bool paper, const char* want) {
        used_.insert(key);
        const std::string p = path(key);
        if (j_.contains(key)) {
            prov_[p] = ovr_.count(p) ? "override" : "file";
            return convert<T>(j_.at(key), p, want);
        }
        prov_[p] = paper ? "paper" : "default";
        return def;
    }

    template <typename T>
    T req(const char* key, const char* want) {
        used_.insert(key);
        const std::string p = path(key);
        if (!j_.contains(key))
            throw ConfigError("missing required field '" + p + "'");
        prov_[p] = ovr_.count(p) ? "override" : "file";
        return convert<T>(j_.at(key), p, want);
    }

    template <typename T>
    static T convert(const json& v, const std::string& p, const char* want) {
        try {
            return v.get<T>();
        } catch (const json::exception&) {
            throw ConfigError("field '" + p + "' is not a " + want);
        }
    }

    const json& j_;
    std::string prefix_;
    ProvenanceMap& prov_;
    const std::set<std::string>& ovr_;
    std::set<std::string> used_;
};

const json& opt_or_empty(const json* j) {
    static const json kEmpty = json::object();
    return j ? *j : kEmpty;
}

json parse_override_value(const std::string& text) {
    json v = json::parse(text, nullptr, false);
    if (v.is_discarded()) return json(text);  // bare string
    return v;
}

/// Sets a dotted path in the tree, creating objects along the way. Numeric
/// tokens index into arrays (which must already exist).
void set_path(json& root, const std::string& dotted, const json& value) {
    std::vector<std::string> parts;
    std::stringstream ss(dotted);
    std::string tok;
    while (std::getline(ss, tok, '.')) parts.push_back(tok);
    if (parts.empty()) throw ConfigError("empty override key");
    json* node = &root;
    for (size_t i = 0; i + 1 < parts.size(); ++i) {
        const auto& t = parts[i];
        if (node->is_array()) {
            size_t idx = 0;
            try { idx = std::stoul(t); } catch (...) {
                throw ConfigError("override '" + dotted + "': '" + t +
                                  "' is not an array index");
            }
            if (idx >= node->size())
                throw ConfigError("override '" + dotted + "': index out of range");
            node = &(*node)[idx];
        } else {
            node = &(*node)[t];
        }
    }
    if (node->is_array()) {
        size_t idx = 0;
        try { idx = std::stoul(parts.back()); } catch (...) {
            throw ConfigError("override '" + dotted + "': bad array index");
        }
        if (idx >= node->size())
            throw ConfigError("override '" + dotted + "': index out of range");
        (*node)[idx] = value;
    } else {
        (*node)[parts.back()] = value;
    }
}

const std::set<std::string> kRootKeys = {
    "name", "bases", "sim", "network", "network_overrides", "devices", "events"};

std::string normalize_override_key(const std::string& key) {
    const auto dotpos = key.find('.');
    const std::string head = key.substr(0, dotpos);
    if (kRootKeys.count(head)) return key;
    return "devices." + key;
}

OuterControllerConfig parse_controller(Reader& r, const Bases& bases) {
    OuterControllerConfig cfg;
    const std::string kind = r.str_req("kind");
    cfg.alpha = r.num("alpha", 0.5);
    cfg.setpoints.p_ref = r.num("p_ref", 0.0);
    cfg.setpoints.q_ref = r.num("q_ref", 0.0);
    cfg.setpoints.v_ref = r.num("v_ref", 1.0);
    cfg.setpoints.omega_ref = r.num("omega_ref", bases.omega, true);
    if (kind == "droop") {
        DroopParams d;
        d.d_omega = r.num("d_omega", 2.0 * M_PI * 0.05, true);
        cfg.kind = d;
        r.done({"kind", "alpha", "p_ref", "q_ref", "v_ref", "omega_ref", "d_omega"});
    } else if (kind == "vsg") {
        VsgParams v;
        v.j = r.num("j", 2e3, true);
        v.d_p = r.num("d_p", 1e5, true);
        cfg.kind = v;
        r.done({"kind", "alpha", "p_ref", "q_ref", "v_ref", "omega_ref", "j", "d_p"});
    } else if (kind == "dvoc") {
        DvocParams o;
        o.eta = r.num("eta", 0.021, true);
        o.mu = r.num("mu", 6.66e4, true);
        o.kappa = r.num("kappa", M_PI / 2.0, true);
        const std::string law = r.str("phase_law", "consistent");
        if (law == "consistent")
            o.phase_law = DvocPhaseLaw::consistent;
        else if (law == "paper_literal")
            o.phase_law = DvocPhaseLaw::paper_literal;
        else
            throw ConfigError("controller: phase_law must be 'consistent' or "
                              "'paper_literal', got '" + law + "'");
        cfg.kind = o;
        r.done({"kind", "alpha", "p_ref", "q_ref", "v_ref", "omega_ref", "eta",
                "mu", "kappa", "phase_law"});
    } else {
        throw ConfigError("controller: unknown kind '" + kind +
                          "' (expected droop, vsg or dvoc)");
    }
    return cfg;
}

GfcConfig parse_gfc(const std::string& name, const json& j,
                    const std::string& prefix, const Bases& bases,
                    ProvenanceMap& prov, const std::set<std::string>& ovr) {
    GfcConfig g;
    g.name = name;
    Reader r(j, prefix, prov, ovr);
    g.bus = r.str_req("bus");

    const json* cj = r.raw_opt("converter");
    Reader rc(opt_or_empty(cj), prefix + ".converter", prov, ovr);
    g.conv.c_dc = rc.num("c_dc", 0.1);
    g.conv.g_dc = rc.num("g_dc", 0.0);
    g.x_f = rc.num("x_f", 0.15);
    g.b_f = rc.num("b_f", 0.05);
    g.conv.r_f = rc.num("r_f", 0.005);
    g.conv.i_dc_max = rc.num("i_dc_max", 1.2);
    g.conv.v_dc_ref = rc.num("v_dc_ref", 1.0);
    g.conv.k_dc = rc.num("k_dc", 100.0);
    g.conv.tau_dc = rc.num("tau_dc", 0.05);
    rc.done({"c_dc", "g_dc", "x_f", "b_f", "r_f", "i_dc_max", "v_dc_ref",
             "k_dc", "tau_dc"});
    g.conv.l_f = g.x_f / bases.omega;
    g.conv.c_f = g.b_f / bases.omega;

    const json* oj = r.raw_opt("controller");
    if (!oj) throw ConfigError("device '" + name + "': missing 'controller'");
    Reader ro(*oj, prefix + ".controller", prov, ovr);
    g.outer = parse_controller(ro, bases);
    g.outer.setpoints.v_dc_ref = g.conv.v_dc_ref;

    const json* ij = r.raw_opt("inner");
    Reader ri(opt_or_empty(ij), prefix + ".inner", prov, ovr);
    const double ki_v_default = g.outer.is_vsg() ? 0.0021 : 0.5;
    g.inner.kp_v = ri.num("kp_v", 0.001, true);
    g.inner.ki_v = ri.num("ki_v", ki_v_default, true);
    g.inner.kp_i = ri.num("kp_i", 1.0);
    g.inner.ki_i = ri.num("ki_i", 10.0);
    g.inner.i_ac_max = ri.num("i_ac_max", 1.2);
    g.inner.decoupling = ri.boolean("decoupling", true);
    ri.done({"kp_v", "ki_v", "kp_i", "ki_i", "i_ac_max", "decoupling"});
    g.inner.l_decouple = g.conv.l_f;
    g.inner.c_decouple = g.conv.c_f;

    r.done({"type", "bus", "converter", "controller", "inner"});
    return g;
}

SmConfig parse_sm(const std::string& name, const json& j,
                  const std::string& prefix, ProvenanceMap& prov,
                  const std::set<std::string>& ovr) {
    SmConfig s;
    s.name = name;
    Reader r(j, prefix, prov, ovr);
    s.bus = r.str_req("bus");
    s.sm.inertia_h = r.num("inertia_h", 3.0);
    s.sm.d_damp = r.num("d_damp", 0.05);
    s.sm.x_t = r.num("x_t", 0.1);
    s.sm.r_s = r.num("r_s", 0.005);
    s.sm.e_mag = r.num("e_mag", 1.0);
    s.sm.governor_droop = r.num("governor_droop", 0.0637);
    s.sm.p_set = r.num("p_set", 0.0);
    r.done({"type", "bus", "inertia_h", "d_damp", "x_t", "r_s", "e_mag",
            "governor_droop", "p_set"});
    return s;
}

}  // namespace

void Scenario::validate() const {
    if (!(sim.dt > 0)) throw ConfigError("sim: dt must be > 0");
    if (!(sim.t_end >= 0)) throw ConfigError("sim: t_end must be >= 0");
    if (!(sim.t_preroll >= 0)) throw ConfigError("sim: t_preroll must be >= 0");
    if (sim.log_decimation < 1)
        throw ConfigError("sim: log_decimation must be >= 1");
    if (!(sim.collapse_threshold > 0 && sim.collapse_threshold < 1))
        throw ConfigError("sim: collapse_threshold must be in (0,1)");
    if (!(sim.power_filter_omega > 0))
        throw ConfigError("sim: power_filter_omega must be > 0");
    network.validate();
    std::set<std::string> names;
    for (const auto& g : gfcs) {
        if (!names.insert(g.name).second)
            throw ConfigError("duplicate device name '" + g.name + "'");
        if (network.bus_index(g.bus) < 0)
            throw ConfigError("device '" + g.name + "' attached to unknown bus '" +
                              g.bus + "'");
        g.conv.validate();
        g.outer.validate();
        g.inner.validate();
    }
    for (const auto& s : sms) {
        if (!names.insert(s.name).second)
            throw ConfigError("duplicate device name '" + s.name + "'");
        if (network.bus_index(s.bus) < 0)
            throw ConfigError("device '" + s.name + "' attached to unknown bus '" +
                              s.bus + "'");
        s.sm.validate();
    }
    for (const auto& e : events) {
        if (!(e.t_event >= 0)) throw ConfigError("event: t must be >= 0");
        if (network.bus_index(e.bus) < 0)
            throw ConfigError("event references unknown bus '" + e.bus + "'");
    }
    for (size_t i = 1; i < events.size(); ++i)
        if (events[i].t_event < events[i - 1].t_event)
            throw ConfigError("events must be sorted by time");
}

Scenario parse_scenario(const json& input, const std::string& base_dir,
                        const OverrideList& overrides, ProvenanceMap& prov) {
    json j = input.is_object() && input.contains("scenario") ? input.at("scenario")
                                                             : input;
    std::set<std::string> ovr_paths;
    for (const auto& [key, text] : overrides) {
        const std::string norm = normalize_override_key(key);
        set_path(j, norm, parse_override_value(text));
        ovr_paths.insert(norm);
    }

    Scenario s;
    Reader r(j, "", prov, ovr_paths);
    s.name = r.str("name", "unnamed");

    const json* bj = r.raw_opt("bases");
    Reader rb(opt_or_empty(bj), "bases", prov, ovr_paths);
    s.bases.s_mva = rb.num("s_mva", 100.0, true);
    s.bases.v_kv = rb.num("v_kv", 230.0, true);
    s.bases.omega = rb.num("omega", 2.0 * M_PI * 50.0, true);
    rb.done({"s_mva", "v_kv", "omega"});

    const json* sj = r.raw_opt("sim");
    Reader rs(opt_or_empty(sj), "sim", prov, ovr_paths);
    s.sim.dt = rs.num("dt", 2e-5);
    s.sim.t_end = rs.num("t_end", 10.0);
    s.sim.t_preroll = rs.num("t_preroll", 0.5);
    s.sim.log_decimation = rs.integer("log_decimation", 50);
    s.sim.collapse_threshold = rs.num("collapse_threshold", 0.7);
    s.sim.power_filter_omega = rs.num("power_filter_omega", 2.0 * M_PI * 10.0);
    rs.done({"dt", "t_end", "t_preroll", "log_decimation", "collapse_threshold",
             "power_filter_omega"});

    // Network: builtin name, file path, or inline description.
    std::map<std::string, double> net_overrides;
    if (const json* no = r.raw_opt("network_overrides")) {
        for (const auto& [key, val] : no->items()) {
            if (!val.is_number())
                throw ConfigError("network_overrides." + key + " must be a number");
            net_overrides[key] = val.get<double>();
            prov["network_overrides." + key] =
                ovr_paths.count("network_overrides." + key) ? "override" : "file";
        }
    }
    if (const json* nj = r.raw_opt("network")) {
        if (nj->is_string()) {
            const std::string ref = nj->get<std::string>();
            if (ref == "ieee9") {
                s.network = build_ieee9(net_overrides, s.bases.omega);
                prov["network"] = "builtin:ieee9";
            } else {
                std::filesystem::path p(ref);
                if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
                std::ifstream in(p);
                if (!in)
                    throw ConfigError("cannot open network file '" + p.string() + "'");
                json nd;
                try {
                    nd = json::parse(in);
                } catch (const json::parse_error& e) {
                    throw ConfigError("network file '" + p.string() + "': " + e.what());
                }
                for (const auto& [key, value] : net_overrides)
                    apply_network_override(nd, key, value);
                s.network = parse_network(nd, s.bases.omega);
                prov["network"] = "file:" + ref;
            }
        } else {
            json nd = *nj;
            for (const auto& [key, value] : net_overrides)
                apply_network_override(nd, key, value);
            s.network = parse_network(nd, s.bases.omega);
            prov["network"] = "file";
        }
    } else {
        s.network = build_ieee9(net_overrides, s.bases.omega);
        prov["network"] = "builtin:ieee9";
    }

    const json* dj = r.raw_opt("devices");
    if (!dj || !dj->is_object() || dj->empty())
        throw ConfigError("missing required field 'devices'");
    for (const auto& [name, dev] : dj->items()) {
        const std::string prefix = "devices." + name;
        if (!dev.is_object())
            throw ConfigError("device '" + name + "' must be an object");
        const std::string type = dev.value("type", "gfc");
        prov[prefix + ".type"] = dev.contains("type") ? "file" : "default";
        if (type == "gfc")
            s.gfcs.push_back(parse_gfc(name, dev, prefix, s.bases, prov, ovr_paths));
        else if (type == "sm")
            s.sms.push_back(parse_sm(name, dev, prefix, prov, ovr_paths));
        else
            throw ConfigError("device '" + name + "': unknown type '" + type + "'");
    }

    if (const json* ej = r.raw_opt("events")) {
        if (!ej->is_array()) throw ConfigError("'events' must be an array");
        int idx = 0;
        for (const auto& e : *ej) {
            const std::string prefix = "events." + std::to_string(idx++);
            Reader re(e, prefix, prov, ovr_paths);
            LoadStepEvent ev;
            ev.t_event = re.num_req("t");
            ev.bus = re.str_req("bus");
            ev.p_before = re.num("p_before", 0.0);
            ev.p_after = re.num_req("p_after");
            ev.q_after = re.num("q_after", 0.0);
            re.done({"t", "bus", "p_before", "p_after", "q_after"});
            s.events.push_back(ev);
        }
    }
    std::stable_sort(s.events.begin(), s.events.end(),
                     [](const LoadStepEvent& a, const LoadStepEvent& b) {
                         return a.t_event < b.t_event;
                     });

    r.done({"name", "bases", "sim", "network", "network_overrides", "devices",
            "events"});
    s.validate();
    return s;
}

Scenario parse_scenario_file(const std::string& path,
                             const OverrideList& overrides,
                             ProvenanceMap& prov) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("scenario '" + path + "': syntax error: " + e.what());
    }
    const std::string dir = std::filesystem::path(path).parent_path().string();
    return parse_scenario(j, dir, overrides, prov);
}

json scenario_to_json(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["bases"] = {{"s_mva", s.bases.s_mva}, {"v_kv", s.bases.v_kv},
                  {"omega", s.bases.omega}};
    j["sim"] = {{"dt", s.sim.dt},
                {"t_end", s.sim.t_end},
                {"t_preroll", s.sim.t_preroll},
                {"log_decimation", s.sim.log_decimation},
                {"collapse_threshold", s.sim.collapse_threshold},
                {"power_filter_omega", s.sim.power_filter_omega}};
    j["network"] = network_to_json(s.network);
    json devices = json::object();
    for (const auto& g : s.gfcs) {
        json d;
        d["type"] = "gfc";
        d["bus"] = g.bus;
        d["converter"] = {{"c_dc", g.conv.c_dc},       {"g_dc", g.conv.g_dc},
                          {"x_f", g.x_f},              {"b_f", g.b_f},
                          {"r_f", g.conv.r_f},         {"i_dc_max", g.conv.i_dc_max},
                          {"v_dc_ref", g.conv.v_dc_ref}, {"k_dc", g.conv.k_dc},
                          {"tau_dc", g.conv.tau_dc}};
        json c;
        c["alpha"] = g.outer.alpha;
        c["p_ref"] = g.outer.setpoints.p_ref;
        c["q_ref"] = g.outer.setpoints.q_ref;
        c["v_ref"] = g.outer.setpoints.v_ref;
        c["omega_ref"] = g.outer.setpoints.omega_ref;
        if (const auto* dr = std::get_if<DroopParams>(&g.outer.kind)) {
            c["kind"] = "droop";
            c["d_omega"] = dr->d_omega;
        } else if (const auto* vs = std::get_if<VsgParams>(&g.outer.kind)) {
            c["kind"] = "vsg";
            c["j"] = vs->j;
            c["d_p"] = vs->d_p;
        } else {
            const auto& dv = std::get<DvocParams>(g.outer.kind);
            c["kind"] = "dvoc";
            c["eta"] = dv.eta;
            c["mu"] = dv.mu;
            c["kappa"] = dv.kappa;
            c["phase_law"] = dv.phase_law == DvocPhaseLaw::consistent
                                 ? "consistent" : "paper_literal";
        }
        d["controller"] = c;
        d["inner"] = {{"kp_v", g.inner.kp_v},   {"ki_v", g.inner.ki_v},
                      {"kp_i", g.inner.kp_i},   {"ki_i", g.inner.ki_i},
                      {"i_ac_max", g.inner.i_ac_max},
                      {"decoupling", g.inner.decoupling}};
        devices[g.name] = d;
    }
    for (const auto& m : s.sms) {
        devices[m.name] = {{"type", "sm"},
                           {"bus", m.bus},
                           {"inertia_h", m.sm.inertia_h},
                           {"d_damp", m.sm.d_damp},
                           {"x_t", m.sm.x_t},
                           {"r_s", m.sm.r_s},
                           {"e_mag", m.sm.e_mag},
                           {"governor_droop", m.sm.governor_droop},
                           {"p_set", m.sm.p_set}};
    }
    j["devices"] = devices;
    j["events"] = json::array();
    for (const auto& e : s.events)
        j["events"].push_back({{"t", e.t_event},
                               {"bus", e.bus},
                               {"p_before", e.p_before},
                               {"p_after", e.p_after},
                               {"q_after", e.q_after}});
    return j;
}

json resolved_record(const Scenario& s, const ProvenanceMap& prov) {
    json j;
    j["scenario"] = scenario_to_json(s);
    j["provenance"] = json(prov);
    return j;
}

}  // namespace gfcsim
