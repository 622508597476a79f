#include "cutin/config.hpp"

#include "cutin/registry.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>

namespace cutin {

namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& where)
{
    if (!j.is_object()) throw ConfigError(where + " must be an object");
}

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> allowed)
{
    for (const auto& [key, _] : j.items()) {
        const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
        if (!ok) throw ConfigError("unknown key " + where + "." + key);
    }
}

void read_number(const json& j, const char* key, double& out, const std::string& where)
{
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
    out = v.get<double>();
}

void read_bool(const json& j, const char* key, bool& out, const std::string& where)
{
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_boolean()) throw ConfigError(where + "." + key + " must be true or false");
    out = v.get<bool>();
}

std::vector<double> read_axis(const json& j, const char* key, const std::string& where)
{
    const json& v = j.at(key);
    if (!v.is_array()) throw ConfigError(where + "." + key + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError(where + "." + key + " must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

template <class F>
auto rethrow_invalid(F&& f)
{
    try {
        return f();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

json node_to_json(const dbn::NodeSpec& n) { return {{"lo", n.lo}, {"hi", n.hi}, {"step", n.step}, {"unit", n.unit}}; }

void node_from_json(const json& j, dbn::NodeSpec& n, const std::string& where)
{
    require_object(j, where);
    reject_unknown(j, where, {"lo", "hi", "step", "unit"});
    read_number(j, "lo", n.lo, where);
    read_number(j, "hi", n.hi, where);
    read_number(j, "step", n.step, where);
    if (j.contains("unit")) {
        if (!j.at("unit").is_string()) throw ConfigError(where + ".unit must be a string");
        n.unit = j.at("unit").get<std::string>();
    }
}

}  // namespace

ScenarioConfig scenario_from_json(const json& j)
{
    const std::string where = "scenario";
    require_object(j, where);
    reject_unknown(j, where,
                   {"dx0", "dy0", "ve0", "vo0", "vy", "lane_width", "horizon", "dt", "vehicle_length", "vehicle_width",
                    "ego_kmh", "cutin_kmh", "lateral_speed"});
    auto both = [&](const char* a, const char* b) {
        if (j.contains(a) && j.contains(b))
            throw ConfigError(where + ": give either " + a + " or " + b + ", not both");
    };
    both("ve0", "ego_kmh");
    both("vo0", "cutin_kmh");
    both("vy", "lateral_speed");

    ScenarioConfig c;
    read_number(j, "dx0", c.dx0, where);
    read_number(j, "dy0", c.dy0, where);
    read_number(j, "ve0", c.ve0, where);
    read_number(j, "vo0", c.vo0, where);
    read_number(j, "vy", c.vy, where);
    read_number(j, "lane_width", c.lane_width, where);
    read_number(j, "horizon", c.horizon, where);
    read_number(j, "dt", c.dt, where);
    read_number(j, "vehicle_length", c.vehicle_length, where);
    read_number(j, "vehicle_width", c.vehicle_width, where);
    double v = 0.0;
    if (j.contains("ego_kmh")) {
        read_number(j, "ego_kmh", v, where);
        c.ve0 = kmh_to_ms(v);
    }
    if (j.contains("cutin_kmh")) {
        read_number(j, "cutin_kmh", v, where);
        c.vo0 = kmh_to_ms(v);
    }
    if (j.contains("lateral_speed")) {
        read_number(j, "lateral_speed", v, where);
        c.vy = -v;
    }
    rethrow_invalid([&] {
        c.validate();
        return 0;
    });
    return c;
}

json to_json(const ScenarioConfig& c)
{
    return {{"dx0", c.dx0},
            {"dy0", c.dy0},
            {"ve0", c.ve0},
            {"vo0", c.vo0},
            {"vy", c.vy},
            {"lane_width", c.lane_width},
            {"horizon", c.horizon},
            {"dt", c.dt},
            {"vehicle_length", c.vehicle_length},
            {"vehicle_width", c.vehicle_width}};
}

SafetyParams params_from_json(const json& j)
{
    const std::string where = "params";
    require_object(j, where);
    reject_unknown(j, where,
                   {"cc_rt", "cc_min_jerk", "cc_max_deceleration", "cc_release_deceleration", "cc_critical_ttc",
                    "a_comfort_max"});
    SafetyParams p;
    read_number(j, "cc_rt", p.cc_rt, where);
    read_number(j, "cc_min_jerk", p.cc_min_jerk, where);
    read_number(j, "cc_max_deceleration", p.cc_max_deceleration, where);
    read_number(j, "cc_release_deceleration", p.cc_release_deceleration, where);
    read_number(j, "cc_critical_ttc", p.cc_critical_ttc, where);
    read_number(j, "a_comfort_max", p.a_comfort_max, where);
    rethrow_invalid([&] {
        p.validate();
        return 0;
    });
    return p;
}

json to_json(const SafetyParams& p)
{
    return {{"cc_rt", p.cc_rt},
            {"cc_min_jerk", p.cc_min_jerk},
            {"cc_max_deceleration", p.cc_max_deceleration},
            {"cc_release_deceleration", p.cc_release_deceleration},
            {"cc_critical_ttc", p.cc_critical_ttc},
            {"a_comfort_max", p.a_comfort_max}};
}

sweep::SweepGrid grid_from_json(const json& j)
{
    const std::string where = "grid";
    require_object(j, where);
    reject_unknown(j, where, {"preset", "ego_speeds", "cutin_speeds", "lateral_speeds", "initial_distances"});
    sweep::SweepGrid g;
    if (j.contains("preset")) {
        const json& p = j.at("preset");
        if (!p.is_string()) throw ConfigError("grid.preset must be a string");
        const auto preset = sweep::parse_preset(p.get<std::string>());
        if (!preset)
            throw ConfigError("unknown grid preset '" + p.get<std::string>() +
                              "' (valid: paper-low, paper-high, fig6, fig7)");
        g = sweep::preset_grid(*preset);
    } else {
        for (const char* k : {"ego_speeds", "cutin_speeds", "lateral_speeds", "initial_distances"})
            if (!j.contains(k)) throw ConfigError(std::string("grid.") + k + " is required without a preset");
    }
    if (j.contains("ego_speeds")) g.ego_speeds = read_axis(j, "ego_speeds", where);
    if (j.contains("cutin_speeds")) g.cutin_speeds = read_axis(j, "cutin_speeds", where);
    if (j.contains("lateral_speeds")) g.lateral_speeds = read_axis(j, "lateral_speeds", where);
    if (j.contains("initial_distances")) g.initial_distances = read_axis(j, "initial_distances", where);
    rethrow_invalid([&] {
        g.validate();
        return 0;
    });
    return g;
}

json to_json(const sweep::SweepGrid& g)
{
    return {{"ego_speeds", g.ego_speeds},
            {"cutin_speeds", g.cutin_speeds},
            {"lateral_speeds", g.lateral_speeds},
            {"initial_distances", g.initial_distances}};
}

dbn::NetworkSpec network_from_json(const json& j)
{
    const std::string where = "dbn";
    require_object(j, where);
    reject_unknown(j, where,
                   {"sigmoid", "nodes", "dy0_sigma", "v_sigma", "le_threshold", "window", "denominator",
                    "baseline_guard", "pass_through_check", "wandering_margin", "comfort_jerk", "critical_ttc"});
    dbn::NetworkSpec n;
    if (j.contains("sigmoid")) {
        const json& s = j.at("sigmoid");
        require_object(s, "dbn.sigmoid");
        reject_unknown(s, "dbn.sigmoid", {"s_v", "m_v", "s_o", "m_o"});
        read_number(s, "s_v", n.sigmoid.s_v, "dbn.sigmoid");
        read_number(s, "m_v", n.sigmoid.m_v, "dbn.sigmoid");
        read_number(s, "s_o", n.sigmoid.s_o, "dbn.sigmoid");
        read_number(s, "m_o", n.sigmoid.m_o, "dbn.sigmoid");
    }
    if (j.contains("nodes")) {
        const json& nodes = j.at("nodes");
        require_object(nodes, "dbn.nodes");
        for (dbn::NodeSpec* node : {&n.dy0_real, &n.dy0_mess, &n.v_real, &n.v_mess, &n.a_real, &n.a_sigma}) {
            if (nodes.contains(node->name)) node_from_json(nodes.at(node->name), *node, "dbn.nodes." + node->name);
        }
        for (const auto& [key, _] : nodes.items()) {
            const bool known = key == n.dy0_real.name || key == n.dy0_mess.name || key == n.v_real.name ||
                               key == n.v_mess.name || key == n.a_real.name || key == n.a_sigma.name;
            if (!known) throw ConfigError("unknown key dbn.nodes." + key);
        }
    }
    read_number(j, "dy0_sigma", n.dy0_sigma, where);
    read_number(j, "v_sigma", n.v_sigma, where);
    read_number(j, "le_threshold", n.le_threshold, where);
    if (j.contains("window")) {
        const json& w = j.at("window");
        if (!w.is_number_unsigned() || w.get<std::size_t>() == 0)
            throw ConfigError("dbn.window must be a positive integer");
        n.window = w.get<std::size_t>();
    }
    if (j.contains("denominator")) {
        const json& d = j.at("denominator");
        const std::string s = d.is_string() ? d.get<std::string>() : std::string();
        if (s == "closing_speed")
            n.denominator = dbn::LongitudinalDenominator::closing_speed;
        else if (s == "position_difference")
            n.denominator = dbn::LongitudinalDenominator::position_difference;
        else
            throw ConfigError("dbn.denominator must be \"closing_speed\" or \"position_difference\"");
    }
    read_bool(j, "baseline_guard", n.baseline_guard, where);
    read_bool(j, "pass_through_check", n.pass_through_check, where);
    read_number(j, "wandering_margin", n.wandering_margin, where);
    read_number(j, "comfort_jerk", n.comfort_jerk, where);
    read_number(j, "critical_ttc", n.critical_ttc, where);
    rethrow_invalid([&] {
        n.validate();
        return 0;
    });
    return n;
}

json to_json(const dbn::NetworkSpec& n)
{
    json nodes = json::object();
    for (const dbn::NodeSpec* node : {&n.dy0_real, &n.dy0_mess, &n.v_real, &n.v_mess, &n.a_real, &n.a_sigma})
        nodes[node->name] = node_to_json(*node);
    return {{"sigmoid", {{"s_v", n.sigmoid.s_v}, {"m_v", n.sigmoid.m_v}, {"s_o", n.sigmoid.s_o}, {"m_o", n.sigmoid.m_o}}},
            {"nodes", nodes},
            {"dy0_sigma", n.dy0_sigma},
            {"v_sigma", n.v_sigma},
            {"le_threshold", n.le_threshold},
            {"window", n.window},
            {"denominator", n.denominator == dbn::LongitudinalDenominator::closing_speed ? "closing_speed"
                                                                                        : "position_difference"},
            {"baseline_guard", n.baseline_guard},
            {"pass_through_check", n.pass_through_check},
            {"wandering_margin", n.wandering_margin},
            {"comfort_jerk", n.comfort_jerk},
            {"critical_ttc", n.critical_ttc}};
}

ExperimentConfig experiment_from_json(const json& j)
{
    require_object(j, "config");
    reject_unknown(j, "config", {"scenario", "grid", "models", "params", "dbn"});
    ExperimentConfig e;
    if (j.contains("scenario")) e.scenario = scenario_from_json(j.at("scenario"));
    if (j.contains("grid")) e.grid = grid_from_json(j.at("grid"));
    if (j.contains("params")) e.params = params_from_json(j.at("params"));
    if (j.contains("dbn")) e.network = network_from_json(j.at("dbn"));

    if (j.contains("models")) {
        const json& m = j.at("models");
        const json* ids = &m;
        if (m.is_object()) {
            for (const auto& [key, value] : m.items()) {
                if (key == "ids") continue;
                if (!is_known_model(key)) throw ConfigError("unknown key models." + key);
                require_object(value, "models." + key);
                e.model_overrides[key] = value;
            }
            if (!m.contains("ids")) throw ConfigError("models.ids is required when models is an object");
            ids = &m.at("ids");
        }
        if (!ids->is_array()) throw ConfigError("models must be a list of model ids or an object with 'ids'");
        for (const auto& id : *ids) {
            if (!id.is_string()) throw ConfigError("model ids must be strings");
            e.model_ids.push_back(id.get<std::string>());
        }
    }
    for (const auto& id : e.model_ids) {
        if (!is_known_model(id)) {
            std::string valid;
            for (const auto& k : known_model_ids()) valid += (valid.empty() ? "" : ", ") + k;
            throw ConfigError("unknown model id '" + id + "' (valid: " + valid + ")");
        }
    }
    return e;
}

ExperimentConfig load_experiment(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed JSON in '" + path.string() + "': " + e.what());
    }
    try {
        return experiment_from_json(j);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

}  // namespace cutin
