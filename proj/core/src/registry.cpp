#include "cutin/registry.hpp"

#include "cutin/models.hpp"

#include <algorithm>

namespace cutin {

namespace {

using nlohmann::json;

double number_or(const json& j, const char* key, double fallback)
{
    if (j.is_null() || !j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number()) throw ConfigError(std::string("model override '") + key + "' must be a number");
    return v.get<double>();
}

void reject_unknown_keys(const json& j, std::string_view model, std::initializer_list<const char*> allowed)
{
    if (j.is_null()) return;
    if (!j.is_object()) throw ConfigError("models." + std::string(model) + " must be an object");
    for (const auto& [key, _] : j.items()) {
        const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
        if (!ok) throw ConfigError("unknown key models." + std::string(model) + "." + key);
    }
}

models::FollowParams follow_from(const json& j)
{
    models::FollowParams f;
    f.time_gap = number_or(j, "follow_time_gap", f.time_gap);
    f.k_gap = number_or(j, "follow_k_gap", f.k_gap);
    f.k_speed = number_or(j, "follow_k_speed", f.k_speed);
    return f;
}

}  // namespace

const std::vector<std::string>& known_model_ids()
{
    static const std::vector<std::string> ids{"cc", "rss", "reg157", "dbn"};
    return ids;
}

bool is_known_model(std::string_view id)
{
    const auto& ids = known_model_ids();
    return std::find(ids.begin(), ids.end(), id) != ids.end();
}

std::unique_ptr<SafetyModel> make_model(std::string_view id, const SafetyParams& params, const json& overrides,
                                        const dbn::NetworkSpec& network)
{
    if (id == "cc") {
        reject_unknown_keys(overrides, id, {"wandering_margin", "follow_time_gap", "follow_k_gap", "follow_k_speed"});
        models::CcParams p;
        p.wandering_margin = number_or(overrides, "wandering_margin", p.wandering_margin);
        p.critical_ttc = params.cc_critical_ttc;
        p.follow = follow_from(overrides);
        return std::make_unique<models::CcHumanDriver>(p);
    }
    if (id == "rss") {
        reject_unknown_keys(overrides, id,
                            {"response_time", "max_accel", "min_brake", "lead_max_brake", "follow_time_gap",
                             "follow_k_gap", "follow_k_speed"});
        models::RssParams p;
        p.response_time = number_or(overrides, "response_time", params.cc_rt);
        p.max_accel = number_or(overrides, "max_accel", p.max_accel);
        p.min_brake = number_or(overrides, "min_brake", p.min_brake);
        p.lead_max_brake = number_or(overrides, "lead_max_brake", params.cc_max_deceleration);
        if (!(p.response_time > 0.0 && p.min_brake > 0.0 && p.lead_max_brake > 0.0 && p.max_accel >= 0.0))
            throw ConfigError("models.rss: parameters must be positive");
        return std::make_unique<models::RssModel>(p, follow_from(overrides));
    }
    if (id == "reg157") {
        reject_unknown_keys(overrides, id,
                            {"detect_margin", "hold_time", "follow_time_gap", "follow_k_gap", "follow_k_speed"});
        models::Reg157Params p;
        p.detect_margin = number_or(overrides, "detect_margin", p.detect_margin);
        p.hold_time = number_or(overrides, "hold_time", p.hold_time);
        p.critical_ttc = params.cc_critical_ttc;
        p.follow = follow_from(overrides);
        return std::make_unique<models::Reg157Model>(p);
    }
    if (id == "dbn") {
        reject_unknown_keys(overrides, id, {"follow_time_gap", "follow_k_gap", "follow_k_speed"});
        dbn::NetworkSpec spec = network;
        spec.critical_ttc = params.cc_critical_ttc;
        try {
            return std::make_unique<dbn::DbnModel>(spec, follow_from(overrides));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    std::string valid;
    for (const auto& k : known_model_ids()) valid += (valid.empty() ? "" : ", ") + k;
    throw ConfigError("unknown model id '" + std::string(id) + "' (valid: " + valid + ")");
}

}  // namespace cutin
