#pragma once

#include "cutin/dbn.hpp"
#include "cutin/sweep.hpp"
#include "cutin/types.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cutin {

/// One experiment document: `scenario` or `grid`, `models`, `params`, `dbn`.
struct ExperimentConfig {
    std::optional<ScenarioConfig> scenario;
    std::optional<sweep::SweepGrid> grid;
    std::vector<std::string> model_ids;
    /// `models.<id>` override objects keyed by model id.
    nlohmann::json model_overrides = nlohmann::json::object();
    SafetyParams params;
    dbn::NetworkSpec network;
};

/// All parsers reject unknown keys and wrong types with ConfigError.
ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioConfig& c);

SafetyParams params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SafetyParams& p);

/// Either {"preset": name} optionally with axis overrides, or all four axes.
sweep::SweepGrid grid_from_json(const nlohmann::json& j);
nlohmann::json to_json(const sweep::SweepGrid& g);

dbn::NetworkSpec network_from_json(const nlohmann::json& j);
nlohmann::json to_json(const dbn::NetworkSpec& n);

ExperimentConfig experiment_from_json(const nlohmann::json& j);

/// Reads and parses a config file; errors name the path.
ExperimentConfig load_experiment(const std::filesystem::path& path);

}  // namespace cutin
