#pragma once

#include "cutin/dbn.hpp"
#include "cutin/safety_model.hpp"
#include "cutin/types.hpp"

#include <nlohmann/json.hpp>

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace cutin {

/// Identifiers accepted by make_model, in canonical order.
const std::vector<std::string>& known_model_ids();

bool is_known_model(std::string_view id);

/// Build a model by identifier. `overrides` is the `models.<id>` object of an
/// experiment config (may be null). The DBN takes its network from `network`.
/// Throws ConfigError for unknown ids or bad override values.
std::unique_ptr<SafetyModel> make_model(std::string_view id, const SafetyParams& params,
                                        const nlohmann::json& overrides = nullptr,
                                        const dbn::NetworkSpec& network = {});

}  // namespace cutin
