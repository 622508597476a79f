#pragma once

#include "cutin/types.hpp"

#include <memory>
#include <string>
#include <string_view>

namespace cutin {

/// Uniform interface every safety model implements.
///
/// One instance serves one scenario run. safety_check is called first on every
/// tick, then react with the decision it produced.
class SafetyModel {
public:
    virtual ~SafetyModel() = default;

    virtual std::string_view id() const = 0;

    /// Decision threshold on p_unsafe used by this model.
    virtual double threshold() const { return 1.0; }

    virtual ModelDecision safety_check(const Observation& obs) = 0;
    virtual AccelCommand react(const ModelDecision& decision, const Observation& obs,
                               const SafetyParams& params) = 0;

    /// Drop all per-scenario state.
    virtual void reset() = 0;

    /// Fresh instance with the same configuration and empty state.
    virtual std::unique_ptr<SafetyModel> clone() const = 0;
};

}  // namespace cutin
