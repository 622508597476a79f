#include "cutin/types.hpp"

#include <cmath>
#include <string>

namespace cutin {

namespace {

void require(bool ok, const std::string& what)
{
    if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void ScenarioConfig::validate() const
{
    for (double v : {dx0, dy0, ve0, vo0, vy, lane_width, horizon, dt, vehicle_length, vehicle_width})
        require(std::isfinite(v), "scenario: non-finite field");
    require(dx0 > 0.0, "scenario.dx0 must be > 0");
    require(horizon > 0.0, "scenario.horizon must be > 0");
    require(dt > 0.0, "scenario.dt must be > 0");
    require(ve0 >= 0.0, "scenario.ve0 must be >= 0");
    require(vo0 >= 0.0, "scenario.vo0 must be >= 0");
    require(lane_width > 0.0, "scenario.lane_width must be > 0");
    require(vehicle_length > 0.0 && vehicle_width > 0.0, "scenario: vehicle dimensions must be > 0");
}

void SafetyParams::validate() const
{
    require(cc_rt > 0.0, "params.cc_rt must be > 0");
    require(cc_min_jerk > 0.0, "params.cc_min_jerk must be > 0");
    require(cc_max_deceleration > 0.0, "params.cc_max_deceleration must be > 0");
    require(cc_release_deceleration > 0.0, "params.cc_release_deceleration must be > 0");
    require(cc_critical_ttc > 0.0, "params.cc_critical_ttc must be > 0");
    require(a_comfort_max > 0.0, "params.a_comfort_max must be > 0");
}

std::string_view to_string(Mode mode)
{
    switch (mode) {
    case Mode::cruise: return "cruise";
    case Mode::brake: return "brake";
    case Mode::follow: return "follow";
    case Mode::release: return "release";
    }
    return "?";
}

std::string_view to_string(Reason reason)
{
    switch (reason) {
    case Reason::none: return "none";
    case Reason::lateral_intrusion: return "lateral_intrusion";
    case Reason::ttc_violation: return "ttc_violation";
    case Reason::predicted_overlap: return "predicted_overlap";
    }
    return "?";
}

}  // namespace cutin
