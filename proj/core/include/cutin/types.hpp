#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cutin {

/// Kinematic state of one vehicle at one tick.
///
/// Longitudinal positions are in the world frame (forward positive). Lateral
/// positions are offsets from the ego lane center; the cut-in vehicle starts
/// on the positive side, so a negative lateral velocity moves it toward the
/// ego lane.
struct VehicleState {
    double pos_long = 0.0;
    double pos_lat = 0.0;
    double v_long = 0.0;
    double v_lat = 0.0;
    double a_long = 0.0;
    double length = 4.5;
    double width = 1.8;
};

struct ScenarioConfig {
    double dx0 = 41.0;  ///< initial center-to-center longitudinal distance, cut-in ahead
    double dy0 = 3.5;   ///< initial center-to-center lateral offset
    double ve0 = 25.0;  ///< ego initial speed [m/s]
    double vo0 = 2.78;  ///< cut-in speed [m/s]
    double vy = -1.0;   ///< cut-in lateral velocity, negative toward ego lane
    double lane_width = 3.5;
    double horizon = 15.0;
    double dt = 0.1;
    double vehicle_length = 4.5;
    double vehicle_width = 1.8;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// Baseline braking envelope shared by every model.
struct SafetyParams {
    double cc_rt = 0.75;
    double cc_min_jerk = 12.65;
    double cc_max_deceleration = 0.774 * 9.81;
    double cc_release_deceleration = 0.4;
    double cc_critical_ttc = 2.0;
    // Upper acceleration bound used when the ego recovers speed.
    double a_comfort_max = 2.0;

    void validate() const;
};

enum class Mode { cruise, brake, follow, release };

struct AccelCommand {
    double a_target = 0.0;
    Mode mode = Mode::cruise;
    /// Optional tighter bound on the rate of change while tracking a_target.
    std::optional<double> jerk_limit;
};

enum class Reason { none, lateral_intrusion, ttc_violation, predicted_overlap };

struct ModelDecision {
    bool unsafe = false;
    Reason reason = Reason::none;
    double p_unsafe = 0.0;
};

struct Observation {
    VehicleState ego;
    VehicleState cutin;
    double time = 0.0;
    double lane_width = 3.5;
};

std::string_view to_string(Mode mode);
std::string_view to_string(Reason reason);

/// Raised for malformed configs or parameter files.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a simulation produces non-finite state.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

constexpr double kmh_to_ms(double kmh) { return kmh / 3.6; }

}  // namespace cutin
