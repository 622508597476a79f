#pragma once

#include "cutin/safety_model.hpp"
#include "cutin/types.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace cutin::sim {

struct StepOutcome {
    VehicleState ego;
    VehicleState cutin;
    int clamp_events = 0;
};

/// Advance both vehicles by one tick.
///
/// The ego acceleration tracks cmd.a_target with its rate of change bounded by
/// params.cc_min_jerk and its value bounded to
/// [-cc_max_deceleration, a_comfort_max]. Velocity is updated before position.
/// The cut-in holds its longitudinal speed and moves laterally until its
/// center reaches the ego lane center (lateral offset 0).
StepOutcome step(const VehicleState& ego, const VehicleState& cutin, const AccelCommand& cmd,
                 const SafetyParams& params, double dt);

/// Footprint rectangles overlap on both axes.
bool detect_crash(const VehicleState& a, const VehicleState& b);

/// gap / v_rel for a closing pair; nullopt when diverging or holding distance.
/// A negative gap (longitudinal overlap) yields 0.
std::optional<double> compute_ttc(double gap, double v_rel);

/// Bumper-to-bumper longitudinal gap, cut-in ahead positive.
double bumper_gap(const VehicleState& ego, const VehicleState& cutin);

/// Lateral clearance between the two footprints (negative when they overlap).
double lateral_clearance(const VehicleState& ego, const VehicleState& cutin);

/// How far the cut-in's near edge lies inside the ego lane. Negative while it
/// is still outside the lane marking.
double lane_intrusion(const VehicleState& ego, const VehicleState& cutin, double lane_width);

/// The cut-in center is ahead of the ego center.
bool cutin_ahead(const VehicleState& ego, const VehicleState& cutin);

/// TTC as seen by the ego: defined only while the cut-in is ahead and its
/// footprint overlaps the ego's path laterally.
std::optional<double> scenario_ttc(const VehicleState& ego, const VehicleState& cutin);

struct Tick {
    double time = 0.0;
    VehicleState ego;
    VehicleState cutin;
    AccelCommand command;
    ModelDecision decision;
    std::optional<double> ttc;
};

struct Trace {
    std::vector<Tick> ticks;
    bool crash = false;
    std::optional<double> crash_time;
    std::optional<double> detection_time;
    std::optional<double> min_ttc;
    int clamp_events = 0;

    /// First tick with a negative ego acceleration.
    std::optional<double> first_decel_time() const;
    /// Largest |da/dt| between consecutive ticks.
    double max_abs_jerk() const;
    /// Largest deceleration magnitude reached.
    double max_decel() const;
};

/// Initial states for a config.
std::pair<VehicleState, VehicleState> initial_states(const ScenarioConfig& config);

/// Run one episode. Terminates on crash, on the horizon, or 5 s after the
/// cut-in finished its lane change with the ego no faster than it.
/// Throws NumericError when state turns non-finite.
Trace run_scenario(const ScenarioConfig& config, SafetyModel& model, const SafetyParams& params);

/// CSV export: t,ego_x,ego_y,ego_v,ego_a,cut_x,cut_y,cut_v,ttc,mode,decision
void write_trace_csv(std::ostream& out, const Trace& trace);

}  // namespace cutin::sim
