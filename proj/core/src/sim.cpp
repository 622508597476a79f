#include "cutin/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace cutin::sim {

namespace {

constexpr double kEps = 1e-9;
// Episode keeps running this long once the cut-in has settled in front of a
// slower ego.
constexpr double kSettleTail = 5.0;

bool finite(const VehicleState& s)
{
    return std::isfinite(s.pos_long) && std::isfinite(s.pos_lat) && std::isfinite(s.v_long) &&
           std::isfinite(s.v_lat) && std::isfinite(s.a_long);
}

}  // namespace

StepOutcome step(const VehicleState& ego, const VehicleState& cutin, const AccelCommand& cmd,
                 const SafetyParams& params, double dt)
{
    StepOutcome out{ego, cutin, 0};

    const double a_lo = -params.cc_max_deceleration;
    const double a_hi = params.a_comfort_max;

    double target = cmd.a_target;
    if (!std::isfinite(target)) {
        target = 0.0;
        ++out.clamp_events;
    }
    if (target < a_lo || target > a_hi) {
        target = std::clamp(target, a_lo, a_hi);
        ++out.clamp_events;
    }

    const double jerk = cmd.jerk_limit ? std::min(params.cc_min_jerk, *cmd.jerk_limit) : params.cc_min_jerk;
    const double max_da = jerk * dt;
    const double da = std::clamp(target - ego.a_long, -max_da, max_da);
    if (da != target - ego.a_long) ++out.clamp_events;

    double a = std::clamp(ego.a_long + da, a_lo, a_hi);
    double v = ego.v_long + a * dt;
    if (v < 0.0) {
        v = 0.0;
        ++out.clamp_events;
    }
    out.ego.a_long = a;
    out.ego.v_long = v;
    out.ego.pos_long = ego.pos_long + v * dt;

    out.cutin.pos_long = cutin.pos_long + cutin.v_long * dt;
    if (cutin.v_lat != 0.0) {
        const double lat = cutin.pos_lat + cutin.v_lat * dt;
        // Stop exactly on the ego lane center.
        const bool crossed = (cutin.pos_lat > 0.0 && lat <= kEps) || (cutin.pos_lat < 0.0 && lat >= -kEps);
        if (crossed) {
            out.cutin.pos_lat = 0.0;
            out.cutin.v_lat = 0.0;
        } else {
            out.cutin.pos_lat = lat;
        }
    }
    return out;
}

bool detect_crash(const VehicleState& a, const VehicleState& b)
{
    const double dx = std::abs(a.pos_long - b.pos_long);
    const double dy = std::abs(a.pos_lat - b.pos_lat);
    return dx < 0.5 * (a.length + b.length) && dy < 0.5 * (a.width + b.width);
}

std::optional<double> compute_ttc(double gap, double v_rel)
{
    if (!(v_rel > 0.0)) return std::nullopt;
    if (gap < 0.0) return 0.0;
    return gap / v_rel;
}

double bumper_gap(const VehicleState& ego, const VehicleState& cutin)
{
    return cutin.pos_long - ego.pos_long - 0.5 * (ego.length + cutin.length);
}

double lateral_clearance(const VehicleState& ego, const VehicleState& cutin)
{
    return std::abs(ego.pos_lat - cutin.pos_lat) - 0.5 * ego.width - 0.5 * cutin.width;
}

double lane_intrusion(const VehicleState& ego, const VehicleState& cutin, double lane_width)
{
    const double near_edge = std::abs(cutin.pos_lat - ego.pos_lat) - 0.5 * cutin.width;
    return 0.5 * lane_width - near_edge;
}

bool cutin_ahead(const VehicleState& ego, const VehicleState& cutin)
{
    return cutin.pos_long > ego.pos_long;
}

std::optional<double> scenario_ttc(const VehicleState& ego, const VehicleState& cutin)
{
    if (!cutin_ahead(ego, cutin) || lateral_clearance(ego, cutin) >= 0.0) return std::nullopt;
    return compute_ttc(bumper_gap(ego, cutin), ego.v_long - cutin.v_long);
}

std::optional<double> Trace::first_decel_time() const
{
    for (const auto& t : ticks)
        if (t.ego.a_long < -kEps) return t.time;
    return std::nullopt;
}

double Trace::max_abs_jerk() const
{
    double best = 0.0;
    for (std::size_t i = 1; i < ticks.size(); ++i) {
        const double dt = ticks[i].time - ticks[i - 1].time;
        best = std::max(best, std::abs(ticks[i].ego.a_long - ticks[i - 1].ego.a_long) / dt);
    }
    return best;
}

double Trace::max_decel() const
{
    double best = 0.0;
    for (const auto& t : ticks) best = std::max(best, -t.ego.a_long);
    return best;
}

std::pair<VehicleState, VehicleState> initial_states(const ScenarioConfig& config)
{
    VehicleState ego;
    ego.v_long = config.ve0;
    ego.length = config.vehicle_length;
    ego.width = config.vehicle_width;

    VehicleState cut;
    cut.pos_long = config.dx0;
    cut.pos_lat = config.dy0;
    cut.v_long = config.vo0;
    cut.v_lat = config.dy0 != 0.0 ? config.vy : 0.0;
    cut.length = config.vehicle_length;
    cut.width = config.vehicle_width;
    return {ego, cut};
}

Trace run_scenario(const ScenarioConfig& config, SafetyModel& model, const SafetyParams& params)
{
    config.validate();
    model.reset();

    auto [ego, cut] = initial_states(config);
    const bool lane_change = cut.v_lat != 0.0;

    Trace trace;
    trace.ticks.reserve(static_cast<std::size_t>(config.horizon / config.dt) + 2);
    std::optional<double> settled_at;

    for (long k = 0;; ++k) {
        const double t = static_cast<double>(k) * config.dt;
        const Observation obs{ego, cut, t, config.lane_width};
        const ModelDecision decision = model.safety_check(obs);
        const AccelCommand cmd = model.react(decision, obs, params);

        Tick tick{t, ego, cut, cmd, decision, scenario_ttc(ego, cut)};
        if (decision.unsafe && !trace.detection_time) trace.detection_time = t;
        if (tick.ttc && (!trace.min_ttc || *tick.ttc < *trace.min_ttc)) trace.min_ttc = tick.ttc;
        trace.ticks.push_back(tick);

        if (detect_crash(ego, cut)) {
            trace.crash = true;
            trace.crash_time = t;
            break;
        }

        const bool in_lane = lane_change && cut.v_lat == 0.0;
        if (!settled_at && in_lane && (ego.v_long <= cut.v_long + kEps || cmd.mode == Mode::follow))
            settled_at = t;
        if (settled_at && t - *settled_at >= kSettleTail - kEps) break;
        if (t >= config.horizon - kEps) break;

        const StepOutcome next = step(ego, cut, cmd, params, config.dt);
        if (!finite(next.ego) || !finite(next.cutin))
            throw NumericError("non-finite vehicle state at tick " + std::to_string(k + 1));
        trace.clamp_events += next.clamp_events;
        ego = next.ego;
        cut = next.cutin;
    }
    return trace;
}

void write_trace_csv(std::ostream& out, const Trace& trace)
{
    out << "t,ego_x,ego_y,ego_v,ego_a,cut_x,cut_y,cut_v,ttc,mode,decision\n";
    char buf[256];
    for (const auto& t : trace.ticks) {
        std::snprintf(buf, sizeof buf, "%.2f,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f,", t.time, t.ego.pos_long,
                      t.ego.pos_lat, t.ego.v_long, t.ego.a_long, t.cutin.pos_long, t.cutin.pos_lat,
                      t.cutin.v_long);
        out << buf;
        if (t.ttc) {
            std::snprintf(buf, sizeof buf, "%.4f", *t.ttc);
            out << buf;
        }
        out << ',' << to_string(t.command.mode) << ',' << (t.decision.unsafe ? "unsafe" : "safe") << '\n';
    }
}

}  // namespace cutin::sim
