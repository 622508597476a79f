#include "cutin/models.hpp"

#include "cutin/sim.hpp"

#include <algorithm>
#include <cmath>

namespace cutin::models {

namespace {

constexpr double kEps = 1e-9;

ModelDecision verdict(bool unsafe, Reason reason)
{
    return unsafe ? ModelDecision{true, reason, 1.0} : ModelDecision{false, Reason::none, 0.0};
}

bool ttc_below(const Observation& obs, double critical)
{
    const auto ttc = sim::compute_ttc(sim::bumper_gap(obs.ego, obs.cutin), obs.ego.v_long - obs.cutin.v_long);
    return ttc && *ttc < critical;
}

}  // namespace

double rss_safe_distance(double v_rear, double v_front, const RssParams& p)
{
    const double rho = p.response_time;
    const double v_resp = v_rear + rho * p.max_accel;
    const double d = v_rear * rho + 0.5 * p.max_accel * rho * rho + v_resp * v_resp / (2.0 * p.min_brake) -
                     v_front * v_front / (2.0 * p.lead_max_brake);
    return std::max(0.0, d);
}

bool cc_lateral_trigger(const Observation& obs, double lane_width, double margin)
{
    return sim::lane_intrusion(obs.ego, obs.cutin, lane_width) > margin;
}

AccelCommand follow_command(const Observation& obs, const SafetyParams& params, const FollowParams& follow)
{
    if (!sim::cutin_ahead(obs.ego, obs.cutin)) return {0.0, Mode::follow, std::nullopt};
    const double gap = sim::bumper_gap(obs.ego, obs.cutin);
    const double desired = follow.standstill + follow.time_gap * obs.ego.v_long;
    const double a = follow.k_gap * (gap - desired) + follow.k_speed * (obs.cutin.v_long - obs.ego.v_long);
    return {std::clamp(a, -params.cc_max_deceleration, params.a_comfort_max), Mode::follow, std::nullopt};
}

// ---- ReactionController ----

void ReactionController::reset()
{
    phase_ = Phase::idle;
    armed_at_ = 0.0;
}

AccelCommand ReactionController::react(bool unsafe, const Observation& obs, const SafetyParams& params)
{
    const double latency = latency_.value_or(params.cc_rt);
    const double t = obs.time;

    // A few passes let zero-latency and instant-release transitions settle
    // within the same tick.
    for (int pass = 0; pass < 4; ++pass) {
        const Phase before = phase_;
        switch (phase_) {
        case Phase::idle:
            if (unsafe) {
                phase_ = Phase::pending;
                armed_at_ = t;
            }
            break;
        case Phase::pending:
            if (!unsafe)
                phase_ = Phase::releasing;
            else if (t - armed_at_ >= latency - kEps)
                phase_ = Phase::braking;
            break;
        case Phase::braking:
            if (obs.ego.v_long < obs.cutin.v_long)
                phase_ = Phase::following;
            else if (!unsafe)
                phase_ = Phase::releasing;
            break;
        case Phase::releasing:
            if (unsafe) {
                phase_ = Phase::pending;
                armed_at_ = t;
            } else if (obs.ego.a_long >= -params.cc_release_deceleration - kEps) {
                phase_ = Phase::idle;
            }
            break;
        case Phase::following:
            break;
        }
        if (phase_ == before) break;
    }

    switch (phase_) {
    case Phase::braking: return {-params.cc_max_deceleration, Mode::brake, std::nullopt};
    case Phase::following: return follow_command(obs, params, follow_);
    case Phase::releasing: return {-params.cc_release_deceleration, Mode::release, std::nullopt};
    case Phase::idle:
    case Phase::pending: break;
    }
    return {0.0, Mode::cruise, std::nullopt};
}

// ---- CC human driver ----

ModelDecision CcHumanDriver::safety_check(const Observation& obs)
{
    if (!sim::cutin_ahead(obs.ego, obs.cutin)) return verdict(false, Reason::none);
    const bool unsafe = cc_lateral_trigger(obs, obs.lane_width, params_.wandering_margin) &&
                        ttc_below(obs, params_.critical_ttc);
    return verdict(unsafe, Reason::ttc_violation);
}

AccelCommand CcHumanDriver::react(const ModelDecision& decision, const Observation& obs, const SafetyParams& params)
{
    return controller_.react(decision.unsafe, obs, params);
}

std::unique_ptr<SafetyModel> CcHumanDriver::clone() const
{
    return std::make_unique<CcHumanDriver>(params_);
}

// ---- RSS ----

ModelDecision RssModel::safety_check(const Observation& obs)
{
    if (!sim::cutin_ahead(obs.ego, obs.cutin)) return verdict(false, Reason::none);
    if (sim::lane_intrusion(obs.ego, obs.cutin, obs.lane_width) <= 0.0) return verdict(false, Reason::none);
    const double d_min = rss_safe_distance(obs.ego.v_long, obs.cutin.v_long, params_);
    return verdict(sim::bumper_gap(obs.ego, obs.cutin) < d_min, Reason::lateral_intrusion);
}

AccelCommand RssModel::react(const ModelDecision& decision, const Observation& obs, const SafetyParams& params)
{
    return controller_.react(decision.unsafe, obs, params);
}

std::unique_ptr<SafetyModel> RssModel::clone() const
{
    return std::make_unique<RssModel>(params_, follow_);
}

// ---- Reg157 ----

ModelDecision Reg157Model::safety_check(const Observation& obs)
{
    bool raw = false;
    if (sim::cutin_ahead(obs.ego, obs.cutin)) {
        raw = sim::lane_intrusion(obs.ego, obs.cutin, obs.lane_width) >= params_.detect_margin &&
              ttc_below(obs, params_.critical_ttc);
    }
    if (raw) last_raw_unsafe_ = obs.time;
    const bool held = last_raw_unsafe_ && obs.time - *last_raw_unsafe_ < params_.hold_time - kEps &&
                      sim::cutin_ahead(obs.ego, obs.cutin);
    return verdict(raw || held, Reason::ttc_violation);
}

AccelCommand Reg157Model::react(const ModelDecision& decision, const Observation& obs, const SafetyParams& params)
{
    return controller_.react(decision.unsafe, obs, params);
}

void Reg157Model::reset()
{
    controller_.reset();
    last_raw_unsafe_.reset();
}

std::unique_ptr<SafetyModel> Reg157Model::clone() const
{
    return std::make_unique<Reg157Model>(params_);
}

}  // namespace cutin::models
