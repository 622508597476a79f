#include "cutin/dbn.hpp"

#include "cutin/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cutin::dbn {

namespace {

constexpr double kExpClamp = 700.0;
constexpr double kEps = 1e-9;

double safe_exp(double x)
{
    return std::exp(std::clamp(x, -kExpClamp, kExpClamp));
}

/// Lateral velocity of the cut-in relative to the ego, negative when approaching.
double approach_velocity(const VehicleState& ego, const VehicleState& cutin)
{
    const double rel = cutin.v_lat - ego.v_lat;
    return cutin.pos_lat >= ego.pos_lat ? rel : -rel;
}

}  // namespace

// ---- sigmoid ----

void SigmoidParams::validate() const
{
    if (!(s_v > 0.0) || !(s_o > 0.0)) throw std::invalid_argument("sigmoid: s_v and s_o must be > 0");
    if (!std::isfinite(m_v) || !std::isfinite(m_o)) throw std::invalid_argument("sigmoid: non-finite slope");
}

double le_velocity_factor(double v_lat, const SigmoidParams& p)
{
    return p.s_v / (p.s_v + safe_exp(p.m_v * v_lat));
}

double le_offset_factor(double dy0_lat, const SigmoidParams& p)
{
    return p.s_o / (p.s_o + safe_exp(p.m_o * dy0_lat));
}

double le_probability(double v_lat, double dy0_lat, const SigmoidParams& p)
{
    return std::min(le_velocity_factor(v_lat, p) * le_offset_factor(dy0_lat, p), 1.0);
}

// ---- nodes ----

std::size_t NodeSpec::state_count() const
{
    return static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
}

double NodeSpec::state_value(std::size_t index) const
{
    return lo + static_cast<double>(index) * step;
}

void NodeSpec::validate() const
{
    if (!(hi > lo) || !(step > 0.0)) throw std::invalid_argument("node " + name + ": need hi > lo and step > 0");
}

std::size_t discretize(double value, const NodeSpec& spec)
{
    const double last = static_cast<double>(spec.state_count() - 1);
    if (std::isnan(value)) return 0;
    const double idx = std::round((value - spec.lo) / spec.step);
    return static_cast<std::size_t>(std::clamp(idx, 0.0, last));
}

// ---- beliefs ----

DiscreteBelief DiscreteBelief::uniform(const NodeSpec& node)
{
    const std::size_t n = node.state_count();
    return {node, std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

double DiscreteBelief::total() const
{
    return std::accumulate(probs.begin(), probs.end(), 0.0);
}

double DiscreteBelief::mean() const
{
    double m = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) m += probs[i] * node.state_value(i);
    return m;
}

double DiscreteBelief::variance() const
{
    const double m = mean();
    double v = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double d = node.state_value(i) - m;
        v += probs[i] * d * d;
    }
    return v;
}

UpdateResult filter_update(const DiscreteBelief& prior, double measurement, double sigma)
{
    if (!(sigma > 0.0)) throw std::invalid_argument("filter_update: sigma must be > 0");

    const std::size_t n = prior.probs.size();
    std::vector<double> log_post(n, -std::numeric_limits<double>::infinity());
    double best = -std::numeric_limits<double>::infinity();
    if (std::isfinite(measurement)) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!(prior.probs[i] > 0.0)) continue;
            const double z = (prior.node.state_value(i) - measurement) / sigma;
            log_post[i] = std::log(prior.probs[i]) - 0.5 * z * z;
            best = std::max(best, log_post[i]);
        }
    }
    if (!std::isfinite(best)) return {prior, true};

    UpdateResult out{{prior.node, std::vector<double>(n, 0.0)}, false};
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out.posterior.probs[i] = std::exp(log_post[i] - best);
        sum += out.posterior.probs[i];
    }
    for (double& p : out.posterior.probs) p /= sum;
    return out;
}

DiscreteBelief predict(const DiscreteBelief& belief)
{
    const std::size_t n = belief.probs.size();
    DiscreteBelief out{belief.node, std::vector<double>(n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
        const double p = belief.probs[i];
        out.probs[i] += 0.5 * p;
        out.probs[i > 0 ? i - 1 : i] += 0.25 * p;
        out.probs[i + 1 < n ? i + 1 : i] += 0.25 * p;
    }
    return out;
}

// ---- hypotheses ----

double safe_lat(const VehicleState& ego, const VehicleState& cutin)
{
    return sim::lateral_clearance(ego, cutin) > 0.0 ? 1.0 : 0.0;
}

double safe_long_value(const VehicleState& ego, const VehicleState& cutin, LongitudinalDenominator mode)
{
    const double num = std::abs(sim::bumper_gap(ego, cutin));
    const double denom = mode == LongitudinalDenominator::closing_speed ? ego.v_long - cutin.v_long
                                                                        : ego.pos_long - cutin.pos_long;
    return denom != 0.0 ? num / denom : 0.0;
}

double safe_long(const VehicleState& ego, const VehicleState& cutin, const SafetyParams& params,
                 LongitudinalDenominator mode)
{
    const double gap = sim::bumper_gap(ego, cutin);
    if (gap <= 0.0) return 0.0;
    if (mode == LongitudinalDenominator::closing_speed && ego.v_long - cutin.v_long <= 0.0) return 1.0;
    return safe_long_value(ego, cutin, mode) > params.cc_critical_ttc ? 1.0 : 0.0;
}

std::optional<double> time_to_boundary(double dy0, double vy)
{
    if (!(vy < 0.0) || !(dy0 > 0.0)) return std::nullopt;
    return dy0 / -vy;
}

Prediction predict_positions(double ttb, double ve0, double vo0, double x_ego, double x_obj, double margin)
{
    Prediction p;
    p.x_pred_ego = ve0 * ttb + x_ego;
    p.x_pred_obj = vo0 * ttb + x_obj;
    p.overlap = x_ego + margin > x_obj || p.x_pred_ego + margin > p.x_pred_obj;
    return p;
}

void NetworkSpec::validate() const
{
    sigmoid.validate();
    for (const NodeSpec* n : {&dy0_real, &dy0_mess, &v_real, &v_mess, &a_real, &a_sigma}) n->validate();
    if (!(dy0_sigma > 0.0) || !(v_sigma > 0.0)) throw std::invalid_argument("dbn: sigmas must be > 0");
    if (!(le_threshold > 0.0 && le_threshold <= 1.0)) throw std::invalid_argument("dbn: le_threshold must be in (0,1]");
    if (window == 0) throw std::invalid_argument("dbn: window must be >= 1");
    if (!(comfort_jerk > 0.0)) throw std::invalid_argument("dbn: comfort_jerk must be > 0");
    if (!(critical_ttc > 0.0)) throw std::invalid_argument("dbn: critical_ttc must be > 0");
}

DbnDecision dbn_safety_check(const std::deque<Observation>& window, const NetworkSpec& spec)
{
    DbnDecision out;
    if (window.empty()) return out;
    const Observation& now = window.back();
    const VehicleState& ego = now.ego;
    const VehicleState& cut = now.cutin;

    // Forward filtering over the window, one slice per observation.
    DiscreteBelief dy = DiscreteBelief::uniform(spec.dy0_real);
    DiscreteBelief vl = DiscreteBelief::uniform(spec.v_real);
    const std::size_t first = window.size() > spec.window ? window.size() - spec.window : 0;
    for (std::size_t k = first; k < window.size(); ++k) {
        const Observation& o = window[k];
        if (k != first) {
            dy = predict(dy);
            vl = predict(vl);
        }
        const double dy_meas = -sim::lane_intrusion(o.ego, o.cutin, o.lane_width);
        const double v_meas = approach_velocity(o.ego, o.cutin);
        // Evidence enters as a state of the measurement node.
        const double dy_ev = spec.dy0_mess.state_value(discretize(dy_meas, spec.dy0_mess));
        const double v_ev = spec.v_mess.state_value(discretize(v_meas, spec.v_mess));
        dy = filter_update(dy, dy_ev, spec.dy0_sigma).posterior;
        vl = filter_update(vl, v_ev, spec.v_sigma).posterior;
    }

    HypothesisResult& h = out.hypotheses;
    h.dy0_lat_filtered = dy.mean();
    h.v_lat_filtered = vl.mean();
    h.p_le = le_probability(h.v_lat_filtered, h.dy0_lat_filtered, spec.sigmoid);
    h.p_safe_lat = safe_lat(ego, cut);
    SafetyParams crit;
    crit.cc_critical_ttc = spec.critical_ttc;
    h.p_safe = safe_long(ego, cut, crit, spec.denominator);
    h.ttb = time_to_boundary(std::abs(cut.pos_lat - ego.pos_lat), h.v_lat_filtered);
    if (h.ttb) {
        h.predicted_overlap = predict_positions(*h.ttb, ego.v_long, cut.v_long, ego.pos_long, cut.pos_long,
                                                0.5 * (ego.length + cut.length))
                                  .overlap;
    }

    h.passes_before_conflict = passes_before_conflict(ego, cut, h.v_lat_filtered);
    h.committed_alongside = committed_alongside(ego, cut, h.v_lat_filtered, crit);

    if (!sim::cutin_ahead(ego, cut)) return out;
    if (spec.pass_through_check && h.passes_before_conflict) {
        out.decision = {false, Reason::none, 0.0};
        return out;
    }

    const bool lane_change = h.p_le >= spec.le_threshold;
    ModelDecision& d = out.decision;
    if (lane_change && h.p_safe == 0.0) {
        d = {true, Reason::ttc_violation, 1.0};
    } else if (lane_change && h.predicted_overlap) {
        d = {true, Reason::predicted_overlap, h.p_le};
    } else if (lane_change && h.p_safe_lat == 0.0) {
        d = {true, Reason::lateral_intrusion, h.p_le};
    } else if (spec.baseline_guard && h.p_safe == 0.0 &&
               sim::lane_intrusion(ego, cut, now.lane_width) > spec.wandering_margin) {
        d = {true, Reason::ttc_violation, 1.0};
    } else {
        d = {false, Reason::none, h.p_le * (1.0 - h.p_safe)};
    }
    return out;
}

namespace {

/// Longitudinal center offset of the ego past the cut-in when the lateral
/// clearance closes at constant speeds; nullopt if it never closes.
std::optional<double> ahead_at_contact(const VehicleState& ego, const VehicleState& cutin, double v_lat_approach)
{
    const double clearance = sim::lateral_clearance(ego, cutin);
    if (v_lat_approach >= -kEps) return std::nullopt;
    const double t = clearance / -v_lat_approach;
    return (ego.pos_long + ego.v_long * t) - (cutin.pos_long + cutin.v_long * t);
}

}  // namespace

bool passes_before_conflict(const VehicleState& ego, const VehicleState& cutin, double v_lat_approach)
{
    if (sim::lateral_clearance(ego, cutin) <= 0.0) return false;
    const auto ahead = ahead_at_contact(ego, cutin, v_lat_approach);
    return !ahead || *ahead > 0.5 * (ego.length + cutin.length);
}

bool committed_alongside(const VehicleState& ego, const VehicleState& cutin, double v_lat_approach,
                         const SafetyParams& params)
{
    if (sim::lateral_clearance(ego, cutin) <= 0.0) return false;
    const auto ahead = ahead_at_contact(ego, cutin, v_lat_approach);
    const double dv = ego.v_long - cutin.v_long;
    if (!ahead || *ahead <= 0.0 || *ahead > 0.5 * (ego.length + cutin.length) || dv <= 0.0) return false;
    const double a = params.cc_max_deceleration;
    const double ramp = (a + ego.a_long) / params.cc_min_jerk;
    const double stop = dv * ramp / 2.0 + dv * dv / (2.0 * a);
    return stop > sim::bumper_gap(ego, cutin);
}

double dbn_required_deceleration(const Observation& obs, std::optional<double> ttb, const SafetyParams& params,
                                 double standstill)
{
    const double dv = obs.ego.v_long - obs.cutin.v_long;
    if (dv <= 0.0) return 0.0;
    double need = 0.0;
    if (ttb && *ttb > kEps)
        need = dv / *ttb;
    else
        need = params.cc_max_deceleration;
    const double room = sim::bumper_gap(obs.ego, obs.cutin) - standstill;
    need = std::max(need, room > kEps ? dv * dv / (2.0 * room) : params.cc_max_deceleration);
    return std::min(need, params.cc_max_deceleration);
}

// ---- model ----

DbnModel::DbnModel(NetworkSpec spec, models::FollowParams follow) : spec_(std::move(spec)), follow_(follow)
{
    spec_.validate();
}

void DbnModel::reset()
{
    window_.clear();
    last_ = {};
    phase_ = Phase::idle;
}

std::unique_ptr<SafetyModel> DbnModel::clone() const
{
    return std::make_unique<DbnModel>(spec_, follow_);
}

ModelDecision DbnModel::safety_check(const Observation& obs)
{
    window_.push_back(obs);
    while (window_.size() > spec_.window) window_.pop_front();
    const DbnDecision result = dbn_safety_check(window_, spec_);
    last_ = result.hypotheses;
    return result.decision;
}

AccelCommand DbnModel::react(const ModelDecision& decision, const Observation& obs, const SafetyParams& params)
{
    const VehicleState& ego = obs.ego;
    const VehicleState& cut = obs.cutin;

    // Braking once committed alongside only lengthens the time spent next to
    // the cut-in.
    const bool hold = spec_.pass_through_check && last_.committed_alongside;
    if (phase_ == Phase::idle && decision.unsafe && !hold) phase_ = Phase::braking;
    if (phase_ == Phase::braking) {
        if (!sim::cutin_ahead(ego, cut))
            phase_ = Phase::idle;
        else if (ego.v_long < cut.v_long)
            phase_ = Phase::following;
    }

    AccelCommand cmd{0.0, Mode::cruise, std::nullopt};
    if (phase_ == Phase::braking)
        cmd = {-dbn_required_deceleration(obs, last_.ttb, params, follow_.standstill), Mode::brake, std::nullopt};
    else if (phase_ == Phase::following)
        cmd = models::follow_command(obs, params, follow_);

    cmd.jerk_limit = spec_.comfort_jerk;
    return cmd;
}

}  // namespace cutin::dbn
