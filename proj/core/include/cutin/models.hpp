#pragma once

#include "cutin/safety_model.hpp"
#include "cutin/types.hpp"

#include <optional>

namespace cutin::models {

/// Longitudinal safe distance parameters of the RSS-style baseline.
struct RssParams {
    double response_time = 0.75;
    double max_accel = 2.0;
    double min_brake = 4.0;
    double lead_max_brake = 0.774 * 9.81;
};

/// d_min = v_r*rho + a*rho^2/2 + (v_r + rho*a)^2/(2*b_min) - v_f^2/(2*b_max), clamped at 0.
double rss_safe_distance(double v_rear, double v_front, const RssParams& p);

/// The cut-in's near edge is more than `margin` inside the ego lane.
bool cc_lateral_trigger(const Observation& obs, double lane_width, double margin = 0.375);

/// Gap controller used once the ego runs slower than the cut-in.
struct FollowParams {
    double time_gap = 2.0;
    double standstill = 2.0;
    double k_gap = 0.23;
    double k_speed = 0.7;
};

AccelCommand follow_command(const Observation& obs, const SafetyParams& params, const FollowParams& follow = {});

/// Reaction state machine shared by the human-driver style baselines.
///
/// An unsafe verdict arms a timer; braking at the full deceleration starts once
/// `latency` has elapsed. A safe verdict while pending or braking hands over to
/// a release phase that ramps the deceleration out. Dropping below the cut-in
/// speed switches to following.
class ReactionController {
public:
    enum class Phase { idle, pending, braking, following, releasing };

    /// Without an explicit latency the controller waits params.cc_rt.
    explicit ReactionController(std::optional<double> latency = std::nullopt, FollowParams follow = {})
        : latency_(latency), follow_(follow)
    {
    }

    AccelCommand react(bool unsafe, const Observation& obs, const SafetyParams& params);
    void reset();

    Phase phase() const { return phase_; }

private:
    std::optional<double> latency_;
    FollowParams follow_;
    Phase phase_ = Phase::idle;
    double armed_at_ = 0.0;
};

struct CcParams {
    double wandering_margin = 0.375;
    double critical_ttc = 2.0;
    FollowParams follow;
};

/// Competent-and-careful human driver baseline: unsafe once the cut-in is past
/// the wandering zone and the TTC is below the critical value; brakes after the
/// human reaction time.
class CcHumanDriver : public SafetyModel {
public:
    explicit CcHumanDriver(CcParams p = {}) : params_(p), controller_(std::nullopt, p.follow)
    {
    }

    std::string_view id() const override { return "cc"; }
    ModelDecision safety_check(const Observation& obs) override;
    AccelCommand react(const ModelDecision& decision, const Observation& obs, const SafetyParams& params) override;
    void reset() override { controller_.reset(); }
    std::unique_ptr<SafetyModel> clone() const override;

    const ReactionController& controller() const { return controller_; }

private:
    CcParams params_;
    ReactionController controller_;
};

/// RSS-style baseline: unsafe when the cut-in has crossed the lane marking and
/// the bumper gap is below the RSS longitudinal safe distance.
class RssModel : public SafetyModel {
public:
    explicit RssModel(RssParams p = {}, FollowParams follow = {})
        : params_(p), follow_(follow), controller_(p.response_time, follow)
    {
    }

    std::string_view id() const override { return "rss"; }
    ModelDecision safety_check(const Observation& obs) override;
    AccelCommand react(const ModelDecision& decision, const Observation& obs, const SafetyParams& params) override;
    void reset() override { controller_.reset(); }
    std::unique_ptr<SafetyModel> clone() const override;

    const RssParams& params() const { return params_; }

private:
    RssParams params_;
    FollowParams follow_;
    ReactionController controller_;
};

struct Reg157Params {
    double detect_margin = 0.3;
    double critical_ttc = 2.0;
    double hold_time = 1.0;
    FollowParams follow;
};

/// Reg157-style baseline: the cut-in counts as detectable from 0.3 m of lane
/// intrusion; an unsafe verdict is held for `hold_time` once raised.
class Reg157Model : public SafetyModel {
public:
    explicit Reg157Model(Reg157Params p = {}) : params_(p), controller_(std::nullopt, p.follow)
    {
    }

    std::string_view id() const override { return "reg157"; }
    ModelDecision safety_check(const Observation& obs) override;
    AccelCommand react(const ModelDecision& decision, const Observation& obs, const SafetyParams& params) override;
    void reset() override;
    std::unique_ptr<SafetyModel> clone() const override;

private:
    Reg157Params params_;
    ReactionController controller_;
    std::optional<double> last_raw_unsafe_;
};

}  // namespace cutin::models
