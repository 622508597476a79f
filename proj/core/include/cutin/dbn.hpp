#pragma once

#include "cutin/models.hpp"
#include "cutin/safety_model.hpp"
#include "cutin/types.hpp"

#include <cstddef>
#include <deque>
#include <optional>
#include <string>
#include <vector>

namespace cutin::dbn {

/// Constants of the lateral-evidence sigmoid
/// P(LE) = s_v/(s_v + e^{m_v v}) * s_o/(s_o + e^{m_o d}).
struct SigmoidParams {
    double s_v = 0.062;
    double m_v = 8.945;
    double s_o = 3.386;
    double m_o = 7.313;

    void validate() const;
};

/// Velocity factor s_v/(s_v + e^{m_v v}).
double le_velocity_factor(double v_lat, const SigmoidParams& p);
/// Offset factor s_o/(s_o + e^{m_o d}).
double le_offset_factor(double dy0_lat, const SigmoidParams& p);

/// min(P1*P2, 1). Exponents are clamped to +-700 so extreme inputs stay finite.
double le_probability(double v_lat, double dy0_lat, const SigmoidParams& p = {});

/// Uniformly discretized node: states lo, lo+step, ..., hi.
struct NodeSpec {
    std::string name;
    double lo = 0.0;
    double hi = 1.0;
    double step = 0.1;
    std::string unit;

    std::size_t state_count() const;
    double state_value(std::size_t index) const;
    void validate() const;
};

/// Nearest state index, clamped to the node range.
std::size_t discretize(double value, const NodeSpec& spec);

/// Probability mass over the states of one node.
struct DiscreteBelief {
    NodeSpec node;
    std::vector<double> probs;

    static DiscreteBelief uniform(const NodeSpec& node);

    double mean() const;
    double variance() const;
    double total() const;
};

struct UpdateResult {
    DiscreteBelief posterior;
    /// Likelihood carried no usable mass; posterior is the unchanged prior.
    bool degenerate = false;
};

/// Bayes update with a Gaussian likelihood centered on the measurement,
/// evaluated at every state value. Computed in log space so a tiny sigma still
/// concentrates the mass instead of underflowing.
UpdateResult filter_update(const DiscreteBelief& prior, double measurement, double sigma);

/// Transition step: each state spreads a quarter of its mass to each neighbour
/// (mass at the range ends stays in range).
DiscreteBelief predict(const DiscreteBelief& belief);

/// 1 iff the footprints have positive lateral clearance.
double safe_lat(const VehicleState& ego, const VehicleState& cutin);

enum class LongitudinalDenominator {
    closing_speed,       ///< v_ego - v_cutin, yields a time
    position_difference  ///< pos_ego - pos_cutin, the literal network formula
};

/// Time-like safety value num/denom, 0 when denom is 0.
double safe_long_value(const VehicleState& ego, const VehicleState& cutin,
                       LongitudinalDenominator mode = LongitudinalDenominator::closing_speed);

/// 1 iff the value exceeds the critical TTC. With the closing-speed
/// denominator a pair that is not closing (and not overlapping) counts as safe.
double safe_long(const VehicleState& ego, const VehicleState& cutin, const SafetyParams& params,
                 LongitudinalDenominator mode = LongitudinalDenominator::closing_speed);

/// dy0 / (-vy) for an approaching vehicle, nullopt otherwise.
std::optional<double> time_to_boundary(double dy0, double vy);

struct Prediction {
    double x_pred_ego = 0.0;
    double x_pred_obj = 0.0;
    bool overlap = false;
};

/// Constant-velocity positions after ttb. The overlap flag is raised when the
/// ego front reaches the cut-in rear (centers within `margin`) at any time in
/// [0, ttb]; positions move linearly, so checking both ends suffices.
Prediction predict_positions(double ttb, double ve0, double vo0, double x_ego, double x_obj, double margin = 4.5);

struct HypothesisResult {
    double p_le = 0.0;
    double p_safe_lat = 1.0;
    double p_safe = 1.0;
    std::optional<double> ttb;
    bool predicted_overlap = false;
    /// At constant speeds the ego clears the cut-in before the footprints
    /// could touch laterally.
    bool passes_before_conflict = false;
    /// Alongside when contact becomes possible and unable to stay behind.
    bool committed_alongside = false;
    double v_lat_filtered = 0.0;
    double dy0_lat_filtered = 0.0;
};

/// Network configuration. Defaults are the reference constants and
/// discretization.
struct NetworkSpec {
    SigmoidParams sigmoid;
    NodeSpec dy0_real{"dy0_lat_real", -2.0, 2.0, 0.1, "m"};
    NodeSpec dy0_mess{"dy0_lat_mess", -1.0, 1.9, 0.1, "m"};
    NodeSpec v_real{"v_lat_real", -1.9, 0.5, 0.1, "m/s"};
    NodeSpec v_mess{"v_lat_mess", -1.8, 0.4, 0.1, "m/s"};
    // Carried as evidence nodes; no hypothesis consumes them.
    NodeSpec a_real{"a_lat_real", 0.0, 1.5, 0.1, "m/s^2"};
    NodeSpec a_sigma{"a_lat_sigma", 0.0, 0.125, 0.025, "m/s^2"};
    double dy0_sigma = 0.05;
    double v_sigma = 0.05;
    double le_threshold = 0.5;
    std::size_t window = 15;
    LongitudinalDenominator denominator = LongitudinalDenominator::closing_speed;
    /// Also flag the situations the CC baseline flags (wandering zone + TTC),
    /// so lateral evidence only ever adds detections.
    bool baseline_guard = true;
    /// Treat a cut-in the ego will have passed before lateral contact as safe,
    /// and do not start braking once committed alongside.
    bool pass_through_check = true;
    double wandering_margin = 0.375;
    /// Jerk bound attached to every DBN command [m/s^3].
    double comfort_jerk = 10.0;
    double critical_ttc = 2.0;

    void validate() const;
};

struct DbnDecision {
    ModelDecision decision;
    HypothesisResult hypotheses;
};

/// Sliding-window evaluation of the three hypotheses over (at most) the last
/// `spec.window` observations. The lateral measurements of every slice are
/// filtered forward from a uniform prior; the newest slice gives the estimate.
DbnDecision dbn_safety_check(const std::deque<Observation>& window, const NetworkSpec& spec);

/// True while the footprints are still laterally apart and either the
/// clearance never closes or the ego rear will be past the cut-in front when
/// it does (constant speeds).
bool passes_before_conflict(const VehicleState& ego, const VehicleState& cutin, double v_lat_approach);

/// The ego will be partly alongside when the lateral clearance closes and full
/// braking can no longer keep it behind the cut-in.
bool committed_alongside(const VehicleState& ego, const VehicleState& cutin, double v_lat_approach,
                         const SafetyParams& params = {});

/// Acceleration target for a braking DBN: the deceleration that drops the ego
/// below the cut-in speed by ttb, or that stops the closing within the current
/// gap, whichever is larger, capped at the maximum deceleration.
double dbn_required_deceleration(const Observation& obs, std::optional<double> ttb, const SafetyParams& params,
                                 double standstill = 2.0);

/// The DBN packaged behind the safety-model interface.
class DbnModel : public SafetyModel {
public:
    explicit DbnModel(NetworkSpec spec = {}, models::FollowParams follow = {});

    std::string_view id() const override { return "dbn"; }
    double threshold() const override { return spec_.le_threshold; }
    ModelDecision safety_check(const Observation& obs) override;
    AccelCommand react(const ModelDecision& decision, const Observation& obs, const SafetyParams& params) override;
    void reset() override;
    std::unique_ptr<SafetyModel> clone() const override;

    const NetworkSpec& spec() const { return spec_; }
    const HypothesisResult& last_hypotheses() const { return last_; }

private:
    enum class Phase { idle, braking, following };

    NetworkSpec spec_;
    models::FollowParams follow_;
    std::deque<Observation> window_;
    HypothesisResult last_;
    Phase phase_ = Phase::idle;
};

}  // namespace cutin::dbn
