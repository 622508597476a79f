#pragma once

#include "cutin/dbn.hpp"
#include "cutin/types.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <vector>

namespace cutin::calibration {

struct CalibrationSample {
    double v_lat = 0.0;    ///< lateral velocity toward the ego lane negative [m/s]
    double dy0_lat = 0.0;  ///< near edge to lane marking, positive outside [m]
    double label = 0.0;    ///< target probability in [0, 1]
};

/// Which tick opens the positive-label window. The window always closes when
/// the lane change completes.
enum class LabelStart { marking_crossing, motion_start };

struct SampleOptions {
    LabelStart label_start = LabelStart::marking_crossing;
    /// Parallel driving before the lateral motion starts [s].
    double lead_in = 1.0;
    /// Ticks kept after the lane change completed [s].
    double tail = 1.0;
};

/// The 100 km/h ego / 60 km/h cut-in scenario.
ScenarioConfig default_sample_scenario();

/// Drives the scenario without intervention and emits one sample per tick.
std::vector<CalibrationSample> generate_samples(const ScenarioConfig& config = default_sample_scenario(),
                                                const SampleOptions& options = {});

/// Samples on a v_lat x dy0_lat grid, labelled with the sigmoid itself.
std::vector<CalibrationSample> synthetic_samples(const dbn::SigmoidParams& truth, const dbn::NodeSpec& v_node,
                                                 const dbn::NodeSpec& dy0_node);

struct FitOptions {
    dbn::SigmoidParams init{0.1, 5.0, 1.0, 5.0};
    double rel_tol = 1e-10;
    int max_iterations = 500;
    double initial_damping = 1e-3;
};

struct FitResult {
    dbn::SigmoidParams params;
    double loss = 0.0;
    int iterations = 0;
    bool converged = false;
    /// Iteration budget ran out; params are the best iterate seen.
    bool warning = false;
    /// Only one label value present; the fit just pushes P(LE) toward it.
    bool degenerate = false;
    /// Loss of every accepted iterate, starting with the initial guess.
    std::vector<double> loss_history;
};

/// Damped Gauss-Newton (Levenberg-Marquardt) least squares of min(P1*P2, 1)
/// against the labels. s_v and s_o are optimized in log space so they stay
/// positive. Throws std::invalid_argument for fewer than 20 samples or labels
/// outside [0, 1].
FitResult fit_sigmoid(const std::vector<CalibrationSample>& samples, const FitOptions& options = {});

/// Sum of squared residuals.
double sigmoid_loss(const std::vector<CalibrationSample>& samples, const dbn::SigmoidParams& params);

/// CSV with header `v_lat,dy0_lat,label`.
void write_samples_csv(std::ostream& out, const std::vector<CalibrationSample>& samples);
/// Throws ConfigError on malformed rows or labels outside [0, 1].
std::vector<CalibrationSample> read_samples_csv(std::istream& in);

/// A network-spec document (the `dbn` config section) carrying the fit.
nlohmann::json fit_to_json(const FitResult& fit, const dbn::NetworkSpec& base = {});

}  // namespace cutin::calibration
