#pragma once

#include "cutin/safety_model.hpp"
#include "cutin/sim.hpp"
#include "cutin/types.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cutin::sweep {

/// Scenario grid. Speeds are in km/h, lateral speeds are magnitudes toward the
/// ego lane in m/s, distances are center-to-center in m.
struct SweepGrid {
    std::vector<double> ego_speeds;
    std::vector<double> cutin_speeds;
    std::vector<double> lateral_speeds;
    std::vector<double> initial_distances;

    void validate() const;
    /// Number of feasible (cut-in slower than ego) scenarios.
    std::size_t size() const;
    /// Feasible scenarios in canonical order (ego, cut-in, lateral, distance).
    std::vector<ScenarioConfig> configs(const ScenarioConfig& base = {}) const;
    /// FNV-1a over a canonical rendering of the axes.
    std::uint64_t hash() const;
};

enum class Preset { paper_low, paper_high, fig6, fig7 };

std::optional<Preset> parse_preset(std::string_view name);
SweepGrid preset_grid(Preset preset);

/// Linear range lo, lo+step, ... up to hi (inclusive within rounding).
std::vector<double> linspace_step(double lo, double hi, double step);

/// 70/10 km/h, 1.5 m/s lateral, 92 m: the braking-profile comparison case.
ScenarioConfig fig5_scenario();
/// 90/10 km/h, 1.7 m/s lateral, 41 m.
ScenarioConfig fig7_scenario();

struct SweepResult {
    ScenarioConfig config;
    std::string model_id;
    double ego_kmh = 0.0;
    double cutin_kmh = 0.0;
    bool crash = false;
    std::optional<double> min_ttc;
    std::optional<double> detection_time;
    std::optional<double> first_decel_time;
    double max_jerk = 0.0;
    double max_decel = 0.0;
};

struct Diagnostic {
    ScenarioConfig config;
    std::string model_id;
    std::string message;
};

struct SweepOutput {
    std::vector<SweepResult> results;
    std::vector<Diagnostic> diagnostics;
};

/// Run every (scenario x model) pair. Results come back ordered by scenario,
/// then by model position in `models`, independent of `threads`.
/// Individual failures become diagnostics.
SweepOutput run_sweep(const SweepGrid& grid, const std::vector<const SafetyModel*>& models,
                      const SafetyParams& params, unsigned threads = 1, const ScenarioConfig& base = {});

/// Filter over results; unset fields match everything.
struct ResultFilter {
    std::optional<std::string> model_id;
    std::optional<double> ego_kmh;
    std::optional<double> cutin_kmh;
    std::optional<double> min_ego_kmh;
    std::optional<double> max_ego_kmh;

    bool matches(const SweepResult& r) const;
    std::string describe() const;
};

/// 100 * crashes / scenarios over the filtered set. Throws
/// std::invalid_argument naming the filter when nothing matches.
double crash_percentage(const std::vector<SweepResult>& results, const ResultFilter& filter);

/// Mean of the defined min-TTC values over non-crash results; nullopt if none.
std::optional<double> average_min_ttc(const std::vector<SweepResult>& results, const ResultFilter& filter);

struct SubsetReport {
    bool is_subset = true;
    std::vector<ScenarioConfig> counterexamples;
    std::size_t crashes_a = 0;
    std::size_t crashes_b = 0;
};

/// Every scenario where A crashes is also a crash for B. Both sets must cover
/// the same scenarios (std::invalid_argument otherwise).
SubsetReport crash_subset_check(const std::vector<SweepResult>& a, const std::vector<SweepResult>& b);

/// cc detection time minus dbn detection time; nullopt if either never detects.
std::optional<double> detection_advantage(const sim::Trace& trace_dbn, const sim::Trace& trace_cc);
std::optional<double> detection_advantage(const SweepResult& dbn, const SweepResult& cc);

/// Metadata written at the top of every export.
struct ExportHeader {
    std::uint64_t grid_hash = 0;
    SafetyParams params;
    std::string version;

    std::string render() const;
};

/// Writes <prefix>.csv (min-TTC matrix, `X` for crashes) and <prefix>.ppm
/// (green high TTC to red low TTC over 0..4 s, black crashes). Rows are lateral
/// speeds, columns initial distances. Throws std::invalid_argument when the
/// model's results do not form a full rectangle or span several speed pairs.
void export_heatmap(const std::vector<SweepResult>& results, const std::string& model_id,
                    const std::filesystem::path& prefix, const ExportHeader& header);

/// RGB for one heatmap cell.
struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
};
Rgb heatmap_color(std::optional<double> min_ttc, bool crash);

struct NamedTrace {
    std::string model_id;
    sim::Trace trace;
};

/// Per-tick speed/acceleration/jerk per model plus summary rows.
void profile_report(const std::vector<NamedTrace>& traces, const std::filesystem::path& path,
                    const ExportHeader& header);

/// One row per model and speed band (low below 65 km/h ego speed).
void write_summary_csv(const std::vector<SweepResult>& results, const std::filesystem::path& path,
                       const ExportHeader& header);

/// One row per model and (ego, cut-in) speed pair.
void write_per_speed_csv(const std::vector<SweepResult>& results, const std::filesystem::path& path,
                         const ExportHeader& header);

}  // namespace cutin::sweep
