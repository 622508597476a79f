#include "cutin/calibration.hpp"
#include "cutin/dbn.hpp"
#include "cutin/registry.hpp"
#include "cutin/sim.hpp"
#include "cutin/sweep.hpp"

#include <benchmark/benchmark.h>

using namespace cutin;

static void BM_LeProbability(benchmark::State& state)
{
    const dbn::SigmoidParams p;
    double v = -1.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(dbn::le_probability(v, 0.3, p));
        v += 1e-9;
    }
}
BENCHMARK(BM_LeProbability);

static void BM_DbnSafetyCheck(benchmark::State& state)
{
    const dbn::NetworkSpec spec;
    std::deque<Observation> window;
    for (std::size_t k = 0; k < spec.window; ++k) {
        Observation o;
        o.ego.v_long = 25.0;
        o.cutin.pos_long = 60.0;
        o.cutin.pos_lat = 3.5 - 0.15 * static_cast<double>(k);
        o.cutin.v_long = 2.78;
        o.cutin.v_lat = -1.5;
        o.time = 0.1 * static_cast<double>(k);
        window.push_back(o);
    }
    for (auto _ : state) benchmark::DoNotOptimize(dbn::dbn_safety_check(window, spec));
}
BENCHMARK(BM_DbnSafetyCheck);

static void BM_RunScenario(benchmark::State& state)
{
    const SafetyParams p;
    const auto& id = known_model_ids()[static_cast<std::size_t>(state.range(0))];
    auto model = make_model(id, p);
    const auto config = sweep::fig5_scenario();
    for (auto _ : state) benchmark::DoNotOptimize(sim::run_scenario(config, *model, p));
    state.SetLabel(id);
}
BENCHMARK(BM_RunScenario)->DenseRange(0, 3);

static void BM_SweepFig6Slice(benchmark::State& state)
{
    const SafetyParams p;
    std::vector<std::unique_ptr<SafetyModel>> owned;
    std::vector<const SafetyModel*> models;
    for (const auto& id : known_model_ids()) {
        owned.push_back(make_model(id, p));
        models.push_back(owned.back().get());
    }
    auto grid = sweep::preset_grid(sweep::Preset::fig6);
    grid.initial_distances = sweep::linspace_step(20.0, 80.0, 10.0);
    for (auto _ : state) benchmark::DoNotOptimize(sweep::run_sweep(grid, models, p, 1));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.size() * models.size()));
}
BENCHMARK(BM_SweepFig6Slice)->Unit(benchmark::kMillisecond);

static void BM_FitSigmoid(benchmark::State& state)
{
    const dbn::NetworkSpec net;
    const auto samples = calibration::synthetic_samples({}, net.v_real, net.dy0_real);
    for (auto _ : state) benchmark::DoNotOptimize(calibration::fit_sigmoid(samples));
}
BENCHMARK(BM_FitSigmoid)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
