// Serial reference vs OpenMP kernels on the 2016 fixture.
#include <benchmark/benchmark.h>

#include <filesystem>

#include "pdcal/calibrator.hpp"
#include "pdcal/cohorts.hpp"
#include "pdcal/posterior.hpp"

using namespace pdcal;

namespace {

const PortfolioPosterior& posterior() {
    static const auto post = compute_posterior(
        find_period(parse_cohort_csv(std::filesystem::path(PDCAL_DATA_DIR) / "sp_2016_2017.csv"), "2016"));
    return post;
}

CalibrationConfig config(const benchmark::State& state) {
    CalibrationConfig cfg;
    cfg.n_sim = static_cast<std::size_t>(state.range(0));
    cfg.k_reps = 4;
    cfg.threads = static_cast<int>(state.range(1));
    return cfg;
}

void BM_SweepReference(benchmark::State& state) {
    const auto cfg = config(state);
    for (auto _ : state) benchmark::DoNotOptimize(reference::run_sweep(posterior(), cfg, RngStream(42, 0)));
}

void BM_SweepParallel(benchmark::State& state) {
    const auto cfg = config(state);
    for (auto _ : state) benchmark::DoNotOptimize(run_sweep(posterior(), cfg, RngStream(42, 0)));
}

void BM_CalibrateReference(benchmark::State& state) {
    const auto cfg = config(state);
    for (auto _ : state) benchmark::DoNotOptimize(reference::calibrate(posterior(), cfg));
}

void BM_CalibrateParallel(benchmark::State& state) {
    const auto cfg = config(state);
    for (auto _ : state) benchmark::DoNotOptimize(calibrate(posterior(), cfg));
}

void BM_SampleBeta(benchmark::State& state) {
    RngStream rng(1, 0);
    const BetaParams p(61, 1411);
    for (auto _ : state) benchmark::DoNotOptimize(sample_beta(p, rng));
}

}  // namespace

// args: n_sim, threads (0 = all cores)
BENCHMARK(BM_SweepReference)->Args({100000, 1})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Args({100000, 1})->Args({100000, 0})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CalibrateReference)->Args({100000, 1})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CalibrateParallel)->Args({100000, 1})->Args({100000, 0})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SampleBeta);

BENCHMARK_MAIN();
