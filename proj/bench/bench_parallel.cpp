#include <benchmark/benchmark.h>

#include "bfmle/homotopy.hpp"
#include "bfmle/simulation.hpp"

using namespace bfmle;

namespace {

CompiledSystem target_for(std::size_t p) {
    SimConfig cfg;
    cfg.p = p;
    cfg.n_min = static_cast<long>(p) + 1;
    Rng rng(42);
    return CompiledSystem(standardize(build_system(random_problem(cfg, rng))).system.complex_polys());
}

template <Execution E>
void BM_TrackAll(benchmark::State& state) {
    const CompiledSystem target = target_for(static_cast<std::size_t>(state.range(0)));
    const StartSystem start = total_degree_start(target.degrees());
    const TrackerConfig cfg = TrackerConfig::with_seed(1);
    for (auto _ : state) benchmark::DoNotOptimize(track_all(target, start, cfg, E));
    state.counters["paths"] = static_cast<double>(start.roots.size());
}

template <Execution E>
void BM_Simulation(benchmark::State& state) {
    SimConfig cfg;
    cfg.trials = static_cast<std::size_t>(state.range(0));
    cfg.seed = 3;
    const TrackerConfig tracker;
    for (auto _ : state) benchmark::DoNotOptimize(run_simulation(cfg, tracker, E));
}

} // namespace

BENCHMARK(BM_TrackAll<Execution::Serial>)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrackAll<Execution::Parallel>)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Simulation<Execution::Serial>)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Simulation<Execution::Parallel>)->Arg(200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
