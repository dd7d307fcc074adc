#include <cmath>

#include <benchmark/benchmark.h>

#include <hem/bench.hpp>
#include <hem/montecarlo.hpp>
#include <hem/reference.hpp>
#include <hem/runtime.hpp>
#include <hem/series.hpp>

namespace
{

const hem::CompiledMap &default_map()
{
    static const hem::CompiledMap cm = hem::compile(hem::build_submaps<double>(hem::OrbitParams{}, 18, 28));
    return cm;
}

void BM_Poincare(benchmark::State &state)
{
    hem::Evaluator ev(default_map());
    hem::State s{0.3, 1.5};
    for (auto _ : state) {
        s = ev.poincare(s);
        benchmark::DoNotOptimize(s);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Poincare);

void BM_ReferencePeriod(benchmark::State &state)
{
    const hem::OrbitParams p;
    hem::State s{0.3, 1.5};
    for (auto _ : state) {
        s = hem::ref_integrate(s, 0, 2 * M_PI, p, hem::RefSettings::standard_defaults()).state;
        benchmark::DoNotOptimize(s);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ReferencePeriod);

void BM_ErrorGridSerial(benchmark::State &state)
{
    for (auto _ : state) {
        benchmark::DoNotOptimize(hem::error_grid_serial(default_map(), 10, hem::RefSettings::standard_defaults()));
    }
}
BENCHMARK(BM_ErrorGridSerial)->Unit(benchmark::kMillisecond);

void BM_ErrorGridParallel(benchmark::State &state)
{
    for (auto _ : state) {
        benchmark::DoNotOptimize(hem::error_grid(default_map(), 10, hem::RefSettings::standard_defaults()));
    }
}
BENCHMARK(BM_ErrorGridParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

hem::McConfig small_campaign()
{
    hem::McConfig cfg;
    cfg.ics = 64;
    cfg.n_pre = 2000;
    cfg.n_win = 256;
    return cfg;
}

void BM_ProbabilitiesSerial(benchmark::State &state)
{
    const auto candidates = hem::existing_resonances(1e-3, 1e-5, default_map().derived);
    for (auto _ : state) {
        benchmark::DoNotOptimize(hem::estimate_probabilities_serial(default_map(), small_campaign(), candidates));
    }
}
BENCHMARK(BM_ProbabilitiesSerial)->Unit(benchmark::kMillisecond);

void BM_ProbabilitiesParallel(benchmark::State &state)
{
    const auto candidates = hem::existing_resonances(1e-3, 1e-5, default_map().derived);
    for (auto _ : state) {
        benchmark::DoNotOptimize(hem::estimate_probabilities(default_map(), small_campaign(), candidates));
    }
}
BENCHMARK(BM_ProbabilitiesParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_SSum(benchmark::State &state)
{
    for (auto _ : state) {
        benchmark::DoNotOptimize(hem::s_sum(static_cast<std::uint64_t>(state.range(0))));
    }
}
BENCHMARK(BM_SSum)->Arg(1'000'000);

} // namespace

BENCHMARK_MAIN();
