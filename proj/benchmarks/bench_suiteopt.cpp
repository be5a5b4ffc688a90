#include <benchmark/benchmark.h>

#include "suiteopt/selection.hpp"
#include "suiteopt/slamgraph.hpp"

using namespace suiteopt;

namespace {

const Scenario& bench_scenario() {
    static const Scenario scn = synth_linear_scenario(250.0, 2.5, 120, 20.0, 7);
    return scn;
}

const SensorLibrary& bench_library() {
    static const SensorLibrary lib = build_default_library();
    return lib;
}

void bm_build_and_score(benchmark::State& state) {
    const Selection suite = Selection::of(bench_library(), {0, 14, 17, 20, 23});
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            evaluate(bench_scenario(), bench_library(), suite).logdet);
    }
}
BENCHMARK(bm_build_and_score)->Unit(benchmark::kMillisecond);

void bm_cached_score(benchmark::State& state) {
    static const SuiteEvaluator evaluator(bench_scenario(), bench_library());
    const std::vector<int> suite = {0, 14, 17, 20, 23};
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluator.score(suite));
    }
}
BENCHMARK(bm_cached_score)->Unit(benchmark::kMillisecond);

void bm_logdet_factorization(benchmark::State& state) {
    const LinearSystem system = build_system(bench_scenario(), bench_library(),
                                             Selection::of(bench_library(), {0, 1}));
    for (auto _ : state) {
        benchmark::DoNotOptimize(log_det_information(system).logdet);
    }
}
BENCHMARK(bm_logdet_factorization)->Unit(benchmark::kMillisecond);

void bm_greedy_round(benchmark::State& state) {
    GreedyOptions options;
    options.budget_usd = 1e9;
    options.max_cardinality = 1;  // one full candidate sweep over the library
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            greedy_select(bench_scenario(), bench_library(), options).trace.steps.size());
    }
}
BENCHMARK(bm_greedy_round)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
