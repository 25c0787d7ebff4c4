#include <benchmark/benchmark.h>

#include "outformation/engine.hpp"
#include "outformation/experiments.hpp"
#include "outformation/theory.hpp"

using namespace outformation;

static void BM_SimulateFigEvent(benchmark::State& state) {
    const auto s = experiments::preset("fig_event");
    const auto arch = static_cast<Architecture>(state.range(0));
    std::uint64_t r = 0;
    for (auto _ : state) {
        const RandomStreams streams(s.config.seed, r++);
        const auto path = sample_path(s.config, streams);
        benchmark::DoNotOptimize(run_simulation(s.config, s.components, arch, path, streams));
    }
    state.SetLabel(std::string(to_string(arch)));
}
BENCHMARK(BM_SimulateFigEvent)->DenseRange(0, 2);

static void BM_ConditionedSetupOne(benchmark::State& state) {
    const auto s = experiments::preset("setup1");
    std::uint64_t r = 0;
    for (auto _ : state) benchmark::DoNotOptimize(experiments::conditioned_run(s, SetupKind::One, r++));
}
BENCHMARK(BM_ConditionedSetupOne);

static void BM_MseSharedQuadrature(benchmark::State& state) {
    double eps = 1.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(theory::mse_shared_joint(eps, 1.0, theory::Variant::ProofConsistent));
        eps = eps > 4.0 ? 1.0 : eps + 0.01;
    }
}
BENCHMARK(BM_MseSharedQuadrature);

static void BM_EstimatePjk(benchmark::State& state) {
    const auto s = experiments::preset("unshared_power");
    for (auto _ : state) benchmark::DoNotOptimize(theory::estimate_p_jk(s.config, s.components, 100, 1));
}
BENCHMARK(BM_EstimatePjk);
BENCHMARK_MAIN();
