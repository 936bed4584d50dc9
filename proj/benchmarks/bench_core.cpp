#include <benchmark/benchmark.h>

#include <vector>

#include "stepsched/bounds.hpp"
#include "stepsched/optimizer.hpp"
#include "stepsched/problems.hpp"
#include "stepsched/rng.hpp"
#include "stepsched/schedules.hpp"

using namespace stepsched;

static void BM_StepSizeExponential(benchmark::State& state) {
    const auto spec = ScheduleSpec::exponential_beta(0.1, 100000, 1.0);
    std::int64_t t = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(step_size(spec, t));
        t = t % 100000 + 1;
    }
}
BENCHMARK(BM_StepSizeExponential);

static void BM_StepSizeCosine(benchmark::State& state) {
    const auto spec = ScheduleSpec::cosine(0.1, 100000);
    std::int64_t t = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(step_size(spec, t));
        t = t % 100000 + 1;
    }
}
BENCHMARK(BM_StepSizeCosine);

static void BM_StepSizeCosineRestart(benchmark::State& state) {
    const auto spec = ScheduleSpec::cosine_restart(0.1, 1000, 2.0, 6);
    const std::int64_t horizon = spec.horizon();
    std::int64_t t = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(step_size(spec, t));
        t = (t + 1) % horizon;
    }
}
BENCHMARK(BM_StepSizeCosineRestart);

static void BM_NormalDraw(benchmark::State& state) {
    Xoshiro256pp rng(1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rng.normal());
    }
}
BENCHMARK(BM_NormalDraw);

static void BM_SgdRunQuadratic(benchmark::State& state) {
    const std::int64_t T = state.range(0);
    const Objective quad = quadratic_objective(std::vector<double>(10, 1.0));
    const NoiseOracle oracle = NoiseOracle::additive_gaussian(0.1);
    const auto spec = ScheduleSpec::cosine(1.0, T);
    RunConfig cfg{.x1 = std::vector<double>(10, 0.4), .T = T, .schedule = spec, .seed = 3};
    for (auto _ : state) {
        benchmark::DoNotOptimize(sgd_run(quad, oracle, cfg));
    }
    state.SetItemsProcessed(state.iterations() * T);
}
BENCHMARK(BM_SgdRunQuadratic)->Arg(1000)->Arg(10000);

static void BM_SgdRunPolar(benchmark::State& state) {
    const std::int64_t T = state.range(0);
    const Objective polar = polar_pl_objective();
    const NoiseOracle oracle = NoiseOracle::additive_gaussian(1.0);
    const auto spec = ScheduleSpec::cosine(1.0 / polar.lipschitz(), T);
    RunConfig cfg{.x1 = {0.6, 0.6}, .T = T, .schedule = spec, .seed = 3};
    for (auto _ : state) {
        benchmark::DoNotOptimize(sgd_run(polar, oracle, cfg));
    }
    state.SetItemsProcessed(state.iterations() * T);
}
BENCHMARK(BM_SgdRunPolar)->Arg(1000)->Arg(10000);

static void BM_BoundExpPl(benchmark::State& state) {
    const BoundInputs in{.L = 2, .mu = 0.5, .a = 0.1, .b = 0.3, .beta = 2, .delta1 = 1, .T = 10000};
    for (auto _ : state) {
        benchmark::DoNotOptimize(bound_exp_pl(in));
    }
}
BENCHMARK(BM_BoundExpPl);

static void BM_Gamma(benchmark::State& state) {
    double x = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(gamma_fn(x));
        x = x < 20.0 ? x + 0.1 : 0.1;
    }
}
BENCHMARK(BM_Gamma);

BENCHMARK_MAIN();
