// Microbenchmarks contrasting the O(d) matrix-free update with dense
// alternatives, plus the cost of the surrounding per-sample machinery.

#include <benchmark/benchmark.h>

#include "smac/fisher.hpp"
#include "smac/mlp.hpp"
#include "smac/optim.hpp"
#include "smac/rng.hpp"

using namespace smac;

namespace {

std::vector<Vec> make_scores(Rng& rng, int n, int d) {
    std::vector<Vec> scores;
    for (int i = 0; i < n; ++i) scores.push_back(gaussian_sample(rng, d));
    return scores;
}

void BM_SmInverseApply(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    Rng rng(1);
    const FisherPrecond p(0.1, gaussian_sample(rng, d));
    const Vec g = gaussian_sample(rng, d);
    for (auto _ : state) benchmark::DoNotOptimize(sm_inverse_apply(p, g));
    state.SetComplexityN(d);
}
BENCHMARK(BM_SmInverseApply)->RangeMultiplier(4)->Range(64, 65536)->Complexity(benchmark::oN);

void BM_DenseSolveOracle(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    Rng rng(2);
    const FisherPrecond p(0.1, gaussian_sample(rng, d));
    const Vec g = gaussian_sample(rng, d);
    for (auto _ : state) benchmark::DoNotOptimize(dense_sm_oracle(p, g));
    state.SetComplexityN(d);
}
BENCHMARK(BM_DenseSolveOracle)->RangeMultiplier(2)->Range(16, 128)->Complexity(benchmark::oNCubed);

void BM_SmacStep(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    Rng rng(3);
    const Vec theta = gaussian_sample(rng, d);
    const Vec g = gaussian_sample(rng, d);
    const auto scores = make_scores(rng, 4, d);
    for (auto _ : state) benchmark::DoNotOptimize(smac_step(theta, scores, g, 1e-3, 0.1));
    state.SetComplexityN(d);
}
BENCHMARK(BM_SmacStep)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oN);

void BM_EmpiricalFvp(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    Rng rng(4);
    const FvpBatch batch{make_scores(rng, 32, d), 1e-2};
    const Vec v = gaussian_sample(rng, d);
    for (auto _ : state) benchmark::DoNotOptimize(empirical_fvp(batch, v));
    state.SetComplexityN(d);
}
BENCHMARK(BM_EmpiricalFvp)->RangeMultiplier(4)->Range(256, 4096)->Complexity(benchmark::oN);

void BM_PolicyScore(benchmark::State& state) {
    Rng rng(5);
    const int hidden = static_cast<int>(state.range(0));
    const Mlp net = Mlp::init(MlpSpec{4, 2, {hidden, hidden}}, rng);
    const Vec x = gaussian_sample(rng, 4);
    const Vec upstream{1.0, -1.0};
    for (auto _ : state) benchmark::DoNotOptimize(net.backward(x, upstream));
}
BENCHMARK(BM_PolicyScore)->Arg(32)->Arg(64)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
