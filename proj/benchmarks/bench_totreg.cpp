#include <benchmark/benchmark.h>

#include <totreg/init.hpp>
#include <totreg/regression.hpp>
#include <totreg/rng.hpp>
#include <totreg/solvers.hpp>
#include <totreg/tensor.hpp>
#include <totreg/tucker.hpp>

#include <vector>

using namespace totreg;

namespace {

DenseTensor random_tensor(Rng& rng, const std::vector<Index>& shape) {
    DenseTensor t(shape);
    for (Index f = 0; f < t.size(); ++f) t[f] = rng.normal();
    return t;
}

void bm_matricize(benchmark::State& state) {
    Rng rng(1);
    const Index p = state.range(0);
    DenseTensor t = random_tensor(rng, {p, p, p});
    for (auto _ : state) {
        for (Index k = 0; k < 3; ++k) benchmark::DoNotOptimize(matricize(t, k));
    }
}
BENCHMARK(bm_matricize)->Arg(20)->Arg(40);

void bm_mode_product(benchmark::State& state) {
    Rng rng(2);
    const Index p = state.range(0);
    DenseTensor t = random_tensor(rng, {p, p, p});
    Matrix u = random_orthonormal(rng, p, 10);
    for (auto _ : state) {
        for (Index k = 0; k < 3; ++k)
            benchmark::DoNotOptimize(mode_product(t, u.transpose(), k));
    }
}
BENCHMARK(bm_mode_product)->Arg(20)->Arg(40);

void bm_sthosvd(benchmark::State& state) {
    Rng rng(3);
    const Index p = state.range(0);
    DenseTensor t = random_tensor(rng, {p, p, p});
    for (auto _ : state) benchmark::DoNotOptimize(sthosvd(t, {5, 5, 5}));
}
BENCHMARK(bm_sthosvd)->Arg(20)->Arg(40);

void bm_rgn_step(benchmark::State& state) {
    const Index p = state.range(0);
    ProblemInstance inst = generate_gaussian_instance(
        {p, p, p}, 3, 0, {2, 2, 2}, 0.0, 20 * p, 4);
    TuckerTensor x0 = initialize(inst, {2, 2, 2});
    SolverConfig cfg;
    cfg.input_rank = {2, 2, 2};
    for (auto _ : state) benchmark::DoNotOptimize(rgn_step(inst, x0, cfg));
}
BENCHMARK(bm_rgn_step)->Arg(10)->Arg(15);

void bm_rgd_step(benchmark::State& state) {
    const Index p = state.range(0);
    ProblemInstance inst = generate_gaussian_instance(
        {p, p, p}, 3, 0, {2, 2, 2}, 0.0, 20 * p, 5);
    TuckerTensor x0 = initialize(inst, {2, 2, 2});
    SolverConfig cfg;
    cfg.input_rank = {2, 2, 2};
    for (auto _ : state) benchmark::DoNotOptimize(rgd_step(inst, x0, cfg));
}
BENCHMARK(bm_rgd_step)->Arg(10)->Arg(15);

} // namespace

BENCHMARK_MAIN();
