#include <benchmark/benchmark.h>

#include "homog/field.hpp"
#include "homog/limit.hpp"
#include "homog/paths.hpp"
#include "homog/pde.hpp"

namespace {

homog::FieldSpec default_spec() {
    homog::FieldSpec s;
    s.sigma = 0.5;
    return s;
}

void BM_FieldEval(benchmark::State& state) {
    homog::FieldRealization f(default_spec(), 7);
    f.ensure_cover(-1100.0, 1100.0);
    double x = -1000.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(f.eval_a(x));
        x += 0.37;
        if (x > 1000.0) x = -1000.0;
    }
}
BENCHMARK(BM_FieldEval);

void BM_PrefixIntegral(benchmark::State& state) {
    homog::FieldRealization f(default_spec(), 7);
    f.ensure_cover(-1100.0, 1100.0);
    double x = -1000.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(f.int_c(x));
        x += 0.37;
        if (x > 1000.0) x = -1000.0;
    }
}
BENCHMARK(BM_PrefixIntegral);

void BM_QuenchedStep(benchmark::State& state) {
    const double eps = 0.05;
    homog::FieldRealization f(default_spec(), 7);
    const double a_bar = homog::effective_a(default_spec());
    homog::QuenchedStepper st(f, eps, a_bar, 0.0);
    homog::RngStream rng(homog::stream_key(1, 2));
    const double dt = homog::kDefaultCdt * eps * eps / 4.0;
    for (auto _ : state) benchmark::DoNotOptimize(st.step(dt, rng));
}
BENCHMARK(BM_QuenchedStep);

void BM_LimitPath(benchmark::State& state) {
    homog::PathConfig cfg;
    cfg.T = 0.5;
    cfg.dt = 1e-3;
    homog::RngStream rng(homog::stream_key(1, 3));
    for (auto _ : state) {
        auto tr = homog::simulate_limit_path(cfg, 1.6, rng);
        benchmark::DoNotOptimize(tr.X.back());
    }
}
BENCHMARK(BM_LimitPath);

void BM_LocalTime(benchmark::State& state) {
    homog::PathConfig cfg;
    cfg.T = 0.5;
    cfg.dt = 1e-3;
    homog::RngStream rng(homog::stream_key(1, 4));
    const auto tr = homog::simulate_limit_path(cfg, 1.6, rng);
    for (auto _ : state) {
        auto L = homog::local_time(tr, 0.02);
        benchmark::DoNotOptimize(L.density.data());
    }
}
BENCHMARK(BM_LocalTime);

void BM_TridiagSolveStep(benchmark::State& state) {
    const auto n = static_cast<int>(state.range(0));
    homog::Grid1D grid{-8.0, 8.0, n};
    const auto L = homog::assemble_divergence([](double) { return 1.6; }, grid);
    std::vector<double> lower(L.lower), upper(L.upper), diag(L.diag), rhs(n, 1.0);
    for (int i = 0; i < n; ++i) diag[i] = 1.0 - 5e-4 * L.diag[i];
    for (auto _ : state) {
        std::vector<double> b = rhs;
        homog::thomas_solve(lower, diag, upper, b);
        benchmark::DoNotOptimize(b.data());
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_TridiagSolveStep)->RangeMultiplier(4)->Range(1 << 10, 1 << 14)->Complexity();

}  // namespace

BENCHMARK_MAIN();
