// Serial reference kernels against the OpenMP versions.

#include <random>

#include <benchmark/benchmark.h>

#include "grlol/design.hpp"
#include "grlol/grouping.hpp"
#include "grlol/kernels.hpp"
#include "grlol/simulation.hpp"

namespace {

grlol::Matrix random_matrix(grlol::Index n, grlol::Index k)
{
    std::mt19937_64 rng(42);
    std::normal_distribution<double> z;
    grlol::Matrix m(n, k);
    for (grlol::Index c = 0; c < k; ++c)
        for (grlol::Index i = 0; i < n; ++i) m(i, c) = z(rng);
    return m;
}

void BM_GramSerial(benchmark::State& st)
{
    const auto x = random_matrix(200, st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(grlol::kernels::gram_serial(x));
}

void BM_GramParallel(benchmark::State& st)
{
    const auto x = random_matrix(200, st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(grlol::kernels::gram(x));
}

void BM_RowMaxSerial(benchmark::State& st)
{
    const auto g = grlol::kernels::gram(random_matrix(200, st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(grlol::kernels::offdiag_row_absmax_serial(g));
}

void BM_RowMaxParallel(benchmark::State& st)
{
    const auto g = grlol::kernels::gram(random_matrix(200, st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(grlol::kernels::offdiag_row_absmax(g));
}

void BM_XtySerial(benchmark::State& st)
{
    const auto x = random_matrix(200, st.range(0));
    const grlol::Vector y = grlol::Vector::Ones(200);
    for (auto _ : st) benchmark::DoNotOptimize(grlol::kernels::xty_serial(x, y));
}

void BM_XtyParallel(benchmark::State& st)
{
    const auto x = random_matrix(200, st.range(0));
    const grlol::Vector y = grlol::Vector::Ones(200);
    for (auto _ : st) benchmark::DoNotOptimize(grlol::kernels::xty(x, y));
}

void BM_BrgPlan(benchmark::State& st)
{
    std::mt19937_64 rng(1);
    const auto nd = grlol::normalize(grlol::sim::gen_design(200, st.range(0), 0.2, 0.6, rng));
    for (auto _ : st) benchmark::DoNotOptimize(grlol::brg_plan(nd));
}

} // namespace

BENCHMARK(BM_GramSerial)->Arg(250)->Arg(1000);
BENCHMARK(BM_GramParallel)->Arg(250)->Arg(1000);
BENCHMARK(BM_RowMaxSerial)->Arg(1000);
BENCHMARK(BM_RowMaxParallel)->Arg(1000);
BENCHMARK(BM_XtySerial)->Arg(1000);
BENCHMARK(BM_XtyParallel)->Arg(1000);
BENCHMARK(BM_BrgPlan)->Arg(1000);

BENCHMARK_MAIN();
