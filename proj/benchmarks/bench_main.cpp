// Throughput of the hot paths: matvec (dense vs FFT embedding), dense eigensolve,
// GMRES on catalog cases, and preconditioner solves (banded vs dense LU).

#include <random>

#include <benchmark/benchmark.h>

#include <toepspec/catalog.hpp>
#include <toepspec/krylov.hpp>
#include <toepspec/linalg.hpp>
#include <toepspec/spectral.hpp>
#include <toepspec/toeplitz.hpp>

using namespace toepspec;

namespace {

CVector random_vector(std::size_t order) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  CVector v(order);
  for (auto& z : v) z = cplx(normal(rng), normal(rng));
  return v;
}

void BM_MatvecDense(benchmark::State& state) {
  const auto op = ToeplitzOperator::dense(catalog(1, 2.0).f, MultiIndex{static_cast<int>(state.range(0))});
  const auto v = random_vector(op.order());
  for (auto _ : state) benchmark::DoNotOptimize(op.apply_dense(v));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MatvecDense)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

void BM_MatvecEmbedded(benchmark::State& state) {
  const auto op = ToeplitzOperator::embedded(catalog(1, 2.0).f, MultiIndex{static_cast<int>(state.range(0))});
  const auto v = random_vector(op.order());
  for (auto _ : state) benchmark::DoNotOptimize(op.apply_embedded(v));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MatvecEmbedded)->RangeMultiplier(2)->Range(64, 8192)->Complexity();

void BM_EigDense(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto t = toeplitz_matrix(catalog(5).f, MultiIndex{n, n});
  for (auto _ : state) benchmark::DoNotOptimize(eig_dense(t));
}
BENCHMARK(BM_EigDense)->DenseRange(5, 15, 5)->Unit(benchmark::kMillisecond);

void BM_Gmres(benchmark::State& state) {
  const bool prec = state.range(1) != 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(run_case(4, std::nullopt, MultiIndex{static_cast<int>(state.range(0))}, prec, 42));
}
BENCHMARK(BM_Gmres)->Args({100, 0})->Args({100, 1})->Args({400, 1})->Unit(benchmark::kMillisecond);

void BM_PrecondBanded(benchmark::State& state) {
  const MultiIndex n{static_cast<int>(state.range(0))};
  const auto factor = factor_preconditioner(catalog(1, 2.0).g, n);
  const auto b = random_vector(factor.order());
  for (auto _ : state) benchmark::DoNotOptimize(factor.apply(b));
}
BENCHMARK(BM_PrecondBanded)->RangeMultiplier(4)->Range(64, 1024);

void BM_PrecondDense(benchmark::State& state) {
  const MultiIndex n{static_cast<int>(state.range(0))};
  const auto t = toeplitz_matrix(catalog(1, 2.0).g, n);
  const LuFactor lu(t);
  const auto b = random_vector(t.rows());
  for (auto _ : state) benchmark::DoNotOptimize(lu.solve(b));
}
BENCHMARK(BM_PrecondDense)->RangeMultiplier(4)->Range(64, 256);

}  // namespace
BENCHMARK_MAIN();
