#include "dcs/estimate.hpp"
#include "dcs/hessian.hpp"
#include "dcs/simulate.hpp"
#include "dcs/stability.hpp"

#include <benchmark/benchmark.h>

#include <map>

namespace {

using namespace dcs;

const Matrix& series(Eigen::Index T) {
  static std::map<Eigen::Index, Matrix> cache;
  auto it = cache.find(T);
  if (it == cache.end()) it = cache.emplace(T, simulate(bivariate_design(5.0), T, 500, 1).y).first;
  return it->second;
}

void BM_FilterPass(benchmark::State& state) {
  const ModelParams p = bivariate_design(5.0);
  const Matrix& y = series(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(filter_pass(p, y).loglik);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FilterPass)->Arg(250)->Arg(1000)->Arg(5000);

void BM_ScoreAndInformation(benchmark::State& state) {
  const ModelParams p = bivariate_design(5.0);
  const Matrix& y = series(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(score_and_information(p, y).loglik);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ScoreAndInformation)->Arg(250)->Arg(1000)->Arg(5000);

void BM_ObservedHessian(benchmark::State& state) {
  const ModelParams p = bivariate_design(5.0);
  const Matrix& y = series(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(observed_hessian(p, y)(0, 0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ObservedHessian)->Arg(250)->Arg(1000);

void BM_Estimate(benchmark::State& state) {
  const Matrix& y = series(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(estimate(y, false).loglik);
}
BENCHMARK(BM_Estimate)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_ContractionCell(benchmark::State& state) {
  const Matrix eye = Matrix::Identity(2, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(contraction_mc(0.5 * eye, -0.5 * eye, eye, 7.0, state.range(0), 1).estimate);
  }
}
BENCHMARK(BM_ContractionCell)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
