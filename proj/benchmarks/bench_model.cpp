#include <benchmark/benchmark.h>

#include <random>

#include "pacgibbs/model.hpp"

using namespace pacgibbs;

namespace {

Dataset gaussian(std::size_t n, std::size_t dim, std::size_t classes) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Dataset d;
  d.dim = dim;
  d.num_classes = classes;
  std::vector<double> x(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : x) v = g(rng);
    d.push_back(x, static_cast<int>(i % classes));
  }
  return d;
}

// Input 784, one hidden layer of range(0) units, 10 classes, batch of 64.
void BM_Forward(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  const auto h = init_params(Architecture::mlp(784, std::vector<std::size_t>{hidden}, 10), 1);
  const auto data = gaussian(64, 784, 10);
  for (auto _ : state) benchmark::DoNotOptimize(empirical_risk(h, data, LossKind::BoundedCrossEntropy));
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_Forward)->Arg(32)->Arg(128);

void BM_RiskGradient(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  const auto h = init_params(Architecture::mlp(784, std::vector<std::size_t>{hidden}, 10), 1);
  const auto data = gaussian(64, 784, 10);
  for (auto _ : state) benchmark::DoNotOptimize(risk_gradient(h, data));
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_RiskGradient)->Arg(32)->Arg(128);

}  // namespace
