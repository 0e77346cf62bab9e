#include <benchmark/benchmark.h>

#include "pacgibbs/bounds.hpp"
#include "pacgibbs/kl.hpp"

namespace {

void BM_KlInverse(benchmark::State& state) {
  const double q = static_cast<double>(state.range(0)) / 100.0;
  double tau = 0.001;
  for (auto _ : state) {
    benchmark::DoNotOptimize(pacgibbs::kl_inv_upper(q, tau));
    tau = tau < 2.0 ? tau * 1.01 : 0.001;
  }
}
BENCHMARK(BM_KlInverse)->Arg(0)->Arg(10)->Arg(50)->Arg(90);

void BM_CatoniInf(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(pacgibbs::catoni_inf(0.2, 0.05));
}
BENCHMARK(BM_CatoniInf);

}  // namespace

BENCHMARK_MAIN();
