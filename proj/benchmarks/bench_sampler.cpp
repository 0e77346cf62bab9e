#include <benchmark/benchmark.h>

#include "pacgibbs/sampler.hpp"
#include "pacgibbs/synthetic.hpp"

using namespace pacgibbs;

namespace {

// One SGLD epoch (no autotune) on the two-class blobs pool.
void BM_SgldEpoch(benchmark::State& state) {
  auto spec = BlobSpec::two_class(2, 2.0, 1.0);
  spec.n_pool = static_cast<std::size_t>(state.range(0));
  spec.n_test = 10;
  const SyntheticTask task(spec, 1);
  const auto init = init_params(Architecture::mlp(2, std::vector<std::size_t>{16}, 2), 2);
  const RiskObjective objective(task.pool());
  SgldConfig cfg;
  cfg.alpha = static_cast<double>(spec.n_pool);
  cfg.epochs = 1;
  cfg.autotune = false;
  for (auto _ : state) benchmark::DoNotOptimize(sgld_run(init, objective, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SgldEpoch)->Arg(1000)->Arg(8000);

}  // namespace
