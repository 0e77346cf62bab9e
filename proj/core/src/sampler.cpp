#include "pacgibbs/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace pacgibbs {

double RiskObjective::value(const ParamVector& params) const {
  return empirical_risk(params, sample_, LossKind::BoundedCrossEntropy);
}

std::vector<double> RiskObjective::gradient(const ParamVector& params, std::span<const std::size_t> batch,
                                            Rng&) const {
  return risk_gradient(params, sample_, batch);
}

void SgldConfig::validate() const {
  auto rate = [](double r, const char* name) {
    if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in (0,1]");
  };
  if (!(alpha > 0.0)) throw std::invalid_argument("sampler alpha must be > 0");
  if (epochs < 1) throw std::invalid_argument("sampler epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("sampler batch_size must be >= 1");
  rate(lr_init, "lr_init");
  rate(lr_decay_on_fail, "lr_decay_on_fail");
  rate(lr_floor, "lr_floor");
  rate(lr_epoch_decay, "lr_epoch_decay");
  if (max_wraps < 0) throw std::invalid_argument("max_wraps must be >= 0");
}

ParamVector sgld_step(const ParamVector& params, std::span<const double> grad_nu, double eta,
                      double alpha, std::span<const double> noise) {
  if (grad_nu.size() != params.size() || noise.size() != params.size()) {
    throw std::invalid_argument("sgld_step: gradient/noise length mismatch");
  }
  if (!(eta > 0.0) || !(alpha > 0.0)) throw std::invalid_argument("sgld_step: eta and alpha must be > 0");
  ParamVector out = params;
  const double scale = std::sqrt(2.0 * eta / alpha);
  auto v = out.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += -eta * grad_nu[i] + scale * noise[i];
  return out;
}

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Runs `epochs` epochs starting at rate `lr`; `probe` selects the sub-seeds.
// Returns false if the iterate blew up.
bool run_epochs(ParamVector& params, const Objective& objective, const SgldConfig& cfg, double lr,
                std::size_t epochs, std::size_t min_iterations, bool noise, std::uint64_t probe,
                const EpochCallback& on_epoch, std::size_t& iterations, std::size_t& epochs_done) {
  const std::size_t n = objective.num_examples();
  if (n == 0) throw std::invalid_argument("objective has no examples");
  Rng shuffle_rng(derive_seed(cfg.seed, stream::kShuffle, probe));
  Rng noise_rng(derive_seed(cfg.seed, stream::kNoise, probe));
  Rng aux_rng(derive_seed(cfg.seed, stream::kAux, probe));
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> eps(params.size(), 0.0);
  const double alpha = cfg.alpha;

  for (std::size_t epoch = 1; epoch <= epochs || iterations < min_iterations; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, n - start);
      const auto g = objective.gradient(params, std::span<const std::size_t>(order).subspan(start, len), aux_rng);
      auto v = params.values();
      if (noise) {
        for (double& e : eps) e = gauss(noise_rng);
        const double scale = std::sqrt(2.0 * lr / alpha);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += -lr * g[i] + scale * eps[i];
      } else {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += -lr * g[i];
      }
      ++iterations;
    }
    epochs_done = epoch;
    if (!all_finite(params.values())) return false;
    if (on_epoch) on_epoch(EpochSnapshot{epoch, iterations, lr, params});
    lr *= cfg.lr_epoch_decay;
  }
  return true;
}

constexpr std::uint64_t kFinalProbe = 0;

}  // namespace

double lr_autotune(const ParamVector& init, const Objective& objective, const SgldConfig& cfg, bool noise) {
  cfg.validate();
  const double baseline = objective.value(init);
  std::uint64_t probe = 1;
  for (int wraps = 0; wraps <= cfg.max_wraps; ++wraps) {
    for (double lr = cfg.lr_init; lr >= cfg.lr_floor * (1.0 - 1e-9); lr *= cfg.lr_decay_on_fail, ++probe) {
      ParamVector trial = init;
      std::size_t iterations = 0, epochs_done = 0;
      const bool ok = run_epochs(trial, objective, cfg, lr, 1, 0, noise, probe, {}, iterations, epochs_done);
      if (!ok) continue;
      const double after = objective.value(trial);
      if (std::isfinite(after) && after < baseline) return lr;
      if (cfg.lr_decay_on_fail >= 1.0) break;
    }
  }
  throw AutotuneError("learning-rate autotune failed: no rate in [" + std::to_string(cfg.lr_floor) + ", " +
                      std::to_string(cfg.lr_init) + "] decreased the mean loss after " +
                      std::to_string(cfg.max_wraps) + " wrap-arounds (baseline " + std::to_string(baseline) +
                      ")");
}

RunResult run_dynamics(const ParamVector& init, const Objective& objective, const SgldConfig& cfg,
                       const RunOptions& options) {
  cfg.validate();
  RunResult result;
  result.initial_lr = cfg.autotune ? lr_autotune(init, objective, cfg, options.noise) : cfg.lr_init;
  result.params = init;
  const std::size_t epochs = options.epochs.value_or(cfg.epochs);
  const bool ok = run_epochs(result.params, objective, cfg, result.initial_lr, epochs, options.min_iterations,
                             options.noise, kFinalProbe, options.on_epoch, result.iterations, result.epochs);
  if (!ok) throw std::runtime_error("sampler diverged: non-finite parameters");
  return result;
}

ParamVector sgld_run(const ParamVector& init, const Objective& objective, const SgldConfig& cfg) {
  return run_dynamics(init, objective, cfg, RunOptions{}).params;
}

ParamVector sgd_run(const ParamVector& init, const Objective& objective, const SgldConfig& cfg,
                    std::optional<std::size_t> epochs_override, std::size_t min_iterations,
                    const EpochCallback& on_epoch) {
  RunOptions options;
  options.noise = false;
  options.epochs = epochs_override;
  options.min_iterations = min_iterations;
  options.on_epoch = on_epoch;
  return run_dynamics(init, objective, cfg, options).params;
}

std::vector<double> adam_step(AdamState& state, std::span<const double> grad) {
  if (grad.size() != state.m.size() || grad.size() != state.v.size()) {
    throw std::invalid_argument("adam_step: gradient length mismatch");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  std::vector<double> update(grad.size());
  for (std::size_t i = 0; i < grad.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    update[i] = -state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
  return update;
}

}  // namespace pacgibbs
