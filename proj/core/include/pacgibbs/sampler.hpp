#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "pacgibbs/dataset.hpp"
#include "pacgibbs/model.hpp"
#include "pacgibbs/rng.hpp"

namespace pacgibbs {

/// A differentiable ν(h, S) with μ = αν. The sampler only touches the
/// objective through these three calls.
class Objective {
 public:
  virtual ~Objective() = default;

  /// Number of examples an epoch iterates over.
  virtual std::size_t num_examples() const = 0;

  /// ν on the whole sample; drives learning-rate autotuning.
  virtual double value(const ParamVector& params) const = 0;

  /// ∇ν estimated on a mini-batch. `aux` serves objectives that need extra
  /// randomness (e.g. a test-set mini-batch).
  virtual std::vector<double> gradient(const ParamVector& params, std::span<const std::size_t> batch,
                                       Rng& aux) const = 0;
};

/// ν = mean bounded cross-entropy on a sample.
class RiskObjective final : public Objective {
 public:
  explicit RiskObjective(const Dataset& sample) : sample_(sample) {}
  std::size_t num_examples() const override { return sample_.size(); }
  double value(const ParamVector& params) const override;
  std::vector<double> gradient(const ParamVector& params, std::span<const std::size_t> batch,
                               Rng& aux) const override;

 private:
  const Dataset& sample_;
};

struct SgldConfig {
  double alpha = 1.0;
  std::size_t epochs = 10;
  std::size_t batch_size = 64;
  double lr_init = 0.1;
  double lr_decay_on_fail = 0.1;
  double lr_floor = 1e-10;
  double lr_epoch_decay = 0.5;
  int max_wraps = 3;
  bool autotune = true;
  std::uint64_t seed = 0;

  void validate() const;
};

class AutotuneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EpochSnapshot {
  std::size_t epoch;       // 1-based
  std::size_t iterations;  // cumulative steps
  double lr;               // rate used during this epoch
  const ParamVector& params;
};
using EpochCallback = std::function<void(const EpochSnapshot&)>;

/// h ← h − η·∇ν + √(2η/α)·ε.
ParamVector sgld_step(const ParamVector& params, std::span<const double> grad_nu, double eta,
                      double alpha, std::span<const double> noise);

/// First rate of the ladder lr_init, lr_init·decay, … whose single epoch from
/// `init` lowers ν below its starting value. Each probe restarts from `init`
/// with a fresh sub-seed; below lr_floor the ladder wraps back to lr_init.
/// Throws AutotuneError after cfg.max_wraps wrap-arounds.
double lr_autotune(const ParamVector& init, const Objective& objective, const SgldConfig& cfg,
                   bool noise = true);

struct RunOptions {
  bool noise = true;
  std::optional<std::size_t> epochs;  // overrides cfg.epochs
  std::size_t min_iterations = 0;     // keep going (whole epochs) until reached
  EpochCallback on_epoch;
};

struct RunResult {
  ParamVector params;
  double initial_lr = 0.0;
  std::size_t epochs = 0;
  std::size_t iterations = 0;
};

/// Autotune (unless disabled) then the epoch schedule with per-epoch decay.
RunResult run_dynamics(const ParamVector& init, const Objective& objective, const SgldConfig& cfg,
                       const RunOptions& options);

/// One sample h ~ Q_S, approximately, via SGLD.
ParamVector sgld_run(const ParamVector& init, const Objective& objective, const SgldConfig& cfg);

/// Noise-free counterpart of sgld_run.
ParamVector sgd_run(const ParamVector& init, const Objective& objective, const SgldConfig& cfg,
                    std::optional<std::size_t> epochs_override = std::nullopt,
                    std::size_t min_iterations = 0, const EpochCallback& on_epoch = {});

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  AdamState(std::size_t n, double learning_rate) : m(n, 0.0), v(n, 0.0), lr(learning_rate) {}
};

/// Advances the moments and returns the bias-corrected update to add to the
/// parameters.
std::vector<double> adam_step(AdamState& state, std::span<const double> grad);

}  // namespace pacgibbs
