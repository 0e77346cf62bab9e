#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pacgibbs/dataset.hpp"
#include "pacgibbs/model.hpp"
#include "pacgibbs/sampler.hpp"

namespace pacgibbs {

/// One trained hypothesis and its measured generalization gap.
struct GapDatasetEntry {
  ParamVector params;
  double gap = 0.0;
  double split_ratio = 0.0;
};

struct RatioRepetitions {
  double val_ratio = 0.5;  // m_val / (m_val + m_train)
  std::size_t repetitions = 1;
};

/// How the gap dataset is generated: SGD runs over several validation
/// ratios, one snapshot per epoch.
struct GapBuilderConfig {
  Architecture arch;
  std::vector<RatioRepetitions> schedule;
  SgldConfig sgd;               // alpha is unused; noise is off
  std::size_t min_iterations = 0;  // 0: run exactly sgd.epochs epochs
  std::size_t threads = 1;
};

/// Desk-scale version of the builder schedule: ratios {0.99,…,0.10}
/// with repetition counts scaled from 1000/120/110 by `scale`.
std::vector<RatioRepetitions> scaled_gap_schedule(double scale);

std::vector<GapDatasetEntry> build_gap_dataset(const Dataset& pool, const GapBuilderConfig& cfg,
                                               std::uint64_t seed);

/// Bins after rebalancing and the per-entry sampling weights (sum to 1).
struct Rebalancing {
  std::vector<std::vector<std::size_t>> bins;  // entry indices per surviving bin
  std::vector<double> weights;
  std::vector<std::size_t> bin_of;  // surviving bin of each entry
};

/// Equal-width histogram over [min gap, max gap] with `bins` bins; a bin
/// holding less than min_frac of the entries merges into its higher-gap
/// neighbour (the last one into its lower neighbour) until nothing changes.
/// Each surviving bin then gets mass 1/n_bins spread uniformly on its entries.
Rebalancing rebalance_bins(std::span<const double> gaps, std::size_t bins, double min_frac);

/// Draws `count` entry indices according to the rebalancing weights.
std::vector<std::size_t> sample_rebalanced(const Rebalancing& rb, std::size_t count, Rng& rng);

struct PredictorConfig {
  std::size_t hidden_layers = 3;
  std::size_t width = 64;
  std::size_t batch_size = 64;
  double adam_lr = 1e-3;
  double val_ratio = 0.3;
  std::size_t epochs = 100;
  std::size_t bins = 50;
  double min_bin_frac = 0.01;
  double bn_momentum = 0.1;
  double bn_eps = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Gap predictor: ℓ2-normalised input → batch norm → leaky-ReLU MLP → scalar,
/// squared at the output. Inference uses the running batch-norm statistics.
class GapPredictor {
 public:
  GapPredictor() = default;
  GapPredictor(std::size_t input_dim, const PredictorConfig& cfg, std::uint64_t seed);

  std::size_t input_dim() const { return input_dim_; }

  double predict(std::span<const double> params) const;
  double predict(const ParamVector& params) const { return predict(params.values()); }

  /// d predict / d params.
  std::vector<double> input_gradient(std::span<const double> params) const;

  /// One training step on a batch (batch statistics, running stats updated).
  /// Returns the batch mean absolute error before the update.
  double train_step(std::span<const std::span<const double>> inputs, std::span<const double> targets,
                    AdamState& adam);

  std::size_t trainable_count() const;

  void save(const std::filesystem::path& path) const;
  static GapPredictor load(const std::filesystem::path& path);

  bool operator==(const GapPredictor&) const = default;

 private:
  std::vector<double> normalized_input(std::span<const double> params) const;

  std::size_t input_dim_ = 0;
  double momentum_ = 0.1;
  double eps_ = 0.0;
  std::vector<double> gamma_, beta_, running_mean_, running_var_;
  ParamVector net_;
};

struct TrainedPredictor {
  GapPredictor predictor;
  double best_val_mae = 0.0;
  std::size_t best_epoch = 0;  // 1-based
  std::vector<double> val_mae;  // per epoch
};

TrainedPredictor train_predictor(const std::vector<GapDatasetEntry>& dataset, const PredictorConfig& cfg);

/// Nonnegative gap estimate for a hypothesis; throws on layout mismatch.
double predict_gap(const GapPredictor& predictor, const ParamVector& params);

/// JSON-lines persistence of the gap dataset.
void save_gap_dataset(const std::vector<GapDatasetEntry>& entries, const std::filesystem::path& path);
std::vector<GapDatasetEntry> load_gap_dataset(const std::filesystem::path& path, const Architecture& arch);

}  // namespace pacgibbs
