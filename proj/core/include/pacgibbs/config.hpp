#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pacgibbs/bounds.hpp"
#include "pacgibbs/complexity.hpp"
#include "pacgibbs/model.hpp"
#include "pacgibbs/sampler.hpp"
#include "pacgibbs/synthetic.hpp"

namespace pacgibbs {

/// Raised for malformed or inconsistent configuration; `key()` names the
/// offending `section.key`.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class TaskKind { Blobs, Idx };

struct TaskConfig {
  TaskKind kind = TaskKind::Blobs;
  // blobs
  std::size_t dim = 2;
  std::size_t classes = 2;
  double separation = 2.0;
  double sigma = 1.0;
  std::size_t n_pool = 8000;
  std::size_t n_test = 4000;
  OracleMode oracle = OracleMode::ClosedForm;
  std::size_t hidden_samples = 1'000'000;
  std::optional<std::uint64_t> seed;
  // idx
  std::string train_images, train_labels, test_images, test_labels;
  std::size_t pool_limit = 0;  // 0: all rows
  std::size_t test_limit = 0;

  BlobSpec blob_spec() const;
};

struct ModelConfig {
  std::vector<std::size_t> hidden;
  bool bias = true;
  double leaky_slope = 0.01;

  Architecture architecture(std::size_t input_dim, std::size_t labels) const;
};

struct MuConfig {
  MuFamily family = MuFamily::EmpRisk;
  std::optional<NormKind> norm;  // regularized / distance_to_ref; empty + distance_to_ref = neural target
  std::string predictor_path;    // neural / distance_to_ref with neural target
  std::size_t sgd_epochs_min = 1;
  std::size_t sgd_epochs_max = 10;
  bool skip_sgld_for_gap = true;
};

struct BoundConfig {
  std::vector<BoundFamily> families{BoundFamily::Cor4, BoundFamily::Cor5, BoundFamily::Eq8, BoundFamily::Eq9};
  double delta = 0.05;
  KlInversionConfig kl;
};

/// Alpha grid: either log-spaced between √m and m (count points), or an
/// explicit list where the token "m" stands for the learning sample size.
struct SweepConfig {
  bool alpha_log_grid = true;
  std::size_t alpha_count = 5;
  std::vector<std::string> alpha_values;
  std::vector<double> betas{1.0};
  std::vector<double> ratios{0.0, 0.5};
  std::size_t repetitions = 5;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  std::vector<double> alphas(std::size_t m) const;
};

struct ValidateConfig {
  std::size_t m = 200;
  double ratio = 0.5;
  std::string alpha = "sqrt_m";       // number, "m" or "sqrt_m"
  std::string alpha_prime = "alpha";  // number, "m", "sqrt_m" or "alpha"
  std::size_t trials = 200;

  double resolve(const std::string& token, std::size_t m_value, double alpha_value) const;
};

struct ExperimentConfig {
  TaskConfig task;
  ModelConfig model;
  MuConfig mu;
  SgldConfig sampler;
  BoundConfig bound;
  SweepConfig sweep;
  ValidateConfig validate;
  std::string digest;  // FNV-1a over the canonical key=value listing

  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);
};

/// Every recognised key with its default, in config-file syntax.
std::string default_config_text();

std::uint64_t fnv1a64(const std::string& text);

}  // namespace pacgibbs
