#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "pacgibbs/dataset.hpp"
#include "pacgibbs/model.hpp"

namespace pacgibbs {

enum class OracleMode { ClosedForm, HiddenSample };

/// Isotropic Gaussian blobs, one per class, with a shared standard deviation.
struct BlobSpec {
  std::size_t dim = 2;
  std::vector<std::vector<double>> means;
  double sigma = 1.0;
  std::vector<double> class_weights;  // empty means uniform
  std::size_t n_pool = 400;
  std::size_t n_test = 1000;
  OracleMode oracle = OracleMode::ClosedForm;
  std::size_t hidden_samples = 1'000'000;

  /// Two classes centred at ±separation/2 along the first axis.
  static BlobSpec two_class(std::size_t dim, double separation, double sigma);

  void validate() const;
};

/// A synthetic distribution D with an exact (or near-exact) 01-risk oracle.
class SyntheticTask {
 public:
  SyntheticTask(BlobSpec spec, std::uint64_t seed);

  const BlobSpec& spec() const { return spec_; }
  const Dataset& pool() const { return pool_; }
  const Dataset& test() const { return test_; }

  /// Fresh i.i.d. sample of size n from D.
  Dataset sample(std::size_t n, std::uint64_t seed) const;

  /// R_D(h) under the 01-loss. Closed form for single-layer two-class models
  /// when the oracle mode allows it, hidden-sample estimate otherwise.
  double true_risk(const ParamVector& params) const;

  bool has_closed_form(const ParamVector& params) const;
  double closed_form_risk(const ParamVector& params) const;
  double hidden_sample_risk(const ParamVector& params) const;

 private:
  BlobSpec spec_;
  std::uint64_t seed_;
  std::vector<double> weights_;
  Dataset pool_;
  Dataset test_;
  mutable std::shared_ptr<const Dataset> hidden_;
};

/// Convenience wrapper returning the task (dataset + oracle).
SyntheticTask make_synthetic(const BlobSpec& spec, std::uint64_t seed);

}  // namespace pacgibbs
