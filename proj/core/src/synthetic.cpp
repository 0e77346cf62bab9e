#include "pacgibbs/synthetic.hpp"

#include <cmath>
#include <mutex>
#include <numeric>
#include <random>
#include <stdexcept>

#include "pacgibbs/rng.hpp"

namespace pacgibbs {

BlobSpec BlobSpec::two_class(std::size_t dim, double separation, double sigma) {
  BlobSpec spec;
  spec.dim = dim;
  spec.sigma = sigma;
  std::vector<double> a(dim, 0.0), b(dim, 0.0);
  a[0] = -separation / 2.0;
  b[0] = separation / 2.0;
  spec.means = {a, b};
  return spec;
}

void BlobSpec::validate() const {
  if (dim == 0) throw std::invalid_argument("blob dimension must be >= 1");
  if (means.size() < 2) throw std::invalid_argument("blob task needs at least two classes");
  for (const auto& mu : means) {
    if (mu.size() != dim) throw std::invalid_argument("blob mean has the wrong dimension");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("degenerate blob spec: sigma must be > 0");
  }
  if (!class_weights.empty()) {
    if (class_weights.size() != means.size()) throw std::invalid_argument("class weight count mismatch");
    double total = 0.0;
    for (double w : class_weights) {
      if (!(w >= 0.0)) throw std::invalid_argument("class weights must be >= 0");
      total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("class weights sum to zero");
  }
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

SyntheticTask::SyntheticTask(BlobSpec spec, std::uint64_t seed) : spec_(std::move(spec)), seed_(seed) {
  spec_.validate();
  weights_ = spec_.class_weights.empty() ? std::vector<double>(spec_.means.size(), 1.0) : spec_.class_weights;
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  for (double& w : weights_) w /= total;
  pool_ = sample(spec_.n_pool, derive_seed(seed_, stream::kData, 0));
  test_ = sample(spec_.n_test, derive_seed(seed_, stream::kData, 1));
}

Dataset SyntheticTask::sample(std::size_t n, std::uint64_t seed) const {
  Dataset ds;
  ds.dim = spec_.dim;
  ds.num_classes = spec_.means.size();
  ds.features.reserve(n * spec_.dim);
  ds.labels.reserve(n);
  Rng rng(seed);
  std::discrete_distribution<int> label_dist(weights_.begin(), weights_.end());
  std::normal_distribution<double> noise(0.0, spec_.sigma);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = label_dist(rng);
    for (std::size_t k = 0; k < spec_.dim; ++k) {
      ds.features.push_back(spec_.means[static_cast<std::size_t>(y)][k] + noise(rng));
    }
    ds.labels.push_back(y);
  }
  return ds;
}

bool SyntheticTask::has_closed_form(const ParamVector& params) const {
  return params.num_layers() == 1 && spec_.means.size() == 2 && params.architecture().num_labels() == 2;
}

double SyntheticTask::closed_form_risk(const ParamVector& params) const {
  if (!has_closed_form(params)) throw std::invalid_argument("closed-form oracle needs a two-class linear model");
  const std::size_t d = spec_.dim;
  const auto w = params.weights(0);
  const auto b = params.biases(0);
  // Class 1 is predicted iff a·x + c > 0 (ties go to class 0).
  std::vector<double> a(d);
  double norm2 = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    a[k] = w[d + k] - w[k];
    norm2 += a[k] * a[k];
  }
  const double c = b.empty() ? 0.0 : b[1] - b[0];
  const double scale = spec_.sigma * std::sqrt(norm2);
  auto prob_positive = [&](std::size_t cls) {
    double mean = c;
    for (std::size_t k = 0; k < d; ++k) mean += a[k] * spec_.means[cls][k];
    if (scale == 0.0) return mean > 0.0 ? 1.0 : 0.0;
    return normal_cdf(mean / scale);
  };
  return weights_[0] * prob_positive(0) + weights_[1] * (1.0 - prob_positive(1));
}

double SyntheticTask::hidden_sample_risk(const ParamVector& params) const {
  static std::mutex mu;
  std::shared_ptr<const Dataset> hidden;
  {
    std::lock_guard lock(mu);
    if (!hidden_) {
      hidden_ = std::make_shared<const Dataset>(sample(spec_.hidden_samples, derive_seed(seed_, stream::kData, 2)));
    }
    hidden = hidden_;
  }
  return empirical_risk(params, *hidden, LossKind::ZeroOne);
}

double SyntheticTask::true_risk(const ParamVector& params) const {
  if (spec_.oracle == OracleMode::ClosedForm && has_closed_form(params)) return closed_form_risk(params);
  return hidden_sample_risk(params);
}

SyntheticTask make_synthetic(const BlobSpec& spec, std::uint64_t seed) { return SyntheticTask(spec, seed); }

}  // namespace pacgibbs
