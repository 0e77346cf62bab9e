#include "pacgibbs/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pacgibbs/rng.hpp"

namespace pacgibbs {

void Dataset::push_back(std::span<const double> x, int y) {
  if (x.size() != dim) throw std::invalid_argument("row dimension mismatch");
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(y);
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.dim = dim;
  out.num_classes = num_classes;
  out.features.reserve(rows.size() * dim);
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) {
    if (r >= size()) throw std::out_of_range("subset row out of range");
    out.push_back(row(r), labels[r]);
  }
  return out;
}

// ---------------------------------------------------------------- layout

Architecture Architecture::mlp(std::size_t input_dim, std::span<const std::size_t> hidden,
                               std::size_t num_labels, bool bias, double leaky_slope) {
  Architecture arch;
  arch.leaky_slope = leaky_slope;
  std::size_t prev = input_dim;
  for (std::size_t width : hidden) {
    arch.layers.push_back({prev, width, bias});
    prev = width;
  }
  arch.layers.push_back({prev, num_labels, bias});
  return arch;
}

void Architecture::validate() const {
  if (layers.empty()) throw std::invalid_argument("architecture has no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].input_dim == 0 || layers[i].output_dim == 0) {
      throw std::invalid_argument("layer " + std::to_string(i) + " has a zero dimension");
    }
    if (i > 0 && layers[i].input_dim != layers[i - 1].output_dim) {
      throw std::invalid_argument("layer " + std::to_string(i) + " input does not chain with layer " +
                                  std::to_string(i - 1));
    }
  }
}

std::size_t Architecture::param_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.input_dim * l.output_dim + (l.has_bias ? l.output_dim : 0);
  return n;
}

ParamVector::ParamVector(Architecture arch)
    : ParamVector(arch, std::vector<double>(arch.param_count(), 0.0)) {}

ParamVector::ParamVector(Architecture arch, std::vector<double> values) {
  arch.validate();
  if (values.size() != arch.param_count()) {
    throw std::invalid_argument("parameter count " + std::to_string(values.size()) +
                                " does not match architecture (" +
                                std::to_string(arch.param_count()) + ")");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite parameter value");
  }
  auto layout = std::make_shared<Layout>();
  std::size_t offset = 0;
  for (const auto& l : arch.layers) {
    LayerSlice s;
    s.weight_offset = offset;
    s.weight_count = l.input_dim * l.output_dim;
    s.bias_offset = offset + s.weight_count;
    s.bias_count = l.has_bias ? l.output_dim : 0;
    offset = s.end();
    layout->slices.push_back(s);
  }
  layout->arch = std::move(arch);
  layout_ = std::move(layout);
  values_ = std::move(values);
}

std::span<const double> ParamVector::layer(std::size_t i) const {
  const auto& s = layout_->slices.at(i);
  return std::span<const double>(values_).subspan(s.begin(), s.count());
}
std::span<const double> ParamVector::weights(std::size_t i) const {
  const auto& s = layout_->slices.at(i);
  return std::span<const double>(values_).subspan(s.weight_offset, s.weight_count);
}
std::span<double> ParamVector::weights(std::size_t i) {
  const auto& s = layout_->slices.at(i);
  return std::span<double>(values_).subspan(s.weight_offset, s.weight_count);
}
std::span<const double> ParamVector::biases(std::size_t i) const {
  const auto& s = layout_->slices.at(i);
  return std::span<const double>(values_).subspan(s.bias_offset, s.bias_count);
}
std::span<double> ParamVector::biases(std::size_t i) {
  const auto& s = layout_->slices.at(i);
  return std::span<double>(values_).subspan(s.bias_offset, s.bias_count);
}

bool ParamVector::same_layout(const ParamVector& other) const {
  if (layout_ == other.layout_) return true;
  if (!layout_ || !other.layout_) return false;
  return layout_->arch == other.layout_->arch;
}

void ParamVector::require_same_layout(const ParamVector& other, const char* what) const {
  if (!same_layout(other)) throw std::invalid_argument(std::string(what) + ": parameter layout mismatch");
}

bool ParamVector::operator==(const ParamVector& other) const {
  return same_layout(other) && values_ == other.values_;
}

// ---------------------------------------------------------------- init

ParamVector init_params(const Architecture& arch, std::uint64_t seed) {
  ParamVector params(arch);
  Rng rng(derive_seed(seed, stream::kInit));
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    const auto& l = arch.layers[i];
    const double limit = std::sqrt(6.0 / static_cast<double>(l.input_dim + l.output_dim));
    std::uniform_real_distribution<double> w_dist(-limit, limit);
    for (double& w : params.weights(i)) w = w_dist(rng);
    const double b_limit = 1.0 / std::sqrt(static_cast<double>(l.input_dim));
    std::uniform_real_distribution<double> b_dist(-b_limit, b_limit);
    for (double& b : params.biases(i)) b = b_dist(rng);
  }
  return params;
}

// ---------------------------------------------------------------- forward

namespace {

void check_input(const ParamVector& params, std::size_t dim) {
  if (params.size() == 0) throw std::invalid_argument("empty parameter vector");
  if (dim != params.architecture().input_dim()) {
    throw std::invalid_argument("input dimension " + std::to_string(dim) + " does not match " +
                                std::to_string(params.architecture().input_dim()));
  }
}

void affine(const ParamVector& params, std::size_t i, std::span<const double> in,
            std::vector<double>& out) {
  const auto& shape = params.architecture().layers[i];
  const auto w = params.weights(i);
  const auto b = params.biases(i);
  out.assign(shape.output_dim, 0.0);
  for (std::size_t o = 0; o < shape.output_dim; ++o) {
    const double* row = w.data() + o * shape.input_dim;
    double acc = b.empty() ? 0.0 : b[o];
    for (std::size_t k = 0; k < shape.input_dim; ++k) acc += row[k] * in[k];
    out[o] = acc;
  }
}

void softmax_inplace(std::vector<double>& z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

const double kE4 = std::exp(-4.0);
const double kScale = 1.0 - 2.0 * kE4;

}  // namespace

void forward_trace(const ParamVector& params, std::span<const double> x, ForwardTrace& t) {
  check_input(params, x.size());
  const auto& arch = params.architecture();
  const std::size_t L = arch.layers.size();
  t.inputs.resize(L);
  t.pre.resize(L);
  t.inputs[0].assign(x.begin(), x.end());
  for (std::size_t i = 0; i < L; ++i) {
    affine(params, i, t.inputs[i], t.pre[i]);
    if (i + 1 < L) {
      auto& next = t.inputs[i + 1];
      next = t.pre[i];
      for (double& v : next) v = v > 0.0 ? v : arch.leaky_slope * v;
    }
  }
}

void backward(const ParamVector& params, const ForwardTrace& t, std::span<const double> delta_out,
              double weight, std::span<double> out, std::vector<double>* input_grad) {
  const auto& arch = params.architecture();
  const auto& slices = params.slices();
  std::vector<double> delta(delta_out.begin(), delta_out.end());
  std::vector<double> prev;
  for (std::size_t i = arch.layers.size(); i-- > 0;) {
    const auto& shape = arch.layers[i];
    const auto& s = slices[i];
    const auto w = params.weights(i);
    const auto& in = t.inputs[i];
    for (std::size_t o = 0; o < shape.output_dim; ++o) {
      const double d = weight * delta[o];
      double* g = out.data() + s.weight_offset + o * shape.input_dim;
      for (std::size_t k = 0; k < shape.input_dim; ++k) g[k] += d * in[k];
      if (s.bias_count) out[s.bias_offset + o] += d;
    }
    if (i == 0 && !input_grad) break;
    prev.assign(shape.input_dim, 0.0);
    for (std::size_t o = 0; o < shape.output_dim; ++o) {
      const double* row = w.data() + o * shape.input_dim;
      for (std::size_t k = 0; k < shape.input_dim; ++k) prev[k] += row[k] * delta[o];
    }
    if (i == 0) {
      *input_grad = std::move(prev);
      break;
    }
    const auto& z = t.pre[i - 1];
    for (std::size_t k = 0; k < prev.size(); ++k) prev[k] *= z[k] > 0.0 ? 1.0 : arch.leaky_slope;
    delta.swap(prev);
  }
}

std::vector<double> logits(const ParamVector& params, std::span<const double> x) {
  check_input(params, x.size());
  const std::size_t L = params.num_layers();
  std::vector<double> a(x.begin(), x.end());
  std::vector<double> z;
  const double slope = params.architecture().leaky_slope;
  for (std::size_t i = 0; i < L; ++i) {
    affine(params, i, a, z);
    if (i + 1 < L) {
      for (double& v : z) v = v > 0.0 ? v : slope * v;
    }
    a.swap(z);
  }
  return a;
}

std::vector<double> forward(const ParamVector& params, std::span<const double> x) {
  auto z = logits(params, x);
  softmax_inplace(z);
  return z;
}

double loss(LossKind kind, std::span<const double> prediction, int y) {
  if (y < 0 || static_cast<std::size_t>(y) >= prediction.size()) {
    throw std::out_of_range("label " + std::to_string(y) + " outside prediction vector");
  }
  if (kind == LossKind::ZeroOne) {
    const auto best = std::max_element(prediction.begin(), prediction.end()) - prediction.begin();
    return best == y ? 0.0 : 1.0;
  }
  const double p = std::clamp(prediction[static_cast<std::size_t>(y)], 0.0, 1.0);
  return std::clamp(-0.25 * std::log(kE4 + kScale * p), 0.0, 1.0);
}

double empirical_risk(const ParamVector& params, const Dataset& sample,
                      std::span<const std::size_t> rows, LossKind kind) {
  if (rows.empty()) throw std::invalid_argument("empirical risk of an empty sample");
  double total = 0.0;
  for (std::size_t r : rows) total += loss(kind, forward(params, sample.row(r)), sample.labels[r]);
  return total / static_cast<double>(rows.size());
}

double empirical_risk(const ParamVector& params, const Dataset& sample, LossKind kind) {
  if (sample.empty()) throw std::invalid_argument("empirical risk of an empty sample");
  double total = 0.0;
  for (std::size_t r = 0; r < sample.size(); ++r) {
    total += loss(kind, forward(params, sample.row(r)), sample.labels[r]);
  }
  return total / static_cast<double>(sample.size());
}

std::vector<double> risk_gradient(const ParamVector& params, const Dataset& sample,
                                  std::span<const std::size_t> rows) {
  if (rows.empty()) throw std::invalid_argument("gradient over an empty batch");
  std::vector<double> g(params.size(), 0.0);
  ForwardTrace t;
  std::vector<double> probs, delta;
  const double weight = 1.0 / static_cast<double>(rows.size());
  for (std::size_t r : rows) {
    forward_trace(params, sample.row(r), t);
    probs = t.pre.back();
    softmax_inplace(probs);
    const auto y = static_cast<std::size_t>(sample.labels[r]);
    if (y >= probs.size()) throw std::out_of_range("label outside network outputs");
    const double py = probs[y];
    // d ℓ′ / d p_y, then softmax Jacobian p_y(δ_yk − p_k).
    const double dl_dp = -0.25 * kScale / (kE4 + kScale * py);
    delta.resize(probs.size());
    for (std::size_t k = 0; k < delta.size(); ++k) {
      delta[k] = dl_dp * py * ((k == y ? 1.0 : 0.0) - probs[k]);
    }
    backward(params, t, delta, weight, g);
  }
  return g;
}

std::vector<double> risk_gradient(const ParamVector& params, const Dataset& sample) {
  std::vector<std::size_t> rows(sample.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return risk_gradient(params, sample, rows);
}

std::vector<double> grad(const ParamVector& params, const Dataset& sample,
                         std::span<const std::size_t> rows, LossKind kind) {
  if (kind != LossKind::BoundedCrossEntropy) {
    throw std::invalid_argument("the 01-loss is not differentiable; use BoundedCrossEntropy");
  }
  return risk_gradient(params, sample, rows);
}

// ---------------------------------------------------------------- path norm

namespace {

// Forward pass of the squared network on the all-ones input; returns the
// input of every layer plus the final output. All values are ≥ 0 so the
// leaky-ReLU acts as the identity.
std::vector<std::vector<double>> squared_trace(const ParamVector& params) {
  const auto& arch = params.architecture();
  std::vector<std::vector<double>> acts;
  acts.emplace_back(arch.input_dim(), 1.0);
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    const auto& shape = arch.layers[i];
    const auto w = params.weights(i);
    const auto b = params.biases(i);
    const auto& in = acts.back();
    std::vector<double> out(shape.output_dim, 0.0);
    for (std::size_t o = 0; o < shape.output_dim; ++o) {
      double acc = b.empty() ? 0.0 : b[o] * b[o];
      const double* row = w.data() + o * shape.input_dim;
      for (std::size_t k = 0; k < shape.input_dim; ++k) acc += row[k] * row[k] * in[k];
      out[o] = acc;
    }
    acts.push_back(std::move(out));
  }
  return acts;
}

}  // namespace

std::vector<double> forward_squared_allones(const ParamVector& params) {
  if (params.size() == 0) throw std::invalid_argument("empty parameter vector");
  return squared_trace(params).back();
}

std::vector<double> squared_allones_gradient(const ParamVector& params) {
  const auto acts = squared_trace(params);
  const auto& arch = params.architecture();
  const auto& slices = params.slices();
  std::vector<double> g(params.size(), 0.0);
  std::vector<double> upstream(arch.num_labels(), 1.0);
  for (std::size_t i = arch.layers.size(); i-- > 0;) {
    const auto& shape = arch.layers[i];
    const auto& s = slices[i];
    const auto w = params.weights(i);
    const auto b = params.biases(i);
    const auto& in = acts[i];
    std::vector<double> prev(shape.input_dim, 0.0);
    for (std::size_t o = 0; o < shape.output_dim; ++o) {
      const double u = upstream[o];
      const double* row = w.data() + o * shape.input_dim;
      for (std::size_t k = 0; k < shape.input_dim; ++k) {
        g[s.weight_offset + o * shape.input_dim + k] += u * 2.0 * row[k] * in[k];
        prev[k] += u * row[k] * row[k];
      }
      if (s.bias_count) g[s.bias_offset + o] += u * 2.0 * b[o];
    }
    upstream.swap(prev);
  }
  return g;
}

ParamVector rescale_layer_pair(const ParamVector& params, std::size_t layer, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("rescaling factor must be > 0");
  if (layer + 1 >= params.num_layers()) throw std::out_of_range("layer pair out of range");
  ParamVector out = params;
  for (double& w : out.weights(layer)) w *= c;
  for (double& b : out.biases(layer)) b *= c;
  for (double& w : out.weights(layer + 1)) w /= c;
  return out;
}

}  // namespace pacgibbs
