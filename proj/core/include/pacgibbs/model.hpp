#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "pacgibbs/dataset.hpp"

namespace pacgibbs {

struct LayerShape {
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  bool has_bias = true;

  bool operator==(const LayerShape&) const = default;
};

/// Fully connected network: leaky-ReLU between layers, softmax at the end.
struct Architecture {
  std::vector<LayerShape> layers;
  double leaky_slope = 0.01;

  static Architecture mlp(std::size_t input_dim, std::span<const std::size_t> hidden,
                          std::size_t num_labels, bool bias = true, double leaky_slope = 0.01);

  void validate() const;
  std::size_t input_dim() const { return layers.front().input_dim; }
  std::size_t num_labels() const { return layers.back().output_dim; }
  std::size_t param_count() const;

  bool operator==(const Architecture&) const = default;
};

/// Index ranges of one layer inside the flat parameter vector. Weights are
/// stored row-major as output_dim × input_dim, followed by the biases.
struct LayerSlice {
  std::size_t weight_offset = 0;
  std::size_t weight_count = 0;
  std::size_t bias_offset = 0;
  std::size_t bias_count = 0;

  std::size_t begin() const { return weight_offset; }
  std::size_t end() const { return bias_offset + bias_count; }
  std::size_t count() const { return weight_count + bias_count; }
};

/// Flat hypothesis weights w ∈ R^d plus the layer layout they belong to.
/// The layout is shared between copies.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(Architecture arch);
  ParamVector(Architecture arch, std::vector<double> values);

  const Architecture& architecture() const { return layout_->arch; }
  const std::vector<LayerSlice>& slices() const { return layout_->slices; }
  std::size_t num_layers() const { return layout_->slices.size(); }

  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  /// Weights and biases of layer i as one contiguous group.
  std::span<const double> layer(std::size_t i) const;
  std::span<const double> weights(std::size_t i) const;
  std::span<double> weights(std::size_t i);
  std::span<const double> biases(std::size_t i) const;
  std::span<double> biases(std::size_t i);

  bool same_layout(const ParamVector& other) const;
  /// Throws std::invalid_argument when layouts differ.
  void require_same_layout(const ParamVector& other, const char* what) const;

  bool operator==(const ParamVector& other) const;

 private:
  struct Layout {
    Architecture arch;
    std::vector<LayerSlice> slices;
  };
  std::shared_ptr<const Layout> layout_;
  std::vector<double> values_;
};

enum class LossKind { ZeroOne, BoundedCrossEntropy };

/// Glorot-uniform weights, biases uniform in ±1/√fan_in. Deterministic in seed.
ParamVector init_params(const Architecture& arch, std::uint64_t seed);

/// Pre-softmax outputs.
std::vector<double> logits(const ParamVector& params, std::span<const double> x);

/// Softmax class probabilities.
std::vector<double> forward(const ParamVector& params, std::span<const double> x);

/// ZeroOne: I[argmax ≠ y] (ties go to the lowest index).
/// BoundedCrossEntropy: −¼ ln(e⁻⁴ + (1 − 2e⁻⁴)·p[y]).
double loss(LossKind kind, std::span<const double> prediction, int y);

double empirical_risk(const ParamVector& params, const Dataset& sample, LossKind kind);
double empirical_risk(const ParamVector& params, const Dataset& sample,
                      std::span<const std::size_t> rows, LossKind kind);

/// Exact gradient of the mean bounded cross-entropy over the listed rows.
std::vector<double> risk_gradient(const ParamVector& params, const Dataset& sample,
                                  std::span<const std::size_t> rows);
/// Overload over every row of `sample`.
std::vector<double> risk_gradient(const ParamVector& params, const Dataset& sample);

/// Gradient request for an arbitrary loss kind; throws std::invalid_argument
/// for ZeroOne, which is not differentiable.
std::vector<double> grad(const ParamVector& params, const Dataset& sample,
                         std::span<const std::size_t> rows, LossKind kind);

/// Network with every weight and bias squared, evaluated on the all-ones
/// input, without the final softmax.
std::vector<double> forward_squared_allones(const ParamVector& params);

/// Gradient of Σ_y forward_squared_allones(params)[y] w.r.t. params.
std::vector<double> squared_allones_gradient(const ParamVector& params);

/// Per-layer inputs (post-activation) and pre-activations of one example;
/// pre.back() holds the logits.
struct ForwardTrace {
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> pre;
};

void forward_trace(const ParamVector& params, std::span<const double> x, ForwardTrace& trace);

/// Backpropagates d(loss)/d(logits) through a trace, adding weight × the
/// parameter gradient into `grad_out`. When `input_grad` is given it receives
/// d(loss)/d(x), unscaled by `weight`.
void backward(const ParamVector& params, const ForwardTrace& trace, std::span<const double> delta,
              double weight, std::span<double> grad_out, std::vector<double>* input_grad = nullptr);

/// Multiplies layer i's weights and biases by c and layer i+1's weights by 1/c.
ParamVector rescale_layer_pair(const ParamVector& params, std::size_t layer, double c);

}  // namespace pacgibbs
