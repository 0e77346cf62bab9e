#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pacgibbs/data.hpp"
#include "pacgibbs/model.hpp"
#include "pacgibbs/neural_complexity.hpp"
#include "pacgibbs/sampler.hpp"

namespace pacgibbs {

enum class NormKind { DistFro, DistL2, ParNorm, PathNorm, SumFro, Gap };

enum class MuFamily { EmpRisk, Regularized, DistanceToRef, Neural };

std::string to_string(NormKind kind);
std::string to_string(MuFamily family);
NormKind parse_norm_kind(const std::string& name);
MuFamily parse_mu_family(const std::string& name);

/// Mini-batch rows for the learning sample and, for Gap, the test sample.
struct MiniBatch {
  std::span<const std::size_t> s_rows;
  std::span<const std::size_t> t_rows;
};

/// Data a parametric function is evaluated on. `sample` is S (or S′ when a
/// prior function wraps μ); `test` is only read by Gap.
struct EvalData {
  const Dataset* sample = nullptr;
  const Dataset* test = nullptr;
  const MiniBatch* batch = nullptr;
};

/// Parametric function μ(h, S).
///  EmpRisk        α·R′_S(h)
///  Regularized    α(β·R′_S(h) + (1−β)·norm(h))
///  DistanceToRef  α|f(h) − f(h_SGD)|, f = norm, or the gap predictor when
///                 `norm` is empty
///  Neural         α·predict_gap(h)
struct MuSpec {
  MuFamily family = MuFamily::EmpRisk;
  std::optional<NormKind> norm;
  double alpha = 1.0;
  std::optional<double> beta;
  ParamVector init_ref;
  std::optional<ParamVector> sgd_ref;
  std::shared_ptr<const GapPredictor> predictor;

  void validate() const;
  bool needs_test_sample() const { return norm == NormKind::Gap; }
};

/// Norm or gap value; all norms except Gap ignore the data.
double norm_value(NormKind kind, const ParamVector& params, const ParamVector& init_ref, const EvalData& data);
double norm_value(NormKind kind, const ParamVector& params, const ParamVector& init_ref, const DataSplit& split,
                  const MiniBatch* batch = nullptr);

std::vector<double> norm_gradient(NormKind kind, const ParamVector& params, const ParamVector& init_ref,
                                  const EvalData& data);

double mu_value(const MuSpec& spec, const ParamVector& params, const EvalData& data);
double mu_value(const MuSpec& spec, const ParamVector& params, const DataSplit& split,
                const MiniBatch* batch = nullptr);

std::vector<double> mu_gradient(const MuSpec& spec, const ParamVector& params, const EvalData& data);

enum class OmegaFamily { Uniform, GibbsOnPriorSample, ScaledRisk };

/// Prior function ω(h) with P(h) ∝ exp(−ω(h)).
///  Uniform             0
///  GibbsOnPriorSample  μ(h, S′) with the wrapped μ
///  ScaledRisk          α′·R′_S(h)
struct OmegaSpec {
  OmegaFamily family = OmegaFamily::Uniform;
  std::optional<MuSpec> mu;
  double alpha_prime = 0.0;

  void validate() const;
};

double omega_value(const OmegaSpec& spec, const ParamVector& params, const DataSplit& split);

/// ν = μ/α as a sampler objective over `data.sample`; Gap mini-batches of the
/// test sample are drawn with the sampler's auxiliary generator.
class MuObjective final : public Objective {
 public:
  MuObjective(MuSpec spec, const Dataset& sample, const Dataset* test = nullptr, std::size_t test_batch = 64);

  std::size_t num_examples() const override { return sample_.size(); }
  double value(const ParamVector& params) const override;
  std::vector<double> gradient(const ParamVector& params, std::span<const std::size_t> batch,
                               Rng& aux) const override;

  const MuSpec& spec() const { return spec_; }

 private:
  MuSpec spec_;
  const Dataset& sample_;
  const Dataset* test_;
  std::size_t test_batch_;
};

}  // namespace pacgibbs
