#include "pacgibbs/complexity.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pacgibbs {

std::string to_string(NormKind kind) {
  switch (kind) {
    case NormKind::DistFro: return "dist_fro";
    case NormKind::DistL2: return "dist_l2";
    case NormKind::ParNorm: return "par_norm";
    case NormKind::PathNorm: return "path_norm";
    case NormKind::SumFro: return "sum_fro";
    case NormKind::Gap: return "gap";
  }
  return "?";
}

std::string to_string(MuFamily family) {
  switch (family) {
    case MuFamily::EmpRisk: return "emp_risk";
    case MuFamily::Regularized: return "regularized";
    case MuFamily::DistanceToRef: return "distance_to_ref";
    case MuFamily::Neural: return "neural";
  }
  return "?";
}

NormKind parse_norm_kind(const std::string& name) {
  for (NormKind k : {NormKind::DistFro, NormKind::DistL2, NormKind::ParNorm, NormKind::PathNorm, NormKind::SumFro,
                     NormKind::Gap}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown norm kind '" + name + "'");
}

MuFamily parse_mu_family(const std::string& name) {
  for (MuFamily f : {MuFamily::EmpRisk, MuFamily::Regularized, MuFamily::DistanceToRef, MuFamily::Neural}) {
    if (to_string(f) == name) return f;
  }
  throw std::invalid_argument("unknown mu family '" + name + "'");
}

namespace {

double sq_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

const Dataset& require_sample(const EvalData& data) {
  if (!data.sample || data.sample->empty()) throw std::invalid_argument("parametric function needs a nonempty sample");
  return *data.sample;
}

const Dataset& require_test(const EvalData& data) {
  if (!data.test || data.test->empty()) throw std::invalid_argument("Gap requires a nonempty test sample T");
  return *data.test;
}

double risk_on(const ParamVector& params, const Dataset& ds, std::span<const std::size_t> rows) {
  return rows.empty() ? empirical_risk(params, ds, LossKind::BoundedCrossEntropy)
                      : empirical_risk(params, ds, rows, LossKind::BoundedCrossEntropy);
}

std::vector<double> risk_grad_on(const ParamVector& params, const Dataset& ds, std::span<const std::size_t> rows) {
  return rows.empty() ? risk_gradient(params, ds) : risk_gradient(params, ds, rows);
}

std::span<const std::size_t> s_rows(const EvalData& d) {
  return d.batch ? d.batch->s_rows : std::span<const std::size_t>{};
}
std::span<const std::size_t> t_rows(const EvalData& d) {
  return d.batch ? d.batch->t_rows : std::span<const std::size_t>{};
}

EvalData split_data(const DataSplit& split, const MiniBatch* batch) {
  return EvalData{&split.S, split.T.empty() ? nullptr : &split.T, batch};
}

void axpy(double a, std::span<const double> x, std::vector<double>& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

}  // namespace

double norm_value(NormKind kind, const ParamVector& params, const ParamVector& init_ref, const EvalData& data) {
  switch (kind) {
    case NormKind::DistFro: {
      params.require_same_layout(init_ref, "DistFro");
      double total = 0.0;
      for (std::size_t i = 0; i < params.num_layers(); ++i) total += dist(params.layer(i), init_ref.layer(i));
      return total;
    }
    case NormKind::DistL2:
      params.require_same_layout(init_ref, "DistL2");
      return dist(params.values(), init_ref.values());
    case NormKind::ParNorm: {
      double total = 0.0;
      for (std::size_t i = 0; i < params.num_layers(); ++i) total += sq_norm(params.layer(i));
      return total;
    }
    case NormKind::PathNorm: {
      const auto out = forward_squared_allones(params);
      return std::accumulate(out.begin(), out.end(), 0.0);
    }
    case NormKind::SumFro: {
      const auto L = static_cast<double>(params.num_layers());
      double log_sum = 0.0;
      for (std::size_t i = 0; i < params.num_layers(); ++i) {
        const double n = sq_norm(params.layer(i));
        if (n == 0.0) return 0.0;
        log_sum += std::log(n);
      }
      return L * std::exp(log_sum / L);
    }
    case NormKind::Gap: {
      const Dataset& test = require_test(data);
      const Dataset& sample = require_sample(data);
      return std::abs(risk_on(params, test, t_rows(data)) - risk_on(params, sample, s_rows(data)));
    }
  }
  throw std::invalid_argument("unknown norm kind");
}

double norm_value(NormKind kind, const ParamVector& params, const ParamVector& init_ref, const DataSplit& split,
                  const MiniBatch* batch) {
  return norm_value(kind, params, init_ref, split_data(split, batch));
}

std::vector<double> norm_gradient(NormKind kind, const ParamVector& params, const ParamVector& init_ref,
                                  const EvalData& data) {
  std::vector<double> g(params.size(), 0.0);
  switch (kind) {
    case NormKind::DistFro: {
      params.require_same_layout(init_ref, "DistFro");
      for (std::size_t i = 0; i < params.num_layers(); ++i) {
        const double d = dist(params.layer(i), init_ref.layer(i));
        if (d == 0.0) continue;
        const auto& s = params.slices()[i];
        for (std::size_t k = s.begin(); k < s.end(); ++k) g[k] = (params[k] - init_ref[k]) / d;
      }
      return g;
    }
    case NormKind::DistL2: {
      params.require_same_layout(init_ref, "DistL2");
      const double d = dist(params.values(), init_ref.values());
      if (d == 0.0) return g;
      for (std::size_t k = 0; k < g.size(); ++k) g[k] = (params[k] - init_ref[k]) / d;
      return g;
    }
    case NormKind::ParNorm:
      for (std::size_t k = 0; k < g.size(); ++k) g[k] = 2.0 * params[k];
      return g;
    case NormKind::PathNorm:
      return squared_allones_gradient(params);
    case NormKind::SumFro: {
      const double value = norm_value(kind, params, init_ref, data);
      if (value == 0.0) return g;
      const auto L = static_cast<double>(params.num_layers());
      for (std::size_t i = 0; i < params.num_layers(); ++i) {
        const double n = sq_norm(params.layer(i));
        const auto& s = params.slices()[i];
        for (std::size_t k = s.begin(); k < s.end(); ++k) g[k] = 2.0 * value * params[k] / (L * n);
      }
      return g;
    }
    case NormKind::Gap: {
      const Dataset& test = require_test(data);
      const Dataset& sample = require_sample(data);
      const double diff = risk_on(params, test, t_rows(data)) - risk_on(params, sample, s_rows(data));
      const double sg = sign(diff);
      if (sg == 0.0) return g;
      axpy(sg, risk_grad_on(params, test, t_rows(data)), g);
      axpy(-sg, risk_grad_on(params, sample, s_rows(data)), g);
      return g;
    }
  }
  throw std::invalid_argument("unknown norm kind");
}

void MuSpec::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("mu alpha must be finite and >= 0");
  if (beta.has_value() != (family == MuFamily::Regularized)) {
    throw std::invalid_argument("mu beta must be set exactly for the regularized family");
  }
  if (beta && !(*beta >= 0.0 && *beta <= 1.0)) throw std::invalid_argument("mu beta must lie in [0,1]");
  if (sgd_ref.has_value() != (family == MuFamily::DistanceToRef)) {
    throw std::invalid_argument("mu sgd_ref must be set exactly for the distance_to_ref family");
  }
  switch (family) {
    case MuFamily::EmpRisk: break;
    case MuFamily::Regularized:
      if (!norm) throw std::invalid_argument("regularized mu needs a norm kind");
      break;
    case MuFamily::DistanceToRef:
      if (!norm && !predictor) throw std::invalid_argument("distance_to_ref mu needs a norm kind or a gap predictor");
      break;
    case MuFamily::Neural:
      if (!predictor) throw std::invalid_argument("neural mu needs a trained gap predictor");
      break;
  }
  if (norm && (*norm == NormKind::DistFro || *norm == NormKind::DistL2) && init_ref.size() == 0) {
    throw std::invalid_argument("distance norms need the initialization reference");
  }
}

namespace {

// f(h) of the DistanceToRef family.
double reference_measure(const MuSpec& spec, const ParamVector& params, const EvalData& data) {
  if (spec.norm) return norm_value(*spec.norm, params, spec.init_ref, data);
  return predict_gap(*spec.predictor, params);
}

std::vector<double> reference_measure_gradient(const MuSpec& spec, const ParamVector& params, const EvalData& data) {
  if (spec.norm) return norm_gradient(*spec.norm, params, spec.init_ref, data);
  return spec.predictor->input_gradient(params.values());
}

}  // namespace

double mu_value(const MuSpec& spec, const ParamVector& params, const EvalData& data) {
  spec.validate();
  switch (spec.family) {
    case MuFamily::EmpRisk:
      return spec.alpha * risk_on(params, require_sample(data), s_rows(data));
    case MuFamily::Regularized: {
      const double b = *spec.beta;
      const double risk = risk_on(params, require_sample(data), s_rows(data));
      return spec.alpha * (b * risk + (1.0 - b) * norm_value(*spec.norm, params, spec.init_ref, data));
    }
    case MuFamily::DistanceToRef:
      params.require_same_layout(*spec.sgd_ref, "distance_to_ref");
      return spec.alpha *
             std::abs(reference_measure(spec, params, data) - reference_measure(spec, *spec.sgd_ref, data));
    case MuFamily::Neural:
      return spec.alpha * predict_gap(*spec.predictor, params);
  }
  throw std::invalid_argument("unknown mu family");
}

double mu_value(const MuSpec& spec, const ParamVector& params, const DataSplit& split, const MiniBatch* batch) {
  return mu_value(spec, params, split_data(split, batch));
}

std::vector<double> mu_gradient(const MuSpec& spec, const ParamVector& params, const EvalData& data) {
  spec.validate();
  std::vector<double> g(params.size(), 0.0);
  switch (spec.family) {
    case MuFamily::EmpRisk:
      axpy(spec.alpha, risk_grad_on(params, require_sample(data), s_rows(data)), g);
      return g;
    case MuFamily::Regularized: {
      const double b = *spec.beta;
      if (b != 0.0) axpy(spec.alpha * b, risk_grad_on(params, require_sample(data), s_rows(data)), g);
      if (b != 1.0) axpy(spec.alpha * (1.0 - b), norm_gradient(*spec.norm, params, spec.init_ref, data), g);
      return g;
    }
    case MuFamily::DistanceToRef: {
      params.require_same_layout(*spec.sgd_ref, "distance_to_ref");
      const double diff = reference_measure(spec, params, data) - reference_measure(spec, *spec.sgd_ref, data);
      const double sg = sign(diff);
      if (sg != 0.0) axpy(spec.alpha * sg, reference_measure_gradient(spec, params, data), g);
      return g;
    }
    case MuFamily::Neural:
      axpy(spec.alpha, spec.predictor->input_gradient(params.values()), g);
      return g;
  }
  throw std::invalid_argument("unknown mu family");
}

void OmegaSpec::validate() const {
  switch (family) {
    case OmegaFamily::Uniform: break;
    case OmegaFamily::GibbsOnPriorSample:
      if (!mu) throw std::invalid_argument("prior-sample omega needs a wrapped mu");
      mu->validate();
      break;
    case OmegaFamily::ScaledRisk:
      if (!(alpha_prime >= 0.0)) throw std::invalid_argument("omega alpha_prime must be >= 0");
      break;
  }
}

double omega_value(const OmegaSpec& spec, const ParamVector& params, const DataSplit& split) {
  spec.validate();
  switch (spec.family) {
    case OmegaFamily::Uniform:
      return 0.0;
    case OmegaFamily::GibbsOnPriorSample:
      if (split.S_prime.empty()) throw std::invalid_argument("prior-sample omega with an empty prior sample S'");
      return mu_value(*spec.mu, params, EvalData{&split.S_prime, split.T.empty() ? nullptr : &split.T, nullptr});
    case OmegaFamily::ScaledRisk:
      if (spec.alpha_prime == 0.0) return 0.0;
      return spec.alpha_prime * empirical_risk(params, split.S, LossKind::BoundedCrossEntropy);
  }
  throw std::invalid_argument("unknown omega family");
}

MuObjective::MuObjective(MuSpec spec, const Dataset& sample, const Dataset* test, std::size_t test_batch)
    : spec_(std::move(spec)), sample_(sample), test_(test), test_batch_(test_batch) {
  spec_.validate();
  if (!(spec_.alpha > 0.0)) throw std::invalid_argument("sampling needs alpha > 0");
  if (sample_.empty()) throw std::invalid_argument("sampling objective over an empty sample");
  if (spec_.needs_test_sample() && (!test_ || test_->empty())) {
    throw std::invalid_argument("Gap requires a nonempty test sample T");
  }
}

double MuObjective::value(const ParamVector& params) const {
  return mu_value(spec_, params, EvalData{&sample_, test_, nullptr}) / spec_.alpha;
}

std::vector<double> MuObjective::gradient(const ParamVector& params, std::span<const std::size_t> batch,
                                          Rng& aux) const {
  std::vector<std::size_t> t_rows;
  if (spec_.needs_test_sample()) {
    std::uniform_int_distribution<std::size_t> pick(0, test_->size() - 1);
    t_rows.resize(std::min(test_batch_, test_->size()));
    for (auto& r : t_rows) r = pick(aux);
  }
  const MiniBatch mb{batch, t_rows};
  auto g = mu_gradient(spec_, params, EvalData{&sample_, test_, &mb});
  for (double& v : g) v /= spec_.alpha;
  return g;
}

}  // namespace pacgibbs
