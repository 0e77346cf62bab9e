#include "pacgibbs/neural_complexity.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "nlohmann/json.hpp"
#include "pacgibbs/parallel.hpp"

namespace pacgibbs {

// ------------------------------------------------------------ gap dataset

std::vector<RatioRepetitions> scaled_gap_schedule(double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("schedule scale must be > 0");
  auto reps = [scale](double n) { return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(n * scale))); };
  std::vector<RatioRepetitions> out;
  for (double r : {0.99, 0.97, 0.95, 0.93}) out.push_back({r, reps(1000)});
  out.push_back({0.90, reps(120)});
  for (double r : {0.80, 0.70, 0.60, 0.50, 0.40, 0.30, 0.20, 0.10}) out.push_back({r, reps(110)});
  return out;
}

std::vector<GapDatasetEntry> build_gap_dataset(const Dataset& pool, const GapBuilderConfig& cfg,
                                               std::uint64_t seed) {
  struct Job {
    double ratio;
    std::size_t index;
  };
  std::vector<Job> jobs;
  for (const auto& item : cfg.schedule) {
    if (!(item.val_ratio > 0.0 && item.val_ratio < 1.0)) {
      throw std::invalid_argument("validation ratio must lie in (0,1)");
    }
    for (std::size_t r = 0; r < item.repetitions; ++r) jobs.push_back({item.val_ratio, jobs.size()});
  }
  if (jobs.empty()) return {};

  for (const auto& job : jobs) {
    const auto n_val = static_cast<std::size_t>(std::llround(job.ratio * static_cast<double>(pool.size())));
    if (n_val == 0 || n_val >= pool.size()) {
      throw std::invalid_argument("pool of " + std::to_string(pool.size()) + " examples is too small for ratio " +
                                  std::to_string(job.ratio));
    }
  }

  std::vector<std::vector<GapDatasetEntry>> per_job(jobs.size());
  parallel_for(jobs.size(), cfg.threads, [&](std::size_t j) {
    const Job& job = jobs[j];
    const std::uint64_t job_seed = derive_seed(seed, stream::kRun, job.index);
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(job_seed, stream::kSplit));
    std::shuffle(order.begin(), order.end(), rng);
    const auto n_val = static_cast<std::size_t>(std::llround(job.ratio * static_cast<double>(pool.size())));
    const Dataset val = pool.subset(std::span<const std::size_t>(order).first(n_val));
    const Dataset train = pool.subset(std::span<const std::size_t>(order).subspan(n_val));

    SgldConfig sgd = cfg.sgd;
    sgd.seed = derive_seed(job_seed, stream::kNoise);
    const ParamVector init = init_params(cfg.arch, derive_seed(job_seed, stream::kInit));
    RiskObjective objective(train);
    auto& out = per_job[j];
    sgd_run(init, objective, sgd, std::nullopt, cfg.min_iterations, [&](const EpochSnapshot& snap) {
      const double r_val = empirical_risk(snap.params, val, LossKind::BoundedCrossEntropy);
      const double r_train = empirical_risk(snap.params, train, LossKind::BoundedCrossEntropy);
      out.push_back({snap.params, std::abs(r_val - r_train), job.ratio});
    });
  });

  std::vector<GapDatasetEntry> entries;
  for (auto& chunk : per_job) {
    for (auto& e : chunk) entries.push_back(std::move(e));
  }
  return entries;
}

// ------------------------------------------------------------ rebalancing

Rebalancing rebalance_bins(std::span<const double> gaps, std::size_t bins, double min_frac) {
  if (gaps.empty()) throw std::invalid_argument("cannot rebalance an empty dataset");
  if (bins == 0) throw std::invalid_argument("bin count must be >= 1");
  const auto [lo_it, hi_it] = std::minmax_element(gaps.begin(), gaps.end());
  const double lo = *lo_it, hi = *hi_it;
  const std::size_t n = gaps.size();

  std::vector<std::vector<std::size_t>> hist(hi > lo ? bins : 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t b = 0;
    if (hi > lo) {
      b = static_cast<std::size_t>((gaps[i] - lo) / (hi - lo) * static_cast<double>(bins));
      b = std::min(b, bins - 1);
    }
    hist[b].push_back(i);
  }

  const double threshold = min_frac * static_cast<double>(n);
  bool changed = true;
  while (changed && hist.size() > 1) {
    changed = false;
    for (std::size_t b = 0; b < hist.size(); ++b) {
      if (static_cast<double>(hist[b].size()) >= threshold) continue;
      const std::size_t target = b + 1 < hist.size() ? b + 1 : b - 1;
      auto& dst = hist[target];
      dst.insert(dst.end(), hist[b].begin(), hist[b].end());
      hist.erase(hist.begin() + static_cast<std::ptrdiff_t>(b));
      changed = true;
      break;
    }
  }

  Rebalancing rb;
  rb.weights.assign(n, 0.0);
  rb.bin_of.assign(n, 0);
  for (auto& bin : hist) {
    if (bin.empty()) continue;
    std::sort(bin.begin(), bin.end());
    rb.bins.push_back(std::move(bin));
  }
  const double n_bins = static_cast<double>(rb.bins.size());
  for (std::size_t b = 0; b < rb.bins.size(); ++b) {
    const double w = 1.0 / (n_bins * static_cast<double>(rb.bins[b].size()));
    for (std::size_t i : rb.bins[b]) {
      rb.weights[i] = w;
      rb.bin_of[i] = b;
    }
  }
  return rb;
}

std::vector<std::size_t> sample_rebalanced(const Rebalancing& rb, std::size_t count, Rng& rng) {
  std::discrete_distribution<std::size_t> dist(rb.weights.begin(), rb.weights.end());
  std::vector<std::size_t> out(count);
  for (auto& i : out) i = dist(rng);
  return out;
}

// ------------------------------------------------------------ predictor

void PredictorConfig::validate() const {
  if (hidden_layers < 1 || width < 1 || batch_size < 1 || epochs < 1 || bins < 1) {
    throw std::invalid_argument("predictor sizes must be positive");
  }
  if (!(adam_lr > 0.0)) throw std::invalid_argument("predictor adam_lr must be > 0");
  if (!(val_ratio > 0.0 && val_ratio < 1.0)) throw std::invalid_argument("predictor val_ratio must lie in (0,1)");
  if (!(min_bin_frac > 0.0)) throw std::invalid_argument("predictor min_bin_frac must be > 0");
  if (!(bn_momentum > 0.0 && bn_momentum <= 1.0)) throw std::invalid_argument("bn_momentum must lie in (0,1]");
  if (!(bn_eps >= 0.0)) throw std::invalid_argument("bn_eps must be >= 0");
}

namespace {

constexpr double kVarianceFloor = 1e-12;

}  // namespace

GapPredictor::GapPredictor(std::size_t input_dim, const PredictorConfig& cfg, std::uint64_t seed)
    : input_dim_(input_dim), momentum_(cfg.bn_momentum), eps_(cfg.bn_eps) {
  cfg.validate();
  if (input_dim == 0) throw std::invalid_argument("predictor input dimension must be >= 1");
  gamma_.assign(input_dim, 1.0);
  beta_.assign(input_dim, 0.0);
  running_mean_.assign(input_dim, 0.0);
  running_var_.assign(input_dim, 1.0);
  std::vector<std::size_t> hidden(cfg.hidden_layers, cfg.width);
  net_ = init_params(Architecture::mlp(input_dim, hidden, 1), seed);
}

std::vector<double> GapPredictor::normalized_input(std::span<const double> params) const {
  if (params.size() != input_dim_) {
    throw std::invalid_argument("predictor expects " + std::to_string(input_dim_) + " parameters, got " +
                                std::to_string(params.size()));
  }
  double norm = 0.0;
  for (double v : params) norm += v * v;
  norm = std::sqrt(norm);
  std::vector<double> x(params.begin(), params.end());
  if (norm > 0.0) {
    for (double& v : x) v /= norm;
  }
  return x;
}

double GapPredictor::predict(std::span<const double> params) const {
  auto x = normalized_input(params);
  for (std::size_t j = 0; j < input_dim_; ++j) {
    const double inv_std = 1.0 / std::sqrt(std::max(running_var_[j] + eps_, kVarianceFloor));
    x[j] = gamma_[j] * (x[j] - running_mean_[j]) * inv_std + beta_[j];
  }
  const double z = logits(net_, x)[0];
  return z * z;
}

std::vector<double> GapPredictor::input_gradient(std::span<const double> params) const {
  const auto x = normalized_input(params);
  std::vector<double> bn(input_dim_), scale(input_dim_);
  for (std::size_t j = 0; j < input_dim_; ++j) {
    scale[j] = gamma_[j] / std::sqrt(std::max(running_var_[j] + eps_, kVarianceFloor));
    bn[j] = (x[j] - running_mean_[j]) * scale[j] + beta_[j];
  }
  ForwardTrace trace;
  forward_trace(net_, bn, trace);
  const double z = trace.pre.back()[0];
  const double delta = 2.0 * z;
  std::vector<double> scratch(net_.size(), 0.0);
  std::vector<double> d_bn;
  backward(net_, trace, std::span<const double>(&delta, 1), 1.0, scratch, &d_bn);

  double norm = 0.0;
  for (double v : params) norm += v * v;
  norm = std::sqrt(norm);
  std::vector<double> grad(input_dim_, 0.0);
  if (norm == 0.0) return grad;
  // x = w/‖w‖ ⇒ dw = (dx − x (x·dx)) / ‖w‖.
  std::vector<double> dx(input_dim_);
  double dot = 0.0;
  for (std::size_t j = 0; j < input_dim_; ++j) {
    dx[j] = d_bn[j] * scale[j];
    dot += dx[j] * x[j];
  }
  for (std::size_t j = 0; j < input_dim_; ++j) grad[j] = (dx[j] - x[j] * dot) / norm;
  return grad;
}

std::size_t GapPredictor::trainable_count() const { return net_.size() + 2 * input_dim_; }

double GapPredictor::train_step(std::span<const std::span<const double>> inputs, std::span<const double> targets,
                                AdamState& adam) {
  const std::size_t B = inputs.size();
  if (B == 0 || targets.size() != B) throw std::invalid_argument("train_step: empty or mismatched batch");
  const std::size_t d = input_dim_;

  std::vector<std::vector<double>> x(B);
  for (std::size_t i = 0; i < B; ++i) x[i] = normalized_input(inputs[i]);

  std::vector<double> mean(d, 0.0), var(d, 0.0);
  for (const auto& xi : x) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += xi[j];
  }
  for (double& v : mean) v /= static_cast<double>(B);
  for (const auto& xi : x) {
    for (std::size_t j = 0; j < d; ++j) var[j] += (xi[j] - mean[j]) * (xi[j] - mean[j]);
  }
  std::vector<double> biased(d), inv_std(d);
  for (std::size_t j = 0; j < d; ++j) {
    biased[j] = var[j] / static_cast<double>(B);
    inv_std[j] = 1.0 / std::sqrt(std::max(biased[j] + eps_, kVarianceFloor));
  }

  std::vector<std::vector<double>> x_hat(B, std::vector<double>(d));
  std::vector<double> grad(trainable_count(), 0.0);
  std::span<double> g_net(grad.data(), net_.size());
  std::span<double> g_gamma(grad.data() + net_.size(), d);
  std::span<double> g_beta(grad.data() + net_.size() + d, d);

  double mae = 0.0;
  ForwardTrace trace;
  std::vector<double> bn(d), d_bn;
  for (std::size_t i = 0; i < B; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      x_hat[i][j] = (x[i][j] - mean[j]) * inv_std[j];
      bn[j] = gamma_[j] * x_hat[i][j] + beta_[j];
    }
    forward_trace(net_, bn, trace);
    const double z = trace.pre.back()[0];
    const double err = z * z - targets[i];
    mae += std::abs(err);
    const double sign = err > 0.0 ? 1.0 : (err < 0.0 ? -1.0 : 0.0);
    const double delta = sign * 2.0 * z / static_cast<double>(B);
    backward(net_, trace, std::span<const double>(&delta, 1), 1.0, g_net, &d_bn);
    for (std::size_t j = 0; j < d; ++j) {
      g_gamma[j] += d_bn[j] * x_hat[i][j];
      g_beta[j] += d_bn[j];
    }
  }
  mae /= static_cast<double>(B);

  for (std::size_t j = 0; j < d; ++j) {
    const double unbiased = B > 1 ? var[j] / static_cast<double>(B - 1) : biased[j];
    running_mean_[j] = (1.0 - momentum_) * running_mean_[j] + momentum_ * mean[j];
    running_var_[j] = (1.0 - momentum_) * running_var_[j] + momentum_ * unbiased;
  }

  const auto update = adam_step(adam, grad);
  auto net = net_.values();
  for (std::size_t k = 0; k < net.size(); ++k) net[k] += update[k];
  for (std::size_t j = 0; j < d; ++j) {
    gamma_[j] += update[net.size() + j];
    beta_[j] += update[net.size() + d + j];
  }
  return mae;
}

namespace {

constexpr char kMagic[4] = {'P', 'G', 'N', 'P'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <class T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw std::runtime_error("truncated predictor checkpoint");
  return v;
}
void put_vec(std::ostream& out, const std::vector<double>& v) {
  put<std::uint64_t>(out, v.size());
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}
std::vector<double> get_vec(std::istream& in, std::size_t expected) {
  const auto n = get<std::uint64_t>(in);
  if (n != expected) throw std::runtime_error("predictor checkpoint layout mismatch");
  std::vector<double> v(n);
  if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)))) {
    throw std::runtime_error("truncated predictor checkpoint");
  }
  return v;
}

}  // namespace

// Layout: magic "PGNP", u32 version, u64 input_dim, u64 layer count, then per
// layer (u64 in, u64 out, u8 bias), f64 slope, f64 momentum, f64 eps, then the
// length-prefixed f64 arrays gamma, beta, running mean, running var, network.
void GapPredictor::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write predictor checkpoint " + path.string());
  out.write(kMagic, 4);
  put(out, kVersion);
  put<std::uint64_t>(out, input_dim_);
  const auto& arch = net_.architecture();
  put<std::uint64_t>(out, arch.layers.size());
  for (const auto& l : arch.layers) {
    put<std::uint64_t>(out, l.input_dim);
    put<std::uint64_t>(out, l.output_dim);
    put<std::uint8_t>(out, l.has_bias ? 1 : 0);
  }
  put(out, arch.leaky_slope);
  put(out, momentum_);
  put(out, eps_);
  put_vec(out, gamma_);
  put_vec(out, beta_);
  put_vec(out, running_mean_);
  put_vec(out, running_var_);
  put_vec(out, std::vector<double>(net_.values().begin(), net_.values().end()));
}

GapPredictor GapPredictor::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open predictor checkpoint " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error(path.string() + ": not a predictor checkpoint");
  }
  if (get<std::uint32_t>(in) != kVersion) throw std::runtime_error(path.string() + ": unsupported checkpoint version");
  GapPredictor p;
  p.input_dim_ = get<std::uint64_t>(in);
  Architecture arch;
  const auto layers = get<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < layers; ++i) {
    LayerShape l;
    l.input_dim = get<std::uint64_t>(in);
    l.output_dim = get<std::uint64_t>(in);
    l.has_bias = get<std::uint8_t>(in) != 0;
    arch.layers.push_back(l);
  }
  arch.leaky_slope = get<double>(in);
  p.momentum_ = get<double>(in);
  p.eps_ = get<double>(in);
  p.gamma_ = get_vec(in, p.input_dim_);
  p.beta_ = get_vec(in, p.input_dim_);
  p.running_mean_ = get_vec(in, p.input_dim_);
  p.running_var_ = get_vec(in, p.input_dim_);
  arch.validate();
  if (arch.input_dim() != p.input_dim_) throw std::runtime_error("predictor checkpoint layout mismatch");
  p.net_ = ParamVector(arch, get_vec(in, arch.param_count()));
  return p;
}

// ------------------------------------------------------------ training

TrainedPredictor train_predictor(const std::vector<GapDatasetEntry>& dataset, const PredictorConfig& cfg) {
  cfg.validate();
  if (dataset.size() < 2) throw std::invalid_argument("predictor training needs at least two entries");
  const ParamVector& first = dataset.front().params;
  for (const auto& e : dataset) {
    first.require_same_layout(e.params, "gap dataset");
    if (!std::isfinite(e.gap)) throw std::invalid_argument("gap dataset contains a non-finite gap");
  }

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(cfg.seed, stream::kSplit));
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_val = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(cfg.val_ratio * static_cast<double>(dataset.size()))));
  if (n_val >= dataset.size() || dataset.size() - n_val < cfg.batch_size) {
    throw std::invalid_argument("gap dataset of " + std::to_string(dataset.size()) +
                                " entries is smaller than one training batch after the validation split");
  }
  const std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  const std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

  std::vector<double> train_gaps;
  for (std::size_t i : train) train_gaps.push_back(dataset[i].gap);
  const Rebalancing rb = rebalance_bins(train_gaps, cfg.bins, cfg.min_bin_frac);

  TrainedPredictor result;
  GapPredictor model(first.size(), cfg, derive_seed(cfg.seed, stream::kInit));
  AdamState adam(model.trainable_count(), cfg.adam_lr);
  Rng sample_rng(derive_seed(cfg.seed, stream::kShuffle));

  auto val_mae = [&](const GapPredictor& p) {
    double total = 0.0;
    for (std::size_t i : val) total += std::abs(p.predict(dataset[i].params) - dataset[i].gap);
    return total / static_cast<double>(val.size());
  };

  result.best_val_mae = std::numeric_limits<double>::infinity();
  std::vector<std::span<const double>> inputs;
  std::vector<double> targets;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto draws = sample_rebalanced(rb, train.size(), sample_rng);
    for (std::size_t start = 0; start + cfg.batch_size <= draws.size(); start += cfg.batch_size) {
      inputs.clear();
      targets.clear();
      for (std::size_t k = start; k < start + cfg.batch_size; ++k) {
        const auto& e = dataset[train[draws[k]]];
        inputs.push_back(e.params.values());
        targets.push_back(e.gap);
      }
      model.train_step(inputs, targets, adam);
    }
    const double mae = val_mae(model);
    result.val_mae.push_back(mae);
    if (mae < result.best_val_mae) {
      result.best_val_mae = mae;
      result.best_epoch = epoch;
      result.predictor = model;
    }
  }
  return result;
}

double predict_gap(const GapPredictor& predictor, const ParamVector& params) {
  return predictor.predict(params.values());
}

// ------------------------------------------------------------ persistence

void save_gap_dataset(const std::vector<GapDatasetEntry>& entries, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write gap dataset " + path.string());
  for (const auto& e : entries) {
    nlohmann::json j;
    j["gap"] = e.gap;
    j["split_ratio"] = e.split_ratio;
    j["params"] = std::vector<double>(e.params.values().begin(), e.params.values().end());
    out << j.dump() << '\n';
  }
}

std::vector<GapDatasetEntry> load_gap_dataset(const std::filesystem::path& path, const Architecture& arch) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open gap dataset " + path.string());
  std::vector<GapDatasetEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back({ParamVector(arch, j.at("params").get<std::vector<double>>()), j.at("gap").get<double>(),
                     j.at("split_ratio").get<double>()});
    } catch (const std::exception& ex) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace pacgibbs
