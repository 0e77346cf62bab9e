#include "pacgibbs/experiment.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include "pacgibbs/bounds.hpp"
#include "pacgibbs/complexity.hpp"
#include "pacgibbs/kl.hpp"
#include "pacgibbs/parallel.hpp"
#include "pacgibbs/rng.hpp"
#include "pacgibbs/sampler.hpp"

namespace pacgibbs {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

Dataset truncate(Dataset d, std::size_t limit) {
  if (limit == 0 || limit >= d.size()) return d;
  d.labels.resize(limit);
  d.features.resize(limit * d.dim);
  return d;
}

bool uses_reference(MuFamily f) { return f == MuFamily::DistanceToRef || f == MuFamily::Neural; }

// Families with a fixed concentration α = m.
bool fixed_alpha(MuFamily f) { return uses_reference(f); }

std::shared_ptr<const GapPredictor> load_predictor(const MuConfig& cfg) {
  if (cfg.predictor_path.empty()) return nullptr;
  try {
    return std::make_shared<const GapPredictor>(GapPredictor::load(resolve_data_path(cfg.predictor_path)));
  } catch (const std::exception& ex) {
    throw ConfigError("mu.predictor", ex.what());
  }
}

struct PointContext {
  const ExperimentConfig* cfg;
  const DataSplit* split;
  const ParamVector* init;
  const ParamVector* uniform_prior;
  std::shared_ptr<const GapPredictor> predictor;
  double alpha;
  std::optional<double> beta;
  std::uint64_t seed;
};

struct PointResult {
  GibbsDraw post;
  double emp_risk = 0.0;
  double test_risk = 0.0;
  double mu_post = 0.0;
};

PointResult sample_posterior(const PointContext& ctx) {
  const auto& S = ctx.split->S;
  const auto& T = ctx.split->T;
  PointResult r{draw_gibbs(*ctx.cfg, S, T.empty() ? nullptr : &T, *ctx.init, ctx.alpha, ctx.beta,
                           derive_seed(ctx.seed, stream::kRun, 0), ctx.predictor)};
  r.emp_risk = empirical_risk(r.post.params, S, LossKind::ZeroOne);
  r.test_risk = T.empty() ? std::numeric_limits<double>::quiet_NaN()
                          : empirical_risk(r.post.params, T, LossKind::ZeroOne);
  r.mu_post = mu_value(r.post.spec, r.post.params, EvalData{&S, T.empty() ? nullptr : &T, nullptr});
  return r;
}

CertificateInput base_input(const PointContext& ctx, const PointResult& post) {
  CertificateInput in;
  in.m = ctx.split->m();
  in.m_prime = ctx.split->m_prime();
  in.delta = ctx.cfg->bound.delta;
  in.emp_risk = post.emp_risk;
  in.mu_post = post.mu_post;
  in.alpha = ctx.alpha;
  return in;
}

double mu_on_s(const PointContext& ctx, const MuSpec& spec, const ParamVector& h) {
  const auto& T = ctx.split->T;
  return mu_value(spec, h, EvalData{&ctx.split->S, T.empty() ? nullptr : &T, nullptr});
}

CertificateInput cor4_input(const PointContext& ctx, const PointResult& post) {
  CertificateInput in = base_input(ctx, post);
  in.mu_prior = mu_on_s(ctx, post.post.spec, *ctx.uniform_prior);
  return in;
}

// Informed prior: ω = μ(·, S′), h′ drawn from it by SGLD on S′. With an
// empty S′ this is the uniform prior and the certificate equals cor4.
CertificateInput cor5_input(const PointContext& ctx, const PointResult& post) {
  if (ctx.split->m_prime() == 0) return cor4_input(ctx, post);
  const auto& Sp = ctx.split->S_prime;
  const auto& T = ctx.split->T;
  GibbsDraw prior = draw_gibbs(*ctx.cfg, Sp, T.empty() ? nullptr : &T, *ctx.init, ctx.alpha, ctx.beta,
                               derive_seed(ctx.seed, stream::kRun, 1), ctx.predictor);
  OmegaSpec omega{OmegaFamily::GibbsOnPriorSample, prior.spec, 0.0};
  CertificateInput in = base_input(ctx, post);
  in.mu_prior = mu_on_s(ctx, post.post.spec, prior.params);
  in.omega_post = omega_value(omega, post.post.params, *ctx.split);
  in.omega_prior = omega_value(omega, prior.params, *ctx.split);
  return in;
}

// Baseline with P ∝ exp(−α′R′_S); the prior is chosen over the α grid.
std::pair<CertificateInput, Certificate> eq9_best(const PointContext& ctx, const PointResult& post,
                                                  const std::vector<double>& alpha_primes) {
  const auto& S = ctx.split->S;
  ExperimentConfig risk_cfg = *ctx.cfg;
  risk_cfg.mu.family = MuFamily::EmpRisk;
  risk_cfg.mu.norm.reset();
  const double r_post = empirical_risk(post.post.params, S, LossKind::BoundedCrossEntropy);
  std::optional<std::pair<CertificateInput, Certificate>> best;
  for (std::size_t k = 0; k < alpha_primes.size(); ++k) {
    GibbsDraw prior = draw_gibbs(risk_cfg, S, nullptr, *ctx.init, alpha_primes[k], std::nullopt,
                                 derive_seed(ctx.seed, stream::kPrior, k), nullptr);
    CertificateInput in = base_input(ctx, post);
    in.alpha_prime = alpha_primes[k];
    in.risk_prime_post = r_post;
    in.risk_prime_prior = empirical_risk(prior.params, S, LossKind::BoundedCrossEntropy);
    Certificate c = bound_eq9(in, ctx.cfg->bound.kl);
    if (!best || c.risk_upper < best->second.risk_upper) best.emplace(in, c);
  }
  return *best;
}

}  // namespace

TaskData load_task(const TaskConfig& cfg, std::uint64_t master_seed) {
  TaskData td;
  if (cfg.kind == TaskKind::Blobs) {
    const std::uint64_t seed = cfg.seed.value_or(derive_seed(master_seed, stream::kData, 0));
    BlobSpec spec;
    try {
      spec = cfg.blob_spec();
      spec.validate();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& ex) {
      throw ConfigError("task", ex.what());
    }
    auto task = std::make_shared<const SyntheticTask>(spec, seed);
    td.pool = task->pool();
    td.test = task->test();
    td.synthetic = task;
    return td;
  }
  td.pool = load_idx_dataset(resolve_data_path(cfg.train_images), resolve_data_path(cfg.train_labels));
  td.test = load_idx_dataset(resolve_data_path(cfg.test_images), resolve_data_path(cfg.test_labels));
  const std::size_t k = std::max(td.pool.num_classes, td.test.num_classes);
  td.pool.num_classes = td.test.num_classes = k;
  if (td.pool.dim != td.test.dim) throw ConfigError("task.test_images", "image size differs from the training set");
  td.pool = truncate(std::move(td.pool), cfg.pool_limit);
  td.test = truncate(std::move(td.test), cfg.test_limit);
  return td;
}

std::string mu_label(const MuConfig& cfg) {
  std::string s = to_string(cfg.family);
  if (cfg.family == MuFamily::Regularized || cfg.family == MuFamily::DistanceToRef) {
    s += ":" + (cfg.norm ? to_string(*cfg.norm) : std::string("neural"));
  }
  return s;
}

GibbsDraw draw_gibbs(const ExperimentConfig& cfg, const Dataset& sample, const Dataset* test,
                     const ParamVector& init, double alpha, std::optional<double> beta, std::uint64_t seed,
                     std::shared_ptr<const GapPredictor> predictor) {
  MuSpec spec;
  spec.family = cfg.mu.family;
  spec.norm = cfg.mu.norm;
  spec.alpha = alpha;
  if (spec.family == MuFamily::Regularized) spec.beta = beta.value_or(1.0);
  spec.init_ref = init;
  spec.predictor = std::move(predictor);

  ParamVector start = init;
  if (uses_reference(spec.family)) {
    Rng rng(derive_seed(seed, stream::kAux, 1));
    std::uniform_int_distribution<std::size_t> ep(cfg.mu.sgd_epochs_min, cfg.mu.sgd_epochs_max);
    const std::size_t epochs = ep(rng);
    SgldConfig sc = cfg.sampler;
    sc.alpha = alpha;
    sc.seed = derive_seed(seed, stream::kRun, 1);
    RiskObjective risk(sample);
    start = sgd_run(init, risk, sc, epochs);
    if (spec.family == MuFamily::DistanceToRef) spec.sgd_ref = start;
  }
  spec.validate();
  if (spec.family == MuFamily::DistanceToRef && spec.norm == NormKind::Gap && cfg.mu.skip_sgld_for_gap) {
    return {start, spec};
  }
  SgldConfig sc = cfg.sampler;
  sc.alpha = alpha;
  sc.seed = derive_seed(seed, stream::kRun, 2);
  MuObjective objective(spec, sample, spec.needs_test_sample() ? test : nullptr);
  ParamVector h = sgld_run(start, objective, sc);
  return {std::move(h), std::move(spec)};
}

std::vector<RunRecord> run_sweep(const ExperimentConfig& cfg, const SweepOptions& options) {
  const std::uint64_t master = options.seed.value_or(cfg.sweep.seed);
  const TaskData td = load_task(cfg.task, master);
  if (td.pool.empty()) throw ConfigError("task", "learning pool is empty");
  const Architecture arch = cfg.model.architecture(td.pool.dim, td.pool.num_classes);
  const auto predictor = load_predictor(cfg.mu);
  const std::string label = mu_label(cfg.mu);
  const bool regularized = cfg.mu.family == MuFamily::Regularized;

  std::vector<BoundFamily> families;
  for (BoundFamily f : cfg.bound.families) {
    const bool baseline = f == BoundFamily::Eq8 || f == BoundFamily::Eq9;
    if (baseline && cfg.mu.family != MuFamily::EmpRisk) continue;
    families.push_back(f);
  }

  struct Point {
    std::size_t rep, ratio_index, alpha_index;
    double alpha;
    std::optional<double> beta;
  };
  std::vector<Point> points;
  std::vector<std::vector<double>> grids(cfg.sweep.ratios.size());
  for (std::size_t ri = 0; ri < cfg.sweep.ratios.size(); ++ri) {
    const std::size_t n = td.pool.size();
    const auto m_prime = static_cast<std::size_t>(std::llround(cfg.sweep.ratios[ri] * static_cast<double>(n)));
    if (m_prime >= n) throw ConfigError("sweep.ratios", "ratio leaves an empty learning sample");
    const std::size_t m = n - m_prime;
    grids[ri] = fixed_alpha(cfg.mu.family) ? std::vector<double>{static_cast<double>(m)} : cfg.sweep.alphas(m);
  }
  for (std::size_t rep = 0; rep < cfg.sweep.repetitions; ++rep) {
    for (std::size_t ri = 0; ri < cfg.sweep.ratios.size(); ++ri) {
      for (std::size_t ai = 0; ai < grids[ri].size(); ++ai) {
        if (regularized) {
          for (double b : cfg.sweep.betas) points.push_back({rep, ri, ai, grids[ri][ai], b});
        } else {
          points.push_back({rep, ri, ai, grids[ri][ai], std::nullopt});
        }
      }
    }
  }

  std::vector<std::vector<RunRecord>> out(points.size());
  parallel_for(points.size(), cfg.sweep.threads, [&](std::size_t idx) {
    const Point& p = points[idx];
    const auto t0 = std::chrono::steady_clock::now();
    const double ratio = cfg.sweep.ratios[p.ratio_index];
    std::vector<RunRecord> recs;
    auto make = [&](BoundFamily f) {
      RunRecord r;
      r.seed = master;
      r.config_digest = cfg.digest;
      r.run_index = idx;
      r.repetition = p.rep;
      r.family = to_string(f);
      r.mu_family = label;
      r.alpha = p.alpha;
      r.alpha_index = p.alpha_index;
      r.beta = p.beta;
      r.ratio = ratio;
      return r;
    };
    try {
      const DataSplit split =
          split_dataset(td.pool, ratio, derive_seed(master, stream::kSplit, p.rep * 1024 + p.ratio_index), td.test);
      const ParamVector init = init_params(arch, derive_seed(master, stream::kInit, p.rep));
      const ParamVector uniform = init_params(arch, derive_seed(master, stream::kPrior, p.rep));
      PointContext ctx{&cfg, &split, &init, &uniform, predictor, p.alpha, p.beta,
                       derive_seed(master, stream::kRun, idx)};
      const PointResult post = sample_posterior(ctx);
      for (BoundFamily f : families) {
        RunRecord r = make(f);
        r.m = split.m();
        r.m_prime = split.m_prime();
        r.emp_risk = post.emp_risk;
        r.test_risk = post.test_risk;
        CertificateInput in;
        Certificate c;
        if (f == BoundFamily::Eq9) {
          std::tie(in, c) = eq9_best(ctx, post, grids[p.ratio_index]);
        } else {
          in = f == BoundFamily::Cor5 ? cor5_input(ctx, post) : cor4_input(ctx, post);
          c = certify(f, in, cfg.bound.kl);
        }
        r.alpha_prime = in.alpha_prime;
        r.mu_post = in.mu_post;
        r.mu_prior = in.mu_prior;
        r.omega_post = in.omega_post;
        r.omega_prior = in.omega_prior;
        r.tau = c.tau;
        r.tau_clamped = c.tau_clamped;
        r.risk_upper = c.risk_upper;
        recs.push_back(std::move(r));
      }
    } catch (const std::exception& ex) {
      recs.clear();
      for (BoundFamily f : families) {
        RunRecord r = make(f);
        r.status = "failed";
        r.error = ex.what();
        r.tau = std::numeric_limits<double>::quiet_NaN();
        r.risk_upper = std::numeric_limits<double>::quiet_NaN();
        recs.push_back(std::move(r));
      }
    }
    if (options.record_timing) {
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      for (auto& r : recs) r.wall_time_ms = ms;
    }
    out[idx] = std::move(recs);
  });

  std::vector<RunRecord> flat;
  for (auto& v : out) {
    for (auto& r : v) flat.push_back(std::move(r));
  }
  return flat;
}

ValidationReport run_validation(const ExperimentConfig& cfg, std::size_t trials, ForceTau force,
                                std::optional<std::uint64_t> seed) {
  if (cfg.task.kind != TaskKind::Blobs) {
    throw ConfigError("task.kind", "validate needs a synthetic task with a true-risk oracle");
  }
  if (trials == 0) throw ConfigError("validate.trials", "must be >= 1");
  const std::uint64_t master = seed.value_or(cfg.sweep.seed);
  const TaskData td = load_task(cfg.task, master);
  const SyntheticTask& task = *td.synthetic;
  const ValidateConfig& vc = cfg.validate;
  const std::size_t m = vc.m;
  const auto m_prime = static_cast<std::size_t>(std::llround(static_cast<double>(m) * vc.ratio / (1.0 - vc.ratio)));
  const std::size_t n = m + m_prime;
  const double split_ratio = static_cast<double>(m_prime) / static_cast<double>(n);

  ValidationReport rep;
  rep.trials = trials;
  rep.m = m;
  rep.m_prime = m_prime;
  rep.delta = cfg.bound.delta;
  try {
    rep.alpha = vc.resolve(vc.alpha, m, 0.0);
  } catch (const std::exception&) {
    throw ConfigError("validate.alpha", "expected a number, m or sqrt_m");
  }
  if (!(rep.alpha > 0.0)) throw ConfigError("validate.alpha", "must be > 0");

  const Architecture arch = cfg.model.architecture(task.spec().dim, task.spec().means.size());
  const auto predictor = load_predictor(cfg.mu);
  const std::optional<double> beta =
      cfg.mu.family == MuFamily::Regularized ? std::optional<double>(cfg.sweep.betas.front()) : std::nullopt;
  const std::vector<BoundFamily> families{BoundFamily::Cor4, BoundFamily::Cor5};

  std::vector<std::array<bool, 2>> violated(trials);
  parallel_for(trials, cfg.sweep.threads, [&](std::size_t t) {
    Dataset sample = task.sample(n, derive_seed(master, stream::kData, 100 + t));
    DataSplit split = split_dataset(sample, split_ratio, derive_seed(master, stream::kSplit, t), td.test);
    const ParamVector init = init_params(arch, derive_seed(master, stream::kInit, t));
    const ParamVector uniform = init_params(arch, derive_seed(master, stream::kPrior, t));
    PointContext ctx{&cfg, &split, &init, &uniform, predictor, rep.alpha, beta, derive_seed(master, stream::kRun, t)};
    const PointResult post = sample_posterior(ctx);
    const double true_risk = task.true_risk(post.post.params);
    const double gap = kl(post.emp_risk, std::clamp(true_risk, 1e-12, 1.0 - 1e-12));
    for (std::size_t k = 0; k < families.size(); ++k) {
      double tau;
      if (force == ForceTau::Infinity) {
        tau = std::numeric_limits<double>::infinity();
      } else if (force == ForceTau::Zero) {
        tau = 0.0;
      } else {
        const CertificateInput in = families[k] == BoundFamily::Cor5 ? cor5_input(ctx, post) : cor4_input(ctx, post);
        tau = certify(families[k], in, cfg.bound.kl).tau;
      }
      violated[t][k] = gap > tau;
    }
  });

  const double N = static_cast<double>(trials);
  const double d = rep.delta;
  rep.pass = true;
  for (std::size_t k = 0; k < families.size(); ++k) {
    FamilyValidity fv;
    fv.family = families[k];
    for (const auto& v : violated) fv.violations += v[k] ? 1 : 0;
    fv.rate = static_cast<double>(fv.violations) / N;
    fv.threshold = d + 2.0 * std::sqrt(d * (1.0 - d) / N);
    fv.pass = fv.rate <= fv.threshold;
    rep.pass = rep.pass && fv.pass;
    rep.families.push_back(fv);
  }
  return rep;
}

std::string format_report(const ValidationReport& r) {
  std::ostringstream os;
  os << "trials " << r.trials << "\n";
  os << "m " << r.m << " m_prime " << r.m_prime << " alpha " << fmt("%.6g", r.alpha) << " delta "
     << fmt("%.6g", r.delta) << "\n";
  for (const auto& f : r.families) {
    os << to_string(f.family) << " violations " << f.violations << " rate " << fmt("%.6f", f.rate)
       << " threshold " << fmt("%.6f", f.threshold) << (f.pass ? " PASS" : " FAIL") << "\n";
  }
  os << (r.pass ? "overall PASS" : "overall FAIL") << "\n";
  return os.str();
}

GroupBy parse_group_by(const std::string& name) {
  if (name == "alpha") return GroupBy::Alpha;
  if (name == "beta") return GroupBy::Beta;
  if (name == "family") return GroupBy::Family;
  throw std::invalid_argument("group-by must be alpha, beta or family, got '" + name + "'");
}

std::string plot_csv(const std::vector<RunRecord>& records, GroupBy group_by, std::vector<std::string>* warnings) {
  auto warn = [&](std::string w) {
    if (warnings) warnings->push_back(std::move(w));
  };
  using Key = std::tuple<double, std::string, std::string>;
  struct Acc {
    std::vector<double> bound, test;
  };
  std::map<Key, Acc> cells;
  std::size_t failed = 0;
  for (const auto& r : records) {
    if (r.status != "ok") {
      ++failed;
      continue;
    }
    double order = 0.0;
    std::string group;
    switch (group_by) {
      case GroupBy::Alpha:
        order = r.alpha;
        group = fmt("%.6g", r.alpha);
        break;
      case GroupBy::Beta:
        order = r.beta.value_or(-1.0);
        group = r.beta ? fmt("%.6g", *r.beta) : "none";
        break;
      case GroupBy::Family:
        group = r.mu_family;
        break;
    }
    const std::string family = r.family + "@" + fmt("%.6g", r.ratio);
    auto& acc = cells[{order, group, family}];
    acc.bound.push_back(r.risk_upper);
    acc.test.push_back(r.test_risk);
  }
  if (records.empty()) warn("no records; writing header only");
  if (failed > 0) warn(std::to_string(failed) + " failed record(s) skipped");

  auto stats = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    return std::pair{mean, sd};
  };

  std::ostringstream os;
  os << "group,family,mean_bound,std_bound,mean_test_risk,std_test_risk,n\n";
  for (const auto& [key, acc] : cells) {
    const auto& [order, group, family] = key;
    (void)order;
    if (acc.bound.size() == 1) warn("group " + group + " family " + family + " has a single record; std set to 0");
    const auto [mb, sb] = stats(acc.bound);
    const auto [mt, st] = stats(acc.test);
    os << group << ',' << family << ',' << fmt("%.9g", mb) << ',' << fmt("%.9g", sb) << ',' << fmt("%.9g", mt)
       << ',' << fmt("%.9g", st) << ',' << acc.bound.size() << "\n";
  }
  return os.str();
}

}  // namespace pacgibbs
