#include "pacgibbs/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace pacgibbs {

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

BlobSpec TaskConfig::blob_spec() const {
  BlobSpec spec;
  if (classes == 2) {
    spec = BlobSpec::two_class(dim, separation, sigma);
  } else {
    if (classes > dim) throw ConfigError("task.classes", "more than two classes need dim >= classes");
    spec.dim = dim;
    spec.sigma = sigma;
    for (std::size_t k = 0; k < classes; ++k) {
      std::vector<double> mu(dim, 0.0);
      mu[k] = separation;
      spec.means.push_back(mu);
    }
  }
  spec.n_pool = n_pool;
  spec.n_test = n_test;
  spec.oracle = oracle;
  spec.hidden_samples = hidden_samples;
  return spec;
}

Architecture ModelConfig::architecture(std::size_t input_dim, std::size_t labels) const {
  return Architecture::mlp(input_dim, hidden, labels, bias, leaky_slope);
}

std::vector<double> SweepConfig::alphas(std::size_t m) const {
  const double md = static_cast<double>(m);
  std::vector<double> out;
  if (alpha_log_grid) {
    const double lo = std::log(std::sqrt(md)), hi = std::log(md);
    if (alpha_count == 1) return {md};
    for (std::size_t i = 0; i < alpha_count; ++i) {
      out.push_back(std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(alpha_count - 1)));
    }
    return out;
  }
  for (const auto& tok : alpha_values) {
    if (tok == "m") {
      out.push_back(md);
    } else if (tok == "sqrt_m") {
      out.push_back(std::sqrt(md));
    } else {
      out.push_back(std::stod(tok));
    }
  }
  return out;
}

double ValidateConfig::resolve(const std::string& token, std::size_t m_value, double alpha_value) const {
  if (token == "m") return static_cast<double>(m_value);
  if (token == "sqrt_m") return std::sqrt(static_cast<double>(m_value));
  if (token == "alpha") return alpha_value;
  return std::stod(token);
}

namespace {

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
    const unsigned long long u = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return u;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a nonnegative integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, "expected true/false, got '" + v + "'");
}

std::vector<std::string> to_list(const std::string& v) {
  std::vector<std::string> parts;
  if (boost::algorithm::trim_copy(v).empty()) return parts;
  boost::algorithm::split(parts, v, boost::is_any_of(","));
  for (auto& p : parts) boost::algorithm::trim(p);
  return parts;
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& p : to_list(v)) out.push_back(to_double(key, p));
  return out;
}

template <class F>
auto wrap(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& ex) {
    throw ConfigError(key, ex.what());
  }
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      // [task]
      {"task.kind",
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "blobs") c.task.kind = TaskKind::Blobs;
         else if (v == "idx") c.task.kind = TaskKind::Idx;
         else throw ConfigError("task.kind", "expected blobs or idx, got '" + v + "'");
       }},
      {"task.dim", [](ExperimentConfig& c, const std::string& v) { c.task.dim = to_uint("task.dim", v); }},
      {"task.classes", [](ExperimentConfig& c, const std::string& v) { c.task.classes = to_uint("task.classes", v); }},
      {"task.separation",
       [](ExperimentConfig& c, const std::string& v) { c.task.separation = to_double("task.separation", v); }},
      {"task.sigma", [](ExperimentConfig& c, const std::string& v) { c.task.sigma = to_double("task.sigma", v); }},
      {"task.n_pool", [](ExperimentConfig& c, const std::string& v) { c.task.n_pool = to_uint("task.n_pool", v); }},
      {"task.n_test", [](ExperimentConfig& c, const std::string& v) { c.task.n_test = to_uint("task.n_test", v); }},
      {"task.oracle",
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "closed_form") c.task.oracle = OracleMode::ClosedForm;
         else if (v == "hidden_sample") c.task.oracle = OracleMode::HiddenSample;
         else throw ConfigError("task.oracle", "expected closed_form or hidden_sample, got '" + v + "'");
       }},
      {"task.hidden_samples",
       [](ExperimentConfig& c, const std::string& v) { c.task.hidden_samples = to_uint("task.hidden_samples", v); }},
      {"task.seed", [](ExperimentConfig& c, const std::string& v) { c.task.seed = to_uint("task.seed", v); }},
      {"task.train_images", [](ExperimentConfig& c, const std::string& v) { c.task.train_images = v; }},
      {"task.train_labels", [](ExperimentConfig& c, const std::string& v) { c.task.train_labels = v; }},
      {"task.test_images", [](ExperimentConfig& c, const std::string& v) { c.task.test_images = v; }},
      {"task.test_labels", [](ExperimentConfig& c, const std::string& v) { c.task.test_labels = v; }},
      {"task.pool_limit",
       [](ExperimentConfig& c, const std::string& v) { c.task.pool_limit = to_uint("task.pool_limit", v); }},
      {"task.test_limit",
       [](ExperimentConfig& c, const std::string& v) { c.task.test_limit = to_uint("task.test_limit", v); }},
      // [model]
      {"model.hidden",
       [](ExperimentConfig& c, const std::string& v) {
         c.model.hidden.clear();
         for (const auto& p : to_list(v)) c.model.hidden.push_back(to_uint("model.hidden", p));
       }},
      {"model.bias", [](ExperimentConfig& c, const std::string& v) { c.model.bias = to_bool("model.bias", v); }},
      {"model.leaky_slope",
       [](ExperimentConfig& c, const std::string& v) { c.model.leaky_slope = to_double("model.leaky_slope", v); }},
      // [mu]
      {"mu.family",
       [](ExperimentConfig& c, const std::string& v) {
         c.mu.family = wrap("mu.family", [&] { return parse_mu_family(v); });
       }},
      {"mu.norm",
       [](ExperimentConfig& c, const std::string& v) {
         if (v.empty() || v == "none" || v == "neural") c.mu.norm.reset();
         else c.mu.norm = wrap("mu.norm", [&] { return parse_norm_kind(v); });
       }},
      {"mu.predictor", [](ExperimentConfig& c, const std::string& v) { c.mu.predictor_path = v; }},
      {"mu.sgd_epochs_min",
       [](ExperimentConfig& c, const std::string& v) { c.mu.sgd_epochs_min = to_uint("mu.sgd_epochs_min", v); }},
      {"mu.sgd_epochs_max",
       [](ExperimentConfig& c, const std::string& v) { c.mu.sgd_epochs_max = to_uint("mu.sgd_epochs_max", v); }},
      {"mu.skip_sgld_for_gap",
       [](ExperimentConfig& c, const std::string& v) {
         c.mu.skip_sgld_for_gap = to_bool("mu.skip_sgld_for_gap", v);
       }},
      // [sampler]
      {"sampler.epochs",
       [](ExperimentConfig& c, const std::string& v) { c.sampler.epochs = to_uint("sampler.epochs", v); }},
      {"sampler.batch_size",
       [](ExperimentConfig& c, const std::string& v) { c.sampler.batch_size = to_uint("sampler.batch_size", v); }},
      {"sampler.lr_init",
       [](ExperimentConfig& c, const std::string& v) { c.sampler.lr_init = to_double("sampler.lr_init", v); }},
      {"sampler.lr_decay_on_fail",
       [](ExperimentConfig& c, const std::string& v) {
         c.sampler.lr_decay_on_fail = to_double("sampler.lr_decay_on_fail", v);
       }},
      {"sampler.lr_floor",
       [](ExperimentConfig& c, const std::string& v) { c.sampler.lr_floor = to_double("sampler.lr_floor", v); }},
      {"sampler.lr_epoch_decay",
       [](ExperimentConfig& c, const std::string& v) {
         c.sampler.lr_epoch_decay = to_double("sampler.lr_epoch_decay", v);
       }},
      {"sampler.max_wraps",
       [](ExperimentConfig& c, const std::string& v) {
         c.sampler.max_wraps = static_cast<int>(to_uint("sampler.max_wraps", v));
       }},
      {"sampler.autotune",
       [](ExperimentConfig& c, const std::string& v) { c.sampler.autotune = to_bool("sampler.autotune", v); }},
      // [bound]
      {"bound.families",
       [](ExperimentConfig& c, const std::string& v) {
         c.bound.families.clear();
         for (const auto& p : to_list(v)) {
           c.bound.families.push_back(wrap("bound.families", [&] { return parse_bound_family(p); }));
         }
       }},
      {"bound.delta", [](ExperimentConfig& c, const std::string& v) { c.bound.delta = to_double("bound.delta", v); }},
      {"bound.kl_tolerance",
       [](ExperimentConfig& c, const std::string& v) { c.bound.kl.tolerance = to_double("bound.kl_tolerance", v); }},
      {"bound.kl_max_iterations",
       [](ExperimentConfig& c, const std::string& v) {
         c.bound.kl.max_iterations = static_cast<int>(to_uint("bound.kl_max_iterations", v));
       }},
      // [sweep]
      {"sweep.alphas",
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "log_grid") {
           c.sweep.alpha_log_grid = true;
         } else {
           c.sweep.alpha_log_grid = false;
           c.sweep.alpha_values = to_list(v);
           for (const auto& t : c.sweep.alpha_values) {
             if (t != "m" && t != "sqrt_m") to_double("sweep.alphas", t);
           }
         }
       }},
      {"sweep.alpha_count",
       [](ExperimentConfig& c, const std::string& v) { c.sweep.alpha_count = to_uint("sweep.alpha_count", v); }},
      {"sweep.betas", [](ExperimentConfig& c, const std::string& v) { c.sweep.betas = to_doubles("sweep.betas", v); }},
      {"sweep.ratios",
       [](ExperimentConfig& c, const std::string& v) { c.sweep.ratios = to_doubles("sweep.ratios", v); }},
      {"sweep.repetitions",
       [](ExperimentConfig& c, const std::string& v) { c.sweep.repetitions = to_uint("sweep.repetitions", v); }},
      {"sweep.seed", [](ExperimentConfig& c, const std::string& v) { c.sweep.seed = to_uint("sweep.seed", v); }},
      {"sweep.threads",
       [](ExperimentConfig& c, const std::string& v) { c.sweep.threads = to_uint("sweep.threads", v); }},
      // [validate]
      {"validate.m", [](ExperimentConfig& c, const std::string& v) { c.validate.m = to_uint("validate.m", v); }},
      {"validate.ratio",
       [](ExperimentConfig& c, const std::string& v) { c.validate.ratio = to_double("validate.ratio", v); }},
      {"validate.alpha", [](ExperimentConfig& c, const std::string& v) { c.validate.alpha = v; }},
      {"validate.alpha_prime", [](ExperimentConfig& c, const std::string& v) { c.validate.alpha_prime = v; }},
      {"validate.trials",
       [](ExperimentConfig& c, const std::string& v) { c.validate.trials = to_uint("validate.trials", v); }},
  };
  return table;
}

void check(const ExperimentConfig& c) {
  auto require = [](bool ok, const char* key, const char* msg) {
    if (!ok) throw ConfigError(key, msg);
  };
  if (c.task.kind == TaskKind::Blobs) {
    require(c.task.dim >= 1, "task.dim", "must be >= 1");
    require(c.task.classes >= 2, "task.classes", "must be >= 2");
    require(c.task.sigma > 0.0, "task.sigma", "must be > 0");
    require(c.task.n_pool >= 2, "task.n_pool", "must be >= 2");
  } else {
    require(!c.task.train_images.empty(), "task.train_images", "required for idx tasks");
    require(!c.task.train_labels.empty(), "task.train_labels", "required for idx tasks");
    require(!c.task.test_images.empty(), "task.test_images", "required for idx tasks");
    require(!c.task.test_labels.empty(), "task.test_labels", "required for idx tasks");
  }
  require(c.task.n_test >= 1, "task.n_test", "must be >= 1");
  for (std::size_t w : c.model.hidden) require(w >= 1, "model.hidden", "widths must be >= 1");
  if (c.mu.family == MuFamily::Regularized) require(c.mu.norm.has_value(), "mu.norm", "required for regularized");
  if (c.mu.family == MuFamily::Neural || (c.mu.family == MuFamily::DistanceToRef && !c.mu.norm)) {
    require(!c.mu.predictor_path.empty(), "mu.predictor", "required for the neural measure");
  }
  require(c.mu.sgd_epochs_min >= 1 && c.mu.sgd_epochs_min <= c.mu.sgd_epochs_max, "mu.sgd_epochs_min",
          "must satisfy 1 <= min <= max");
  try {
    SgldConfig probe = c.sampler;
    probe.alpha = 1.0;
    probe.validate();
  } catch (const std::exception& ex) {
    throw ConfigError("sampler", ex.what());
  }
  require(!c.bound.families.empty(), "bound.families", "must list at least one family");
  require(c.bound.delta > 0.0 && c.bound.delta <= 1.0, "bound.delta", "must lie in (0,1]");
  try {
    c.bound.kl.validate();
  } catch (const std::exception& ex) {
    throw ConfigError("bound.kl_tolerance", ex.what());
  }
  require(c.sweep.alpha_log_grid ? c.sweep.alpha_count >= 1 : !c.sweep.alpha_values.empty(), "sweep.alphas",
          "grid must be nonempty");
  require(!c.sweep.betas.empty(), "sweep.betas", "must be nonempty");
  for (double b : c.sweep.betas) require(b >= 0.0 && b <= 1.0, "sweep.betas", "values must lie in [0,1]");
  require(!c.sweep.ratios.empty(), "sweep.ratios", "must be nonempty");
  for (double r : c.sweep.ratios) require(r >= 0.0 && r < 1.0, "sweep.ratios", "values must lie in [0,1)");
  require(c.sweep.repetitions >= 1, "sweep.repetitions", "must be >= 1");
  require(c.validate.m >= 1, "validate.m", "must be >= 1");
  require(c.validate.ratio >= 0.0 && c.validate.ratio < 1.0, "validate.ratio", "must lie in [0,1)");
  require(c.validate.trials >= 1, "validate.trials", "must be >= 1");
}

// Keys where an empty value is meaningful; elsewhere empty keeps the default.
const std::set<std::string> kEmptyAllowed = {"model.hidden", "mu.norm"};

std::string strip_comments(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      if ((line[i] == '#' || line[i] == ';') && (i == 0 || std::isspace(static_cast<unsigned char>(line[i - 1])))) {
        line.resize(i);
        break;
      }
    }
    out << line << '\n';
  }
  return out.str();
}

std::map<std::string, std::string> flatten(const boost::property_tree::ptree& tree) {
  std::map<std::string, std::string> out;
  for (const auto& [section, body] : tree) {
    for (const auto& [key, node] : body) out[section + "." + key] = boost::algorithm::trim_copy(node.data());
  }
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(strip_comments(text));
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& ex) {
    throw ConfigError("", std::string("malformed config: ") + ex.what());
  }
  ExperimentConfig cfg;
  std::ostringstream canonical;
  const auto& table = setters();
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(section, "key outside of a [section]");
    }
    for (const auto& [key, node] : body) {
      const std::string full = section + "." + key;
      const auto it = table.find(full);
      if (it == table.end()) throw ConfigError(full, "unknown configuration key");
      const std::string value = boost::algorithm::trim_copy(node.data());
      if (value.empty() && !kEmptyAllowed.count(full)) continue;
      it->second(cfg, value);
    }
  }
  // Canonical listing: defaults overlaid with the given values, sorted, so
  // formatting, ordering and restated defaults do not change the digest.
  static const std::map<std::string, std::string> defaults = [] {
    boost::property_tree::ptree t;
    std::istringstream d(strip_comments(default_config_text()));
    boost::property_tree::ini_parser::read_ini(d, t);
    return flatten(t);
  }();
  std::map<std::string, std::string> sorted = defaults;
  for (const auto& [k, v] : flatten(tree)) {
    if (!v.empty() || kEmptyAllowed.count(k)) sorted[k] = v;
  }
  for (const auto& [k, v] : sorted) canonical << k << '=' << v << '\n';
  check(cfg);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical.str())));
  cfg.digest = buf;
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string default_config_text() {
  return R"([task]
kind = blobs              # blobs | idx
dim = 2
classes = 2
separation = 2.0          # distance between class means
sigma = 1.0
n_pool = 8000             # learning pool, split into S and S'
n_test = 4000
oracle = closed_form      # closed_form | hidden_sample
hidden_samples = 1000000
seed =                    # defaults to a sub-seed of sweep.seed
train_images =            # idx only, relative paths resolve against $PACGIBBS_DATA_DIR
train_labels =
test_images =
test_labels =
pool_limit = 0            # 0 keeps every row
test_limit = 0

[model]
hidden =                  # comma-separated hidden widths; empty = linear model
bias = true
leaky_slope = 0.01

[mu]
family = emp_risk         # emp_risk | regularized | distance_to_ref | neural
norm =                    # dist_fro | dist_l2 | par_norm | path_norm | sum_fro | gap
predictor =               # gap predictor checkpoint for neural measures
sgd_epochs_min = 1        # h_SGD epochs drawn uniformly in [min, max]
sgd_epochs_max = 10
skip_sgld_for_gap = true

[sampler]
epochs = 10
batch_size = 64
lr_init = 0.1
lr_decay_on_fail = 0.1
lr_floor = 1e-10
lr_epoch_decay = 0.5
max_wraps = 3
autotune = true

[bound]
families = cor4,cor5,eq8,eq9
delta = 0.05
kl_tolerance = 1e-9
kl_max_iterations = 1000

[sweep]
alphas = log_grid         # log_grid, or a list of numbers / m / sqrt_m
alpha_count = 5
betas = 1.0               # regularized family only
ratios = 0.0,0.5
repetitions = 5
seed = 0
threads = 1

[validate]
m = 200
ratio = 0.5
alpha = sqrt_m
alpha_prime = alpha
trials = 200
)";
}

}  // namespace pacgibbs
