#include "pacgibbs/bounds.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>

namespace pacgibbs {

std::string to_string(BoundFamily family) {
  switch (family) {
    case BoundFamily::Cor4: return "cor4";
    case BoundFamily::Cor5: return "cor5";
    case BoundFamily::Eq8: return "eq8";
    case BoundFamily::Eq9: return "eq9";
  }
  return "?";
}

BoundFamily parse_bound_family(const std::string& name) {
  for (BoundFamily f : {BoundFamily::Cor4, BoundFamily::Cor5, BoundFamily::Eq8, BoundFamily::Eq9}) {
    if (to_string(f) == name) return f;
  }
  throw std::invalid_argument("unknown bound family '" + name + "'");
}

void CertificateInput::validate() const {
  if (m < 1) throw std::invalid_argument("certificate needs m >= 1");
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in (0,1]");
  if (!(emp_risk >= 0.0 && emp_risk <= 1.0)) throw std::invalid_argument("empirical risk must lie in [0,1]");
}

double log_term_seeger(std::size_t m, double delta) {
  return std::log(8.0) + 0.5 * std::log(static_cast<double>(m)) - 2.0 * std::log(delta);
}

double log_term_lever(std::size_t m, double delta) {
  return std::log(6.0) + 0.5 * std::log(static_cast<double>(m)) - std::log(delta);
}

namespace {

std::string digest(const CertificateInput& in) {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      h ^= (x >> (8 * i)) & 0xff;
      h *= 1099511628211ULL;
    }
  };
  feed(in.m);
  feed(in.m_prime);
  for (double v : {in.delta, in.emp_risk, in.mu_post, in.mu_prior, in.omega_post, in.omega_prior, in.alpha,
                   in.alpha_prime, in.risk_prime_post, in.risk_prime_prior}) {
    feed(std::bit_cast<std::uint64_t>(v));
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Certificate finish(BoundFamily family, double tau, const CertificateInput& in, const KlInversionConfig& kl_cfg) {
  Certificate c;
  c.family = family;
  c.tau = tau;
  c.tau_clamped = tau < 0.0;
  c.risk_upper = kl_inv_upper(in.emp_risk, std::max(tau, 0.0), kl_cfg);
  c.inputs_digest = digest(in);
  return c;
}

void check_risk(double r, const char* what) {
  if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0,1]");
}

}  // namespace

// The τ expressions share the grouping (μ difference) + correction + log
// term so that the reductions cor5(ω≡0) = cor4 and eq9(α′=0) = cor4 hold
// bit for bit.

Certificate bound_cor4(const CertificateInput& in, const KlInversionConfig& kl_cfg) {
  in.validate();
  const double tau = ((in.mu_prior - in.mu_post) + log_term_seeger(in.m, in.delta)) / static_cast<double>(in.m);
  return finish(BoundFamily::Cor4, tau, in, kl_cfg);
}

Certificate bound_cor5(const CertificateInput& in, const KlInversionConfig& kl_cfg) {
  in.validate();
  const double diff = (in.mu_prior - in.omega_prior) - (in.mu_post - in.omega_post);
  const double tau = (diff + log_term_seeger(in.m, in.delta)) / static_cast<double>(in.m);
  return finish(BoundFamily::Cor5, tau, in, kl_cfg);
}

Certificate bound_eq8(const CertificateInput& in, const KlInversionConfig& kl_cfg) {
  in.validate();
  if (!(in.alpha >= 0.0)) throw std::invalid_argument("eq8 needs alpha >= 0");
  const double m = static_cast<double>(in.m);
  const double lt = log_term_lever(in.m, in.delta);
  const double a2 = in.alpha * in.alpha;
  const double tau = (a2 / (8.0 * m) + std::sqrt(a2 / (2.0 * m) * lt) + lt) / m;
  return finish(BoundFamily::Eq8, tau, in, kl_cfg);
}

Certificate bound_eq9(const CertificateInput& in, const KlInversionConfig& kl_cfg) {
  in.validate();
  check_risk(in.risk_prime_post, "R'_S(h)");
  check_risk(in.risk_prime_prior, "R'_S(h')");
  const double mu_diff = in.alpha * in.risk_prime_prior - in.alpha * in.risk_prime_post;
  const double correction = in.alpha_prime * in.risk_prime_post - in.alpha_prime * in.risk_prime_prior;
  const double tau =
      ((mu_diff + correction) + 2.0 * in.alpha_prime + log_term_seeger(in.m, in.delta)) / static_cast<double>(in.m);
  return finish(BoundFamily::Eq9, tau, in, kl_cfg);
}

Certificate certify(BoundFamily family, const CertificateInput& in, const KlInversionConfig& kl_cfg) {
  switch (family) {
    case BoundFamily::Cor4: return bound_cor4(in, kl_cfg);
    case BoundFamily::Cor5: return bound_cor5(in, kl_cfg);
    case BoundFamily::Eq8: return bound_eq8(in, kl_cfg);
    case BoundFamily::Eq9: return bound_eq9(in, kl_cfg);
  }
  throw std::invalid_argument("unknown bound family");
}

double bound_catoni(double c, double emp_risk, double xi) {
  if (!(c > 0.0)) throw std::invalid_argument("Catoni parameter c must be > 0");
  return -std::expm1(-c * emp_risk - xi) / -std::expm1(-c);
}

std::vector<double> catoni_grid(std::size_t count, double lo, double hi) {
  if (count < 2 || !(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("invalid Catoni grid");
  std::vector<double> grid(count);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  return grid;
}

double catoni_inf(double emp_risk, double xi, std::span<const double> c_grid) {
  if (c_grid.empty()) throw std::invalid_argument("empty Catoni grid");
  std::size_t best = 0;
  double best_val = bound_catoni(c_grid[0], emp_risk, xi);
  for (std::size_t i = 1; i < c_grid.size(); ++i) {
    const double v = bound_catoni(c_grid[i], emp_risk, xi);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  // Golden-section on ln c inside the neighbouring grid cells.
  double lo = std::log(c_grid[best > 0 ? best - 1 : 0]);
  double hi = std::log(c_grid[std::min(best + 1, c_grid.size() - 1)]);
  auto f = [&](double log_c) { return bound_catoni(std::exp(log_c), emp_risk, xi); };
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > 1e-8) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = f(x2);
    }
  }
  return std::min({best_val, f1, f2});
}

double catoni_inf(double emp_risk, double xi) {
  static const std::vector<double> grid = catoni_grid();
  return catoni_inf(emp_risk, xi, grid);
}

double lee_delta_prime(std::span<const double> true_gaps, std::span<const double> mu_values, double epsilon,
                       double delta) {
  if (true_gaps.size() != mu_values.size()) throw std::invalid_argument("gap and mu lists differ in length");
  if (true_gaps.empty()) throw std::invalid_argument("lee_delta_prime needs n >= 1");
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in (0,1]");
  const double n = static_cast<double>(true_gaps.size());
  std::size_t violations = 0;
  for (std::size_t i = 0; i < true_gaps.size(); ++i) {
    if (std::abs(true_gaps[i]) - mu_values[i] > epsilon) ++violations;
  }
  return static_cast<double>(violations) / n + std::sqrt(std::log(2.0 / delta) / (2.0 * n));
}

}  // namespace pacgibbs
