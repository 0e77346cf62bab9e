#include "pacgibbs/kl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pacgibbs {
namespace {

constexpr double kProbClamp = 1e-12;

double clamped_kl(double q, double p) {
  p = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  if (q <= 0.0) return -std::log1p(-p);
  if (q >= 1.0) return -std::log(p);
  return q * std::log(q / p) + (1.0 - q) * std::log((1.0 - q) / (1.0 - p));
}

void check_probability(double q, const char* what) {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::domain_error(std::string(what) + " must lie in [0,1], got " + std::to_string(q));
  }
}

}  // namespace

void KlInversionConfig::validate() const {
  if (!(tolerance > 0.0)) throw std::invalid_argument("kl inversion tolerance must be > 0");
  if (max_iterations < 1) throw std::invalid_argument("kl inversion max_iterations must be >= 1");
  if (!(budget_tolerance > 0.0)) throw std::invalid_argument("kl inversion budget_tolerance must be > 0");
}

double kl(double q, double p) {
  check_probability(q, "q");
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("p must lie in (0,1), got " + std::to_string(p));
  }
  // Rounding can push the two-term sum a hair below zero when q ≈ p.
  return std::max(0.0, clamped_kl(q, p));
}

double kl_inv_upper(double q, double tau, const KlInversionConfig& cfg) {
  check_probability(q, "q");
  if (!(tau >= 0.0)) throw std::domain_error("tau must be >= 0, got " + std::to_string(tau));
  cfg.validate();
  // kl(q‖·) is flat to second order at q, so a zero budget would otherwise
  // drift a few ulps-worth of tolerance above q.
  if (tau == 0.0) return q;

  double lo = q;
  double hi = 1.0;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double value = clamped_kl(q, mid);
    if (value > tau) {
      hi = mid;
    } else if (value < tau) {
      lo = mid;
    } else {
      return mid;
    }
    if (hi - lo < cfg.tolerance) {
      // hi == 1 means the budget was never exceeded: the answer sits at the
      // boundary and lo is within tolerance of it.
      if (hi >= 1.0 || tau - clamped_kl(q, lo) <= cfg.budget_tolerance) break;
    }
  }
  return lo;
}

double pinsker_gap(double tau) {
  if (!(tau >= 0.0)) throw std::domain_error("tau must be >= 0, got " + std::to_string(tau));
  return std::sqrt(tau / 2.0);
}

}  // namespace pacgibbs
