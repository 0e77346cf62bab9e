#pragma once

// Reference implementations used by the tests. They are written from the
// formulas directly and share no code with the library.

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace oracle {

inline long double kl(long double q, long double p) {
  long double r = 0.0L;
  if (q > 0.0L) r += q * std::log(q / p);
  if (q < 1.0L) r += (1.0L - q) * std::log((1.0L - q) / (1.0L - p));
  return r;
}

// Largest p on a 1e-6 lattice in [q, 1) with kl(q‖p) ≤ τ. Walks the lattice
// coarse to fine (1e-2, 1e-4, 1e-6); kl(q‖·) is increasing on [q, 1), so each
// level only needs to scan one cell of the previous one.
inline double kl_inv_grid(double q, double tau) {
  const long double top = 1.0L - 1e-6L;
  long double p = q;
  for (long double step : {1e-2L, 1e-4L, 1e-6L}) {
    while (p + step <= top && kl(q, p + step) <= tau) p += step;
  }
  return static_cast<double>(p);
}

inline long double bounded_ce(long double py) {
  const long double e4 = std::exp(-4.0L);
  return -0.25L * std::log(e4 + (1.0L - 2.0L * e4) * py);
}

// Central differences of f at x, step h.
inline std::vector<double> numeric_gradient(const std::function<double(std::span<const double>)>& f,
                                            std::vector<double> x, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    x[i] = x0 + h;
    const double fp = f(x);
    x[i] = x0 - h;
    const double fm = f(x);
    x[i] = x0;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// ‖a − b‖ / ‖b‖.
inline double relative_error(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    norm += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(norm), 1e-12);
}

}  // namespace oracle
