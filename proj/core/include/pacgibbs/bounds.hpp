#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pacgibbs/kl.hpp"

namespace pacgibbs {

enum class BoundFamily { Cor4, Cor5, Eq8, Eq9 };

std::string to_string(BoundFamily family);
BoundFamily parse_bound_family(const std::string& name);

/// Everything a certificate needs. Unused fields are ignored by the
/// families that do not read them.
struct CertificateInput {
  std::size_t m = 1;
  std::size_t m_prime = 0;
  double delta = 0.05;
  double emp_risk = 0.0;     // R_S(h), 01-loss
  double mu_post = 0.0;      // μ(h, S)
  double mu_prior = 0.0;     // μ(h′, S)
  double omega_post = 0.0;   // ω(h)
  double omega_prior = 0.0;  // ω(h′)
  double alpha = 0.0;
  double alpha_prime = 0.0;
  double risk_prime_post = 0.0;   // R′_S(h)
  double risk_prime_prior = 0.0;  // R′_S(h′)

  void validate() const;
};

/// kl(R_S(h)‖R_D(h)) ≤ tau, turned into R_D(h) ≤ risk_upper.
struct Certificate {
  BoundFamily family = BoundFamily::Cor4;
  double tau = 0.0;
  double risk_upper = 1.0;
  bool tau_clamped = false;  // tau < 0 was clamped to 0 before inversion
  std::string inputs_digest;
};

/// ln(8√m/δ²), evaluated in log space.
double log_term_seeger(std::size_t m, double delta);
/// ln(6√m/δ).
double log_term_lever(std::size_t m, double delta);

/// Uniform prior: τ = (μ(h′,S) − μ(h,S) + ln(8√m/δ²)) / m.
Certificate bound_cor4(const CertificateInput& in, const KlInversionConfig& kl_cfg = {});

/// Gibbs prior ∝ exp(−ω): τ = ([μ(h′,S) − ω(h′)] − [μ(h,S) − ω(h)] + ln(8√m/δ²)) / m.
Certificate bound_cor5(const CertificateInput& in, const KlInversionConfig& kl_cfg = {});

/// h-independent baseline: τ = (α²/(8m) + √(α²/(2m)·ln(6√m/δ)) + ln(6√m/δ)) / m.
Certificate bound_eq8(const CertificateInput& in, const KlInversionConfig& kl_cfg = {});

/// Baseline with prior ∝ exp(−α′R′_S):
/// τ = (α(R′(h′) − R′(h)) + α′(R′(h) − R′(h′)) + 2α′ + ln(8√m/δ²)) / m.
Certificate bound_eq9(const CertificateInput& in, const KlInversionConfig& kl_cfg = {});

Certificate certify(BoundFamily family, const CertificateInput& in, const KlInversionConfig& kl_cfg = {});

/// (1/(1 − e^{−c}))·(1 − exp(−c·q − ξ)).
double bound_catoni(double c, double emp_risk, double xi);

/// Log-spaced grid of c values covering [lo, hi].
std::vector<double> catoni_grid(std::size_t count = 200, double lo = 1e-6, double hi = 50.0);

/// Minimum of bound_catoni over the grid, refined by golden-section search
/// on ln c to 1e-8. Coincides with kl_inv_upper(q, ξ).
double catoni_inf(double emp_risk, double xi, std::span<const double> c_grid);
double catoni_inf(double emp_risk, double xi);

/// (1/n)·Σ I[|gap_i| − μ_i > ε] + √(ln(2/δ)/(2n)). Needs true gaps, so only
/// usable on synthetic tasks with a known distribution.
double lee_delta_prime(std::span<const double> true_gaps, std::span<const double> mu_values, double epsilon,
                       double delta);

}  // namespace pacgibbs
