#pragma once

namespace pacgibbs {

/// Bisection settings for the upper kl inversion.
///
/// `tolerance` is the target width of the bracketing interval and
/// `budget_tolerance` the largest accepted shortfall τ − kl(q‖p) of the
/// returned point. Near p → 1 the first criterion alone is too coarse, so
/// both must hold (or the iteration cap / double precision runs out).
struct KlInversionConfig {
  double tolerance = 1e-9;
  int max_iterations = 1000;
  double budget_tolerance = 1e-7;

  void validate() const;
};

/// Binary KL divergence kl(q‖p) between Bernoulli(q) and Bernoulli(p).
/// Uses 0·ln 0 = 0. Throws std::domain_error unless q ∈ [0,1], p ∈ (0,1).
/// p is clamped to [1e-12, 1 − 1e-12] before evaluation.
double kl(double q, double p);

/// kl-bar[q | τ] = max{ p ∈ (0,1) : kl(q‖p) ≤ τ }, found by bisection on
/// [q, 1]. The returned point always satisfies kl(q‖p) ≤ τ.
double kl_inv_upper(double q, double tau, const KlInversionConfig& cfg = {});

/// sqrt(τ/2); kl_inv_upper(q, τ) never exceeds q + pinsker_gap(τ).
double pinsker_gap(double tau);

}  // namespace pacgibbs
