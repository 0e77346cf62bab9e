#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pacgibbs/bounds.hpp"

using namespace pacgibbs;

namespace {

long double seeger_log(long double m, long double delta) { return std::log(8.0L * std::sqrt(m) / (delta * delta)); }

CertificateInput base(std::size_t m, double delta) {
  CertificateInput in;
  in.m = m;
  in.delta = delta;
  return in;
}

}  // namespace

TEST(Cor4, EqualMuGivesTheLogTerm) {
  auto in = base(1000, 0.05);
  in.mu_prior = in.mu_post = 3.0;
  const auto c = bound_cor4(in);
  EXPECT_NEAR(c.tau, 0.011524784, 1e-9);
  EXPECT_NEAR(c.tau, static_cast<double>(seeger_log(1000, 0.05) / 1000), 1e-15);
  EXPECT_NEAR(c.risk_upper, 1.0 - std::exp(-c.tau), 1e-9);
  EXPECT_NEAR(c.risk_upper, 0.011458627, 1e-9);
  EXPECT_FALSE(c.tau_clamped);
}

TEST(Cor4, UniformPosteriorIsHypothesisFree) {
  auto in = base(500, 0.1);
  for (double r : {0.0, 0.2, 0.7}) {
    in.emp_risk = r;
    EXPECT_EQ(bound_cor4(in).tau, bound_cor4(base(500, 0.1)).tau);
  }
}

TEST(Cor5, HandValues) {
  auto in = base(100, 0.1);
  in.mu_prior = 5.0;
  in.omega_prior = 3.0;
  in.mu_post = 2.0;
  in.omega_post = 1.0;
  EXPECT_NEAR(bound_cor5(in).tau, 0.099871968, 1e-9);
  EXPECT_NEAR(bound_cor5(in).tau, static_cast<double>((1.0L + std::log(8000.0L)) / 100.0L), 1e-15);
}

TEST(Cor5, OmegaEqualToMuCancels) {
  auto in = base(300, 0.05);
  in.mu_prior = in.omega_prior = 4.25;
  in.mu_post = in.omega_post = 1.5;
  EXPECT_NEAR(bound_cor5(in).tau, static_cast<double>(seeger_log(300, 0.05) / 300), 1e-15);
}

TEST(Eq8, HandValuesAndMonotonicity) {
  auto in = base(100, 0.05);
  in.alpha = 10.0;
  EXPECT_NEAR(bound_eq8(in).tau, 0.090979041, 1e-9);
  in.alpha = 0.0;
  EXPECT_NEAR(bound_eq8(in).tau, std::log(1200.0) / 100.0, 1e-15);
  double prev = -1.0;
  for (double a = 0.0; a <= 200.0; a += 5.0) {
    in.alpha = a;
    const double t = bound_eq8(in).tau;
    EXPECT_GT(t, prev);
    prev = t;
  }
  in.alpha = -1.0;
  EXPECT_THROW(bound_eq8(in), std::invalid_argument);
}

TEST(Eq8, ConstantAcrossHypotheses) {
  auto in = base(400, 0.05);
  in.alpha = 20.0;
  const double t = bound_eq8(in).tau;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u;
  for (int i = 0; i < 20; ++i) {
    in.mu_post = u(rng);
    in.mu_prior = u(rng);
    in.risk_prime_post = u(rng);
    EXPECT_EQ(bound_eq8(in).tau, t);
  }
}

TEST(Eq9, HandValues) {
  auto in = base(200, 0.05);
  in.alpha = 20.0;
  in.alpha_prime = 10.0;
  in.risk_prime_prior = 0.6;
  in.risk_prime_post = 0.1;
  const long double want = (10.0L - 5.0L + 20.0L + seeger_log(200, 0.05)) / 200.0L;
  EXPECT_NEAR(bound_eq9(in).tau, static_cast<double>(want), 1e-15);
  EXPECT_NEAR(bound_eq9(in).tau, 0.178600324, 1e-9);
}

TEST(Eq9, EqualAlphasCancel) {
  auto in = base(200, 0.05);
  in.alpha = in.alpha_prime = 7.0;
  in.risk_prime_prior = 0.9;
  in.risk_prime_post = 0.3;
  EXPECT_NEAR(bound_eq9(in).tau, static_cast<double>((14.0L + seeger_log(200, 0.05)) / 200.0L), 1e-15);
  in.risk_prime_post = 1.5;
  EXPECT_THROW(bound_eq9(in), std::invalid_argument);
}

TEST(Reductions, BitEquality) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u;
  for (int i = 0; i < 100; ++i) {
    auto in = base(1 + rng() % 5000, 0.01 + 0.98 * u(rng));
    in.emp_risk = u(rng);
    in.mu_prior = 50.0 * u(rng);
    in.mu_post = 50.0 * u(rng);
    EXPECT_EQ(bound_cor5(in).tau, bound_cor4(in).tau);

    auto e = in;
    e.alpha = 100.0 * u(rng);
    e.alpha_prime = 0.0;
    e.risk_prime_prior = u(rng);
    e.risk_prime_post = u(rng);
    auto c = in;
    c.mu_prior = e.alpha * e.risk_prime_prior;
    c.mu_post = e.alpha * e.risk_prime_post;
    EXPECT_EQ(bound_eq9(e).tau, bound_cor4(c).tau);
  }
}

TEST(Certificates, RiskUpperDominatesEmpiricalRisk) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u;
  for (int i = 0; i < 200; ++i) {
    auto in = base(1 + rng() % 2000, 0.05);
    in.emp_risk = u(rng);
    in.mu_prior = 10.0 * u(rng);
    in.mu_post = 10.0 * u(rng);
    in.alpha = 10.0 * u(rng);
    for (auto f : {BoundFamily::Cor4, BoundFamily::Cor5, BoundFamily::Eq8, BoundFamily::Eq9}) {
      const auto c = certify(f, in);
      EXPECT_GE(c.risk_upper, in.emp_risk);
      EXPECT_LE(c.risk_upper, 1.0);
      EXPECT_EQ(c.family, f);
    }
  }
}

TEST(Certificates, NegativeTauIsClampedAndFlagged) {
  auto in = base(10, 0.5);
  in.emp_risk = 0.3;
  in.mu_post = 100.0;
  const auto c = bound_cor4(in);
  EXPECT_LT(c.tau, 0.0);
  EXPECT_TRUE(c.tau_clamped);
  EXPECT_EQ(c.risk_upper, 0.3);
}

TEST(Certificates, DigestTracksInputs) {
  auto in = base(100, 0.05);
  const auto a = bound_cor4(in).inputs_digest;
  EXPECT_EQ(a.size(), 16u);
  EXPECT_EQ(a, bound_cor4(in).inputs_digest);
  in.mu_post = 1.0;
  EXPECT_NE(a, bound_cor4(in).inputs_digest);
}

TEST(Certificates, InvalidInputs) {
  EXPECT_THROW(bound_cor4(base(0, 0.05)), std::invalid_argument);
  EXPECT_THROW(bound_cor4(base(10, 0.0)), std::invalid_argument);
  EXPECT_THROW(bound_cor4(base(10, 1.5)), std::invalid_argument);
  auto in = base(10, 0.05);
  in.emp_risk = -0.1;
  EXPECT_THROW(bound_cor5(in), std::invalid_argument);
  EXPECT_THROW(parse_bound_family("eq10"), std::invalid_argument);
  for (auto f : {BoundFamily::Cor4, BoundFamily::Cor5, BoundFamily::Eq8, BoundFamily::Eq9}) {
    EXPECT_EQ(parse_bound_family(to_string(f)), f);
  }
}

TEST(LogTerms, LargeSamplesStayFinite) {
  EXPECT_NEAR(log_term_seeger(1000, 0.05), static_cast<double>(seeger_log(1000, 0.05)), 1e-13);
  EXPECT_NEAR(log_term_lever(100, 0.05), std::log(1200.0), 1e-13);
  EXPECT_TRUE(std::isfinite(log_term_seeger(std::size_t{1} << 62, 1e-300)));
}

TEST(Catoni, Values) {
  const long double want = (1.0L / (1.0L - std::exp(-1.0L))) * (1.0L - std::exp(-0.25L));
  EXPECT_NEAR(bound_catoni(1.0, 0.2, 0.05), static_cast<double>(want), 1e-15);
  EXPECT_NEAR(bound_catoni(1.0, 0.2, 0.05), 0.349932009, 1e-9);
  for (double c : {0.01, 1.0, 30.0}) EXPECT_EQ(bound_catoni(c, 0.0, 0.0), 0.0);
  EXPECT_NEAR(bound_catoni(50.0, 0.0, 0.1), 1.0 - std::exp(-0.1), 1e-9);
  EXPECT_THROW(bound_catoni(0.0, 0.1, 0.1), std::invalid_argument);
}

TEST(Catoni, InfimumMatchesKlInverse) {
  EXPECT_NEAR(catoni_inf(0.0, 0.3), 1.0 - std::exp(-0.3), 1e-6);
  EXPECT_NEAR(catoni_inf(0.25, 0.0), 0.25, 1e-6);
  for (double q : {0.05, 0.3, 0.6}) {
    for (double xi : {0.01, 0.4, 1.5}) {
      EXPECT_NEAR(catoni_inf(q, xi), oracle::kl_inv_grid(q, xi), 1e-4) << q << " " << xi;
    }
  }
  const auto grid = catoni_grid();
  EXPECT_EQ(grid.size(), 200u);
  EXPECT_NEAR(grid.front(), 1e-6, 1e-18);
  EXPECT_NEAR(grid.back(), 50.0, 1e-12);
  EXPECT_THROW(catoni_inf(0.1, 0.1, std::vector<double>{}), std::invalid_argument);
}

TEST(Lee, DeltaPrime) {
  std::vector<double> gaps(100, 0.0), mu(100, 0.0);
  for (int i = 0; i < 10; ++i) gaps[i] = 1.0;
  const double slack = std::sqrt(std::log(40.0) / 200.0);
  EXPECT_NEAR(lee_delta_prime(gaps, mu, 0.5, 0.05), 0.1 + slack, 1e-15);
  EXPECT_NEAR(lee_delta_prime(gaps, mu, 0.5, 0.05), 0.2358102, 1e-7);
  EXPECT_NEAR(lee_delta_prime(gaps, mu, 2.0, 0.05), slack, 1e-15);
  EXPECT_NEAR(lee_delta_prime(std::vector<double>(100, 1.0), mu, 0.5, 0.05), 1.0 + slack, 1e-15);
  EXPECT_THROW(lee_delta_prime(gaps, std::vector<double>(3, 0.0), 0.5, 0.05), std::invalid_argument);
  // |gap| counts: negative gaps violate too
  gaps.assign(100, -1.0);
  EXPECT_NEAR(lee_delta_prime(gaps, mu, 0.5, 0.05), 1.0 + slack, 1e-15);
}
