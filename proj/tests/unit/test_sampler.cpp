#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "pacgibbs/sampler.hpp"

using namespace pacgibbs;

namespace {

const std::vector<std::size_t> kNoHidden;

Architecture linear5() { return Architecture::mlp(5, kNoHidden, 1, false); }

// ν(h) = ½·c·‖h − center‖², exact gradient on every batch.
class Quadratic final : public Objective {
 public:
  Quadratic(double c, std::vector<double> center, std::size_t n) : c_(c), center_(std::move(center)), n_(n) {}
  std::size_t num_examples() const override { return n_; }
  double value(const ParamVector& p) const override {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - center_[i]) * (p[i] - center_[i]);
    return 0.5 * c_ * s;
  }
  std::vector<double> gradient(const ParamVector& p, std::span<const std::size_t>, Rng&) const override {
    std::vector<double> g(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) g[i] = c_ * (p[i] - center_[i]);
    return g;
  }

 private:
  double c_;
  std::vector<double> center_;
  std::size_t n_;
};

// Flat objective: no rate can lower it.
class Flat final : public Objective {
 public:
  std::size_t num_examples() const override { return 10; }
  double value(const ParamVector&) const override { return 1.0; }
  std::vector<double> gradient(const ParamVector& p, std::span<const std::size_t>, Rng&) const override {
    return std::vector<double>(p.size(), 0.0);
  }
};

ParamVector ones() { return ParamVector(linear5(), std::vector<double>(5, 1.0)); }

SgldConfig fixed_rate(double lr, std::size_t epochs, double decay = 1.0) {
  SgldConfig cfg;
  cfg.autotune = false;
  cfg.lr_init = lr;
  cfg.epochs = epochs;
  cfg.lr_epoch_decay = decay;
  cfg.batch_size = 10;
  return cfg;
}

}  // namespace

TEST(SgldStep, NoiseScale) {
  const Architecture a = Architecture::mlp(1, kNoHidden, 1, false);
  ParamVector h(a, {0.0});
  const std::vector<double> g{0.0}, e{1.0};
  EXPECT_NEAR(sgld_step(h, g, 0.001, 1.0, e)[0], 0.0447213595499958, 1e-15);
}

TEST(SgldStep, QuadraticStep) {
  const Architecture a = Architecture::mlp(1, kNoHidden, 1, false);
  ParamVector h(a, {1.0});
  const std::vector<double> g{1.0}, e{0.0};
  EXPECT_DOUBLE_EQ(sgld_step(h, g, 0.1, 1.0, e)[0], 0.9);
}

TEST(SgldStep, Errors) {
  const auto h = ones();
  const std::vector<double> g(4, 0.0), e(5, 0.0), g5(5, 0.0);
  EXPECT_THROW(sgld_step(h, g, 0.1, 1.0, e), std::invalid_argument);
  EXPECT_THROW(sgld_step(h, g5, 0.0, 1.0, e), std::invalid_argument);
  EXPECT_THROW(sgld_step(h, g5, 0.1, 0.0, e), std::invalid_argument);
}

TEST(Autotune, KeepsTheInitialRateWhenStable) {
  Quadratic q(1.0, std::vector<double>(5, 0.0), 100);
  SgldConfig cfg;
  cfg.alpha = 1e6;
  EXPECT_DOUBLE_EQ(lr_autotune(ones(), q, cfg), 0.1);
}

TEST(Autotune, StepsDownOnHighCurvature) {
  // η·c = 3 diverges, η·c = 0.3 contracts.
  Quadratic q(30.0, std::vector<double>(5, 0.0), 100);
  SgldConfig cfg;
  cfg.alpha = 1e6;
  EXPECT_NEAR(lr_autotune(ones(), q, cfg), 0.01, 1e-15);
  EXPECT_EQ(lr_autotune(ones(), q, cfg), lr_autotune(ones(), q, cfg));
}

TEST(Autotune, FailsWhenNothingDecreases) {
  Flat f;
  SgldConfig cfg;
  EXPECT_THROW(lr_autotune(ones(), f, cfg), AutotuneError);
  cfg.autotune = true;
  EXPECT_THROW(sgld_run(ones(), f, cfg), AutotuneError);
}

TEST(Sgd, ZeroGradientLeavesParamsUnchanged) {
  Flat f;
  EXPECT_EQ(sgd_run(ones(), f, fixed_rate(0.1, 5)), ones());
}

TEST(Sgd, MatchesClosedFormContraction) {
  // 100 examples, batch 10: 10 steps per epoch, rate halves each epoch.
  Quadratic q(2.0, std::vector<double>(5, 0.5), 100);
  const auto out = sgd_run(ones(), q, fixed_rate(0.1, 3, 0.5));
  double delta = 0.5;
  for (double lr : {0.1, 0.05, 0.025}) delta *= std::pow(1.0 - 2.0 * lr, 10);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(out[i], 0.5 + delta, 1e-14);
}

TEST(Sgd, ConvergesOnQuadratic) {
  Quadratic q(1.0, {0.3, -0.2, 0.0, 1.5, -2.0}, 100);
  const auto out = sgd_run(ones(), q, fixed_rate(0.1, 100));
  const std::vector<double> c{0.3, -0.2, 0.0, 1.5, -2.0};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(out[i], c[i], 1e-6);
}

TEST(Sgd, MinIterationsExtendsWholeEpochs) {
  Quadratic q(1.0, std::vector<double>(5, 0.0), 100);
  std::vector<std::size_t> seen;
  sgd_run(ones(), q, fixed_rate(0.01, 2, 0.5), std::nullopt, 35,
          [&](const EpochSnapshot& s) { seen.push_back(s.iterations); });
  EXPECT_EQ(seen, (std::vector<std::size_t>{10, 20, 30, 40}));
}

TEST(Sgd, EpochCallbackSeesHalvingRates) {
  Quadratic q(1.0, std::vector<double>(5, 0.0), 100);
  std::vector<double> lrs;
  sgd_run(ones(), q, fixed_rate(0.08, 4, 0.5), std::nullopt, 0,
          [&](const EpochSnapshot& s) { lrs.push_back(s.lr); });
  EXPECT_EQ(lrs, (std::vector<double>{0.08, 0.04, 0.02, 0.01}));
}

TEST(Sgld, HugeAlphaApproachesSgd) {
  Quadratic q(1.0, std::vector<double>(5, 0.0), 100);
  auto cfg = fixed_rate(0.05, 5, 0.5);
  cfg.alpha = 1e30;
  const auto a = sgld_run(ones(), q, cfg);
  const auto b = sgd_run(ones(), q, cfg);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(Sgld, NoiseFreeDynamicsIsSgd) {
  Quadratic q(1.0, std::vector<double>(5, 0.0), 100);
  auto cfg = fixed_rate(0.05, 5, 0.5);
  cfg.alpha = 3.0;
  RunOptions opt;
  opt.noise = false;
  EXPECT_EQ(run_dynamics(ones(), q, cfg, opt).params, sgd_run(ones(), q, cfg));
}

TEST(Sgld, DeterministicInSeed) {
  Quadratic q(1.0, std::vector<double>(5, 0.0), 100);
  SgldConfig cfg;
  cfg.alpha = 10.0;
  cfg.seed = 42;
  const auto a = sgld_run(ones(), q, cfg);
  EXPECT_EQ(a, sgld_run(ones(), q, cfg));
  cfg.seed = 43;
  EXPECT_FALSE(a == sgld_run(ones(), q, cfg));
}

TEST(Sgld, DivergenceIsReported) {
  Quadratic q(100.0, std::vector<double>(5, 0.0), 1000);
  auto cfg = fixed_rate(1.0, 10);
  cfg.alpha = 1.0;
  EXPECT_THROW(sgld_run(ones(), q, cfg), std::runtime_error);
}

TEST(Adam, ZeroGradientGivesZeroUpdate) {
  AdamState s(3, 1e-3);
  const std::vector<double> g(3, 0.0);
  for (double u : adam_step(s, g)) EXPECT_EQ(u, 0.0);
}

TEST(Adam, FirstStepIsTheLearningRate) {
  AdamState s(3, 1e-3);
  const std::vector<double> g{2.0, -0.5, 1e3};
  const auto u = adam_step(s, g);
  EXPECT_NEAR(u[0], -1e-3, 1e-11);
  EXPECT_NEAR(u[1], 1e-3, 1e-10);
  EXPECT_NEAR(u[2], -1e-3, 1e-11);
  EXPECT_EQ(s.step, 1u);
}

TEST(Adam, LengthMismatchThrows) {
  AdamState s(3, 1e-3);
  const std::vector<double> g(2, 0.0);
  EXPECT_THROW(adam_step(s, g), std::invalid_argument);
}
