#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "pacgibbs/neural_complexity.hpp"

using namespace pacgibbs;

namespace {

Dataset random_labels(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Dataset d;
  d.dim = dim;
  d.num_classes = 2;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(dim);
    for (auto& v : x) v = g(rng);
    d.push_back(x, static_cast<int>(rng() % 2));
  }
  return d;
}

Architecture small_arch() { return Architecture::mlp(4, std::vector<std::size_t>{8}, 2); }

std::vector<GapDatasetEntry> constant_gap_dataset(std::size_t n, double gap) {
  std::vector<GapDatasetEntry> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({init_params(small_arch(), 500 + i), gap, 0.5});
  return out;
}

PredictorConfig small_predictor() {
  PredictorConfig c;
  c.hidden_layers = 1;
  c.width = 16;
  c.batch_size = 16;
  c.epochs = 40;
  c.adam_lr = 5e-3;
  c.bins = 10;
  c.seed = 3;
  return c;
}

GapBuilderConfig builder(std::size_t epochs) {
  GapBuilderConfig c;
  c.arch = small_arch();
  c.schedule = {{0.5, 2}};
  c.sgd.epochs = epochs;
  c.sgd.batch_size = 8;
  c.sgd.lr_epoch_decay = 1.0;
  return c;
}

}  // namespace

TEST(GapDataset, ZeroRepetitionsGiveNothing) {
  auto c = builder(3);
  c.schedule = {{0.5, 0}};
  EXPECT_TRUE(build_gap_dataset(random_labels(20, 4, 1), c, 7).empty());
}

TEST(GapDataset, OneEntryPerEpoch) {
  const auto c = builder(4);
  const auto entries = build_gap_dataset(random_labels(40, 4, 1), c, 7);
  ASSERT_EQ(entries.size(), 8u);
  for (const auto& e : entries) {
    EXPECT_GE(e.gap, 0.0);
    EXPECT_EQ(e.split_ratio, 0.5);
    EXPECT_EQ(e.params.architecture(), c.arch);
  }
  const auto again = build_gap_dataset(random_labels(40, 4, 1), c, 7);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    EXPECT_EQ(entries[i].params, again[i].params);
    EXPECT_EQ(entries[i].gap, again[i].gap);
  }
}

TEST(GapDataset, MemorisingRandomLabelsOpensTheGap) {
  auto c = builder(150);
  c.arch = Architecture::mlp(4, std::vector<std::size_t>{64}, 2);
  c.schedule = {{0.5, 1}};
  const auto entries = build_gap_dataset(random_labels(40, 4, 2), c, 11);
  ASSERT_EQ(entries.size(), 150u);
  EXPECT_GT(entries.back().gap, entries.front().gap + 0.05);
}

TEST(GapDataset, RejectsDegenerateSplits) {
  auto c = builder(1);
  c.schedule = {{1.0, 1}};
  EXPECT_THROW(build_gap_dataset(random_labels(20, 4, 1), c, 1), std::invalid_argument);
  c.schedule = {{0.01, 1}};
  EXPECT_THROW(build_gap_dataset(random_labels(20, 4, 1), c, 1), std::invalid_argument);
}

TEST(GapDataset, ScaledSchedule) {
  const auto s = scaled_gap_schedule(1.0);
  ASSERT_EQ(s.size(), 13u);
  EXPECT_EQ(s.front().val_ratio, 0.99);
  EXPECT_EQ(s.front().repetitions, 1000u);
  EXPECT_EQ(s[4].repetitions, 120u);
  EXPECT_EQ(s.back().val_ratio, 0.10);
  EXPECT_EQ(scaled_gap_schedule(1e-6).back().repetitions, 1u);
}

TEST(Rebalance, AllEqualGapsFormOneBin) {
  const std::vector<double> g(7, 0.25);
  const auto rb = rebalance_bins(g, 50, 0.01);
  ASSERT_EQ(rb.bins.size(), 1u);
  for (double w : rb.weights) EXPECT_DOUBLE_EQ(w, 1.0 / 7.0);
}

TEST(Rebalance, TwoPopulations) {
  std::vector<double> g(10, 0.0);
  g.resize(100, 1.0);
  const auto rb = rebalance_bins(g, 2, 0.01);
  ASSERT_EQ(rb.bins.size(), 2u);
  EXPECT_DOUBLE_EQ(rb.weights[0], 1.0 / 20.0);
  EXPECT_DOUBLE_EQ(rb.weights[99], 1.0 / 180.0);
  double total = 0.0;
  for (double w : rb.weights) total += w;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Rebalance, SparseBinMergesUpward) {
  // 1 of 200 entries (0.5%) sits alone in the lowest bin.
  std::vector<double> g{0.0};
  g.resize(100, 0.5);
  g.resize(200, 1.0);
  const auto rb = rebalance_bins(g, 4, 0.01);
  ASSERT_EQ(rb.bins.size(), 2u);
  EXPECT_EQ(rb.bin_of[0], rb.bin_of[1]);
  EXPECT_NE(rb.bin_of[0], rb.bin_of[199]);
  EXPECT_DOUBLE_EQ(rb.weights[0], 1.0 / 200.0);
}

TEST(Rebalance, SparseLastBinMergesDownward) {
  std::vector<double> g(199, 0.0);
  g.push_back(1.0);
  const auto rb = rebalance_bins(g, 2, 0.01);
  ASSERT_EQ(rb.bins.size(), 1u);
  EXPECT_DOUBLE_EQ(rb.weights[199], 1.0 / 200.0);
}

TEST(Rebalance, Errors) {
  EXPECT_THROW(rebalance_bins(std::vector<double>{}, 5, 0.01), std::invalid_argument);
  EXPECT_THROW(rebalance_bins(std::vector<double>{1.0}, 0, 0.01), std::invalid_argument);
}

TEST(Rebalance, DrawsMatchTheWeights) {
  // Three bins of 5, 20 and 75 entries: each bin should get a third of the draws.
  std::vector<double> g(5, 0.0);
  g.resize(25, 0.5);
  g.resize(100, 1.0);
  const auto rb = rebalance_bins(g, 3, 0.01);
  ASSERT_EQ(rb.bins.size(), 3u);
  Rng rng(99);
  const std::size_t n = 10000;
  std::vector<double> count(3, 0.0);
  for (std::size_t i : sample_rebalanced(rb, n, rng)) count[rb.bin_of[i]] += 1.0;
  double chi2 = 0.0;
  for (double c : count) chi2 += (c - n / 3.0) * (c - n / 3.0) / (n / 3.0);
  const boost::math::chi_squared dist(2.0);
  EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 0.01);
}

TEST(Predictor, OutputIsNonNegativeAndScaleInvariant) {
  const GapPredictor p(small_arch().param_count(), small_predictor(), 1);
  for (int s = 0; s < 10; ++s) {
    const auto h = init_params(small_arch(), 20 + s);
    std::vector<double> scaled(h.values().begin(), h.values().end());
    for (double& v : scaled) v *= 7.5;
    EXPECT_GE(p.predict(h), 0.0);
    EXPECT_NEAR(p.predict(scaled), p.predict(h), 1e-12 * std::max(1.0, p.predict(h)));
  }
}

TEST(Predictor, LayoutMismatchThrows) {
  const GapPredictor p(small_arch().param_count(), small_predictor(), 1);
  const auto other = init_params(Architecture::mlp(3, std::vector<std::size_t>{2}, 2), 1);
  EXPECT_THROW(predict_gap(p, other), std::invalid_argument);
  EXPECT_THROW(GapPredictor(0, small_predictor(), 1), std::invalid_argument);
}

TEST(Predictor, InputGradientMatchesFiniteDifferences) {
  auto dataset = constant_gap_dataset(64, 0.2);
  auto cfg = small_predictor();
  cfg.epochs = 3;
  const auto trained = train_predictor(dataset, cfg);
  const auto h = init_params(small_arch(), 9);
  const auto g = trained.predictor.input_gradient(h.values());
  const auto fd = oracle::numeric_gradient([&](std::span<const double> w) { return trained.predictor.predict(w); },
                                           {h.values().begin(), h.values().end()}, 1e-6);
  EXPECT_LE(oracle::relative_error(g, fd), 1e-4);
}

TEST(Predictor, LearnsAConstantGap) {
  const auto trained = train_predictor(constant_gap_dataset(1000, 0.1), small_predictor());
  EXPECT_LE(trained.best_val_mae, 0.05);
  for (int s = 0; s < 5; ++s) EXPECT_NEAR(predict_gap(trained.predictor, init_params(small_arch(), 9000 + s)), 0.1, 0.05);
}

TEST(Predictor, KeepsTheBestValidationEpoch) {
  const auto trained = train_predictor(constant_gap_dataset(200, 0.1), small_predictor());
  ASSERT_EQ(trained.val_mae.size(), small_predictor().epochs);
  const auto best = std::min_element(trained.val_mae.begin(), trained.val_mae.end());
  EXPECT_EQ(trained.best_epoch, static_cast<std::size_t>(best - trained.val_mae.begin()) + 1);
  EXPECT_EQ(trained.best_val_mae, *best);
}

TEST(Predictor, TrainingIsDeterministic) {
  const auto a = train_predictor(constant_gap_dataset(100, 0.1), small_predictor());
  const auto b = train_predictor(constant_gap_dataset(100, 0.1), small_predictor());
  EXPECT_EQ(a.predictor, b.predictor);
  EXPECT_EQ(a.val_mae, b.val_mae);
}

TEST(Predictor, TrainingRejectsTinyDatasets) {
  EXPECT_THROW(train_predictor(constant_gap_dataset(1, 0.1), small_predictor()), std::invalid_argument);
  EXPECT_THROW(train_predictor(constant_gap_dataset(10, 0.1), small_predictor()), std::invalid_argument);
}

TEST(Predictor, CheckpointRoundTrip) {
  const auto trained = train_predictor(constant_gap_dataset(100, 0.1), small_predictor());
  const auto path = std::filesystem::temp_directory_path() / "pacgibbs_predictor_test.bin";
  trained.predictor.save(path);
  EXPECT_EQ(GapPredictor::load(path), trained.predictor);
  std::filesystem::remove(path);
}

TEST(GapDataset, PersistenceRoundTrip) {
  const auto entries = constant_gap_dataset(3, 0.125);
  const auto path = std::filesystem::temp_directory_path() / "pacgibbs_gap_dataset_test.jsonl";
  save_gap_dataset(entries, path);
  const auto back = load_gap_dataset(path, small_arch());
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].params, entries[i].params);
    EXPECT_EQ(back[i].gap, 0.125);
  }
  std::filesystem::remove(path);
}
