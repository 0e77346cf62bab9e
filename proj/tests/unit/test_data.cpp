#include <gtest/gtest.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "pacgibbs/config.hpp"
#include "pacgibbs/data.hpp"
#include "pacgibbs/records.hpp"
#include "pacgibbs/synthetic.hpp"

using namespace pacgibbs;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("pacgibbs_data_" + std::to_string(std::random_device{}()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::vector<std::uint8_t> idx_images(std::uint32_t n, std::uint32_t rows, std::uint32_t cols,
                                     const std::vector<std::uint8_t>& pixels) {
  std::vector<std::uint8_t> b;
  be32(b, 0x00000803);
  be32(b, n);
  be32(b, rows);
  be32(b, cols);
  b.insert(b.end(), pixels.begin(), pixels.end());
  return b;
}

std::vector<std::uint8_t> idx_labels(const std::vector<std::uint8_t>& labels) {
  std::vector<std::uint8_t> b;
  be32(b, 0x00000801);
  be32(b, static_cast<std::uint32_t>(labels.size()));
  b.insert(b.end(), labels.begin(), labels.end());
  return b;
}

Dataset counting(std::size_t n) {
  Dataset d;
  d.dim = 1;
  d.num_classes = 2;
  for (std::size_t i = 0; i < n; ++i) d.push_back(std::vector<double>{static_cast<double>(i)}, int(i % 2));
  return d;
}

RunRecord sample_record(std::uint64_t i) {
  RunRecord r;
  r.seed = 12;
  r.config_digest = "00ff00ff00ff00ff";
  r.run_index = i;
  r.family = "cor5";
  r.mu_family = "regularized:par_norm";
  r.alpha = 89.4427190999916;
  r.beta = 0.5;
  r.ratio = 0.5;
  r.m = 4000;
  r.m_prime = 4000;
  r.emp_risk = 0.1875;
  r.test_risk = 1.0 / 3.0;
  r.tau = 0.012;
  r.risk_upper = 0.25;
  r.wall_time_ms = 12.5;
  return r;
}

}  // namespace

TEST(Idx, EmptyFileHasNoRows) {
  TempDir dir;
  write_bytes(dir / "img", idx_images(0, 3, 3, {}));
  write_bytes(dir / "lab", idx_labels({}));
  EXPECT_EQ(load_idx_dataset(dir / "img", dir / "lab").size(), 0u);
}

TEST(Idx, TwoSmallImages) {
  TempDir dir;
  std::vector<std::uint8_t> px(18);
  for (std::size_t i = 0; i < 18; ++i) px[i] = static_cast<std::uint8_t>(15 * i);
  write_bytes(dir / "img", idx_images(2, 3, 3, px));
  write_bytes(dir / "lab", idx_labels({4, 1}));
  const auto d = load_idx_dataset(dir / "img", dir / "lab");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.dim, 9u);
  EXPECT_EQ(d.num_classes, 5u);
  EXPECT_EQ(d.labels, (std::vector<int>{4, 1}));
  EXPECT_DOUBLE_EQ(d.row(1)[0], 135.0 / 255.0);
  EXPECT_DOUBLE_EQ(d.row(1)[8], 255.0 / 255.0);
  EXPECT_EQ(load_idx_dataset(dir / "img", dir / "lab", 10).num_classes, 10u);
}

TEST(Idx, BadMagicNamesTheBytes) {
  TempDir dir;
  write_bytes(dir / "bad", {0x00, 0x00, 0x08, 0x04, 0, 0, 0, 0});
  try {
    load_idx(dir / "bad");
    FAIL();
  } catch (const IdxFormatError& e) {
    EXPECT_NE(std::string(e.what()).find("00 00 08 04"), std::string::npos) << e.what();
  }
}

TEST(Idx, TruncatedAndMismatchedFiles) {
  TempDir dir;
  write_bytes(dir / "short", idx_images(2, 3, 3, std::vector<std::uint8_t>(10)));
  EXPECT_THROW(load_idx(dir / "short"), IdxFormatError);
  write_bytes(dir / "hdr", {0x00, 0x00, 0x08, 0x03, 0, 0});
  EXPECT_THROW(load_idx(dir / "hdr"), IdxFormatError);
  EXPECT_THROW(load_idx(dir / "missing"), IdxFormatError);
  write_bytes(dir / "img", idx_images(2, 1, 1, {1, 2}));
  write_bytes(dir / "lab", idx_labels({0, 1, 1}));
  EXPECT_THROW(load_idx_dataset(dir / "img", dir / "lab"), IdxFormatError);
  EXPECT_THROW(load_idx_dataset(dir / "lab", dir / "lab"), IdxFormatError);
}

TEST(Split, SizesAndPartition) {
  const auto pool = counting(10);
  const auto s = split_dataset(pool, 0.3, 1);
  EXPECT_EQ(s.m_prime(), 3u);
  EXPECT_EQ(s.m(), 7u);
  std::set<std::size_t> all(s.s_indices.begin(), s.s_indices.end());
  all.insert(s.s_prime_indices.begin(), s.s_prime_indices.end());
  EXPECT_EQ(all.size(), 10u);
  for (std::size_t i = 0; i < s.m(); ++i) EXPECT_EQ(s.S.row(i)[0], static_cast<double>(s.s_indices[i]));
  EXPECT_EQ(split_dataset(pool, 0.0, 1).m(), 10u);
  EXPECT_EQ(split_dataset(pool, 0.5, 1).m(), 5u);
}

TEST(Split, DeterministicInSeed) {
  const auto pool = counting(50);
  EXPECT_EQ(split_dataset(pool, 0.5, 3).s_indices, split_dataset(pool, 0.5, 3).s_indices);
  EXPECT_NE(split_dataset(pool, 0.5, 3).s_indices, split_dataset(pool, 0.5, 4).s_indices);
}

TEST(Split, Errors) {
  EXPECT_THROW(split_dataset(Dataset{}, 0.5, 1), std::invalid_argument);
  EXPECT_THROW(split_dataset(counting(4), 1.0, 1), std::invalid_argument);
  EXPECT_THROW(split_dataset(counting(4), -0.1, 1), std::invalid_argument);
  EXPECT_THROW(split_dataset(counting(2), 0.9, 1), std::invalid_argument);
}

TEST(Synthetic, SeparatedBlobsAreEasy) {
  const SyntheticTask task(BlobSpec::two_class(2, 40.0, 1.0), 1);
  const Architecture a = Architecture::mlp(2, std::vector<std::size_t>{}, 2);
  ParamVector h(a, {-1.0, 0.0, 1.0, 0.0, 0.0, 0.0});  // predicts the sign of x₀
  EXPECT_LT(task.true_risk(h), 1e-10);
  EXPECT_EQ(empirical_risk(h, task.pool(), LossKind::ZeroOne), 0.0);
}

TEST(Synthetic, ConstantClassifierPaysTheOtherClassWeight) {
  auto spec = BlobSpec::two_class(3, 2.0, 1.0);
  spec.class_weights = {0.7, 0.3};
  const SyntheticTask task(spec, 2);
  const Architecture a = Architecture::mlp(3, std::vector<std::size_t>{}, 2);
  ParamVector h(a);
  h.biases(0)[0] = 1.0;  // always class 0
  EXPECT_NEAR(task.closed_form_risk(h), 0.3, 1e-15);
}

TEST(Synthetic, ClosedFormAgreesWithHiddenSample) {
  auto spec = BlobSpec::two_class(2, 2.0, 1.0);
  spec.hidden_samples = 1'000'000;
  spec.n_pool = 10;
  spec.n_test = 10;
  const SyntheticTask task(spec, 3);
  const Architecture a = Architecture::mlp(2, std::vector<std::size_t>{}, 2);
  for (int i = 0; i < 50; ++i) {
    const auto h = init_params(a, 300 + i);
    EXPECT_NEAR(task.closed_form_risk(h), task.hidden_sample_risk(h), 0.003);
  }
}

TEST(Synthetic, DrawsAreReproducible) {
  const SyntheticTask a(BlobSpec::two_class(2, 2.0, 1.0), 5), b(BlobSpec::two_class(2, 2.0, 1.0), 5);
  EXPECT_EQ(a.pool().features, b.pool().features);
  EXPECT_EQ(a.sample(20, 9).labels, b.sample(20, 9).labels);
  EXPECT_NE(a.pool().features, a.test().features);
}

TEST(Synthetic, InvalidSpecs) {
  EXPECT_THROW(SyntheticTask(BlobSpec::two_class(2, 2.0, 0.0), 1), std::invalid_argument);
  auto s = BlobSpec::two_class(2, 2.0, 1.0);
  s.class_weights = {1.0};
  EXPECT_THROW(SyntheticTask(s, 1), std::invalid_argument);
  s = BlobSpec::two_class(2, 2.0, 1.0);
  s.means.pop_back();
  EXPECT_THROW(SyntheticTask(s, 1), std::invalid_argument);
  const SyntheticTask t(BlobSpec::two_class(2, 2.0, 1.0), 1);
  EXPECT_THROW(t.closed_form_risk(init_params(Architecture::mlp(2, std::vector<std::size_t>{3}, 2), 1)),
               std::invalid_argument);
}

TEST(Records, EmptyRoundTrip) {
  TempDir dir;
  persist_records({}, dir / "r.jsonl");
  EXPECT_TRUE(load_records(dir / "r.jsonl").empty());
}

TEST(Records, RoundTripIsStable) {
  TempDir dir;
  std::vector<RunRecord> rs{sample_record(0), sample_record(1), sample_record(2)};
  rs[1].beta.reset();
  rs[2].status = "failed";
  rs[2].error = "sampler diverged";
  rs[2].tau = std::nan("");
  persist_records(rs, dir / "a.jsonl");
  const auto back = load_records(dir / "a.jsonl");
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[0], rs[0]);
  EXPECT_EQ(back[1], rs[1]);
  EXPECT_TRUE(std::isnan(back[2].tau));
  EXPECT_EQ(back[2].error, "sampler diverged");
  persist_records(back, dir / "b.jsonl");
  std::ifstream a(dir / "a.jsonl"), b(dir / "b.jsonl");
  EXPECT_EQ(std::string(std::istreambuf_iterator<char>(a), {}), std::string(std::istreambuf_iterator<char>(b), {}));
  EXPECT_EQ(parse_record(serialize_record(rs[0])), rs[0]);
}

TEST(Records, CorruptLineIsNamed) {
  TempDir dir;
  {
    std::ofstream out(dir / "c.jsonl");
    out << serialize_record(sample_record(0)) << "\n{\"seed\": \n" << serialize_record(sample_record(1)) << "\n";
  }
  try {
    load_records(dir / "c.jsonl");
    FAIL();
  } catch (const RecordFormatError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(std::string(e.what()).rfind("line 2:", 0), 0u);
  }
}

TEST(Records, SchemaMismatchAndTypeErrors) {
  auto r = sample_record(0);
  r.schema_version = 99;
  EXPECT_THROW(parse_record(serialize_record(r), 1), RecordFormatError);
  auto j = serialize_record(sample_record(0));
  const auto pos = j.find("\"m\":");
  j.replace(pos, 4, "\"m\":\"x\",\"_\":");
  EXPECT_THROW(parse_record(j, 1), RecordFormatError);
}

TEST(Config, DefaultTextParses) {
  const auto c = ExperimentConfig::parse(default_config_text());
  EXPECT_EQ(c.task.n_pool, 8000u);
  EXPECT_EQ(c.bound.families.size(), 4u);
  EXPECT_EQ(c.digest.size(), 16u);
  EXPECT_EQ(c.digest, ExperimentConfig::parse(default_config_text()).digest);
  EXPECT_EQ(c.digest, ExperimentConfig::parse("").digest);
}

TEST(Config, ValuesAndDigest) {
  const auto c = ExperimentConfig::parse("[task]\ndim = 5  # five\n[sweep]\nalphas = 1, m, sqrt_m\n");
  EXPECT_EQ(c.task.dim, 5u);
  const auto a = c.sweep.alphas(400);
  EXPECT_EQ(a, (std::vector<double>{1.0, 400.0, 20.0}));
  EXPECT_NE(c.digest, ExperimentConfig::parse("").digest);
  const auto g = ExperimentConfig::parse("").sweep.alphas(10000);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_NEAR(g.front(), 100.0, 1e-9);
  EXPECT_NEAR(g.back(), 10000.0, 1e-9);
}

TEST(Config, ErrorsNameTheKey) {
  auto key_of = [](const std::string& text) {
    try {
      ExperimentConfig::parse(text);
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(key_of("[task]\nwidth = 3\n"), "task.width");
  EXPECT_EQ(key_of("[task]\ndim = three\n"), "task.dim");
  EXPECT_EQ(key_of("[bound]\ndelta = 1.5\n"), "bound.delta");
  EXPECT_EQ(key_of("[task]\nsigma = 0\n"), "task.sigma");
  EXPECT_EQ(key_of("[mu]\nfamily = regularized\n"), "mu.norm");
  EXPECT_EQ(key_of("[mu]\nfamily = neural\n"), "mu.predictor");
  EXPECT_EQ(key_of("[bound]\nfamilies = cor4, bogus\n"), "bound.families");
  EXPECT_EQ(key_of("[task]\nkind = csv\n"), "task.kind");
  EXPECT_THROW(ExperimentConfig::load("/nonexistent/pacgibbs.ini"), ConfigError);
}
