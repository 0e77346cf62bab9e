#include "pacgibbs/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <numeric>

#include "pacgibbs/rng.hpp"

namespace pacgibbs {

DataSplit split_dataset(const Dataset& pool, double ratio, std::uint64_t seed, Dataset test) {
  if (pool.empty()) throw std::invalid_argument("cannot split an empty dataset");
  if (!(ratio >= 0.0 && ratio < 1.0)) {
    throw std::invalid_argument("split ratio must lie in [0,1), got " + std::to_string(ratio));
  }
  const std::size_t n = pool.size();
  const auto n_prime = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  if (n_prime >= n) throw std::invalid_argument("split ratio leaves the learning sample empty");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, stream::kSplit));
  std::shuffle(order.begin(), order.end(), rng);

  DataSplit split;
  split.ratio = ratio;
  split.s_prime_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_prime));
  split.s_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(n_prime), order.end());
  split.S = pool.subset(split.s_indices);
  split.S_prime = pool.subset(split.s_prime_indices);
  split.T = std::move(test);
  return split;
}

namespace {

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

std::string hex_bytes(const std::vector<std::uint8_t>& bytes, std::size_t n) {
  std::string out;
  char buf[8];
  for (std::size_t i = 0; i < n && i < bytes.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%02x", i ? " " : "", bytes[i]);
    out += buf;
  }
  return out;
}

}  // namespace

IdxTensor load_idx(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IdxFormatError("cannot open IDX file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 4) throw IdxFormatError(path.string() + ": truncated IDX header");

  IdxTensor t;
  t.magic = read_be32(bytes, 0);
  std::size_t rank = 0;
  if (t.magic == 0x00000803) {
    rank = 3;
  } else if (t.magic == 0x00000801) {
    rank = 1;
  } else {
    throw IdxFormatError(path.string() + ": bad IDX magic bytes [" + hex_bytes(bytes, 4) +
                         "], expected 00 00 08 03 or 00 00 08 01");
  }
  if (bytes.size() < 4 + 4 * rank) throw IdxFormatError(path.string() + ": truncated IDX header");
  std::size_t expected = 1;
  for (std::size_t i = 0; i < rank; ++i) {
    t.dims.push_back(read_be32(bytes, 4 + 4 * i));
    expected *= t.dims.back();
  }
  const std::size_t header = 4 + 4 * rank;
  if (bytes.size() - header < expected) {
    throw IdxFormatError(path.string() + ": truncated IDX payload (" +
                         std::to_string(bytes.size() - header) + " of " + std::to_string(expected) +
                         " bytes)");
  }
  t.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header),
                bytes.begin() + static_cast<std::ptrdiff_t>(header + expected));
  return t;
}

Dataset load_idx_dataset(const std::filesystem::path& images, const std::filesystem::path& labels,
                         std::size_t num_classes) {
  const IdxTensor img = load_idx(images);
  const IdxTensor lab = load_idx(labels);
  if (img.magic != 0x00000803) throw IdxFormatError(images.string() + ": not an IDX image file");
  if (lab.magic != 0x00000801) throw IdxFormatError(labels.string() + ": not an IDX label file");
  if (img.count() != lab.count()) {
    throw IdxFormatError("image/label count mismatch: " + std::to_string(img.count()) + " vs " +
                         std::to_string(lab.count()));
  }
  Dataset ds;
  ds.dim = std::size_t{img.dims[1]} * img.dims[2];
  ds.features.reserve(img.data.size());
  for (std::uint8_t px : img.data) ds.features.push_back(px / 255.0);
  int max_label = -1;
  for (std::uint8_t y : lab.data) {
    ds.labels.push_back(y);
    max_label = std::max<int>(max_label, y);
  }
  ds.num_classes = num_classes ? num_classes : static_cast<std::size_t>(max_label + 1);
  return ds;
}

std::filesystem::path resolve_data_path(const std::filesystem::path& path) {
  if (path.is_absolute()) return path;
  if (const char* dir = std::getenv("PACGIBBS_DATA_DIR"); dir && *dir) return std::filesystem::path(dir) / path;
  return path;
}

}  // namespace pacgibbs
