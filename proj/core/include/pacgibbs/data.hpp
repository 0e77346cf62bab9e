#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "pacgibbs/dataset.hpp"

namespace pacgibbs {

/// Learning sample S, prior sample S′ and held-out test sample T.
struct DataSplit {
  Dataset S;
  Dataset S_prime;
  Dataset T;
  double ratio = 0.0;  // m′ / (m + m′)
  // Pool indices that went to S and S′.
  std::vector<std::size_t> s_indices;
  std::vector<std::size_t> s_prime_indices;

  std::size_t m() const { return S.size(); }
  std::size_t m_prime() const { return S_prime.size(); }
};

/// Seeded shuffle of `pool`, first m′ = round(ratio·n) rows go to S′, the rest
/// to S. The test set is carried along untouched.
DataSplit split_dataset(const Dataset& pool, double ratio, std::uint64_t seed, Dataset test = {});

class IdxFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raw IDX file content: u8 payload with its dimensions.
struct IdxTensor {
  std::uint32_t magic = 0;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;

  std::size_t count() const { return dims.empty() ? 0 : dims.front(); }
};

/// Parses a big-endian IDX file with magic 0x00000803 (images) or
/// 0x00000801 (labels).
IdxTensor load_idx(const std::filesystem::path& path);

/// Pairs an image file and a label file into a dataset; pixels scaled to
/// [0,1] and flattened. `num_classes` defaults to 1 + max label.
Dataset load_idx_dataset(const std::filesystem::path& images, const std::filesystem::path& labels,
                         std::size_t num_classes = 0);

/// Resolves relative data paths against $PACGIBBS_DATA_DIR when set.
std::filesystem::path resolve_data_path(const std::filesystem::path& path);

}  // namespace pacgibbs
