#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pacgibbs {

/// Dense labeled sample: `features` holds size() rows of `dim` values.
struct Dataset {
  std::size_t dim = 0;
  std::size_t num_classes = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::size_t size() const noexcept { return labels.size(); }
  bool empty() const noexcept { return labels.empty(); }

  std::span<const double> row(std::size_t i) const noexcept {
    return {features.data() + i * dim, dim};
  }

  void push_back(std::span<const double> x, int y);

  /// Copy of the rows listed in `rows`, in that order.
  Dataset subset(std::span<const std::size_t> rows) const;
};

}  // namespace pacgibbs
