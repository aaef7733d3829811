#pragma once

#include <cstdint>
#include <vector>

#include "perfband/tabular/dataset.hpp"

namespace perfband::tabular {

// Row-index partition of a dataset into train / test / production sets.
struct SplitTriple {
  std::vector<int> train;
  std::vector<int> test;
  std::vector<int> prod;

  std::size_t total() const { return train.size() + test.size() + prod.size(); }
  bool operator==(const SplitTriple&) const = default;
};

// Random partition with sizes floor(p * n); leftover rows are assigned to
// splits drawn in proportion to the fractions, using the same seed. Fractions
// must be non-negative and sum to 1.
SplitTriple random_split(std::size_t n, double p_train, double p_test, double p_prod,
                         std::uint64_t seed);

// Random two-way partition of the given rows; the first part receives
// round(frac * n) rows.
std::pair<std::vector<int>, std::vector<int>> split_rows(const std::vector<int>& rows,
                                                         double frac, std::uint64_t seed);

}  // namespace perfband::tabular
