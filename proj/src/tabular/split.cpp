#include "perfband/tabular/split.hpp"

#include <cmath>
#include <stdexcept>

#include "perfband/common/rng.hpp"

namespace perfband::tabular {

SplitTriple random_split(std::size_t n, double p_train, double p_test, double p_prod,
                         std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("random_split: empty dataset");
  double fractions[3] = {p_train, p_test, p_prod};
  double sum = 0.0;
  for (double p : fractions) {
    if (p < 0.0) throw std::invalid_argument("random_split: negative fraction");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("random_split: fractions must sum to 1");

  Rng rng(seed);
  std::size_t sizes[3];
  std::size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    sizes[k] = static_cast<std::size_t>(std::floor(fractions[k] * static_cast<double>(n)));
    assigned += sizes[k];
  }
  // Leftover rows go to splits sampled in proportion to their fractions.
  for (std::size_t r = assigned; r < n; ++r) {
    double u = rng.uniform();
    if (u < fractions[0]) sizes[0]++;
    else if (u < fractions[0] + fractions[1]) sizes[1]++;
    else sizes[2]++;
  }

  std::vector<std::size_t> order = rng.permutation(n);
  SplitTriple out;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < sizes[0]; ++i) out.train.push_back(static_cast<int>(order[pos++]));
  for (std::size_t i = 0; i < sizes[1]; ++i) out.test.push_back(static_cast<int>(order[pos++]));
  for (std::size_t i = 0; i < sizes[2]; ++i) out.prod.push_back(static_cast<int>(order[pos++]));
  return out;
}

std::pair<std::vector<int>, std::vector<int>> split_rows(const std::vector<int>& rows,
                                                         double frac, std::uint64_t seed) {
  if (frac < 0.0 || frac > 1.0) throw std::invalid_argument("split_rows: frac outside [0, 1]");
  Rng rng(seed);
  std::vector<int> shuffled = rows;
  rng.shuffle(shuffled);
  std::size_t k = static_cast<std::size_t>(
      std::llround(frac * static_cast<double>(shuffled.size())));
  std::vector<int> first(shuffled.begin(), shuffled.begin() + static_cast<long>(k));
  std::vector<int> second(shuffled.begin() + static_cast<long>(k), shuffled.end());
  return {std::move(first), std::move(second)};
}

}  // namespace perfband::tabular
