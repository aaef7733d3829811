#include "perfband/tabular/bootstrap.hpp"

#include <stdexcept>
#include <vector>

#include "perfband/common/rng.hpp"
#include "perfband/common/stats.hpp"

namespace perfband::tabular {

double bootstrap_interval_width(const std::vector<double>& values, int n_resamples,
                                double level, std::uint64_t seed) {
  if (values.empty()) throw std::invalid_argument("bootstrap_interval_width: empty sample");
  if (n_resamples < 1)
    throw std::invalid_argument("bootstrap_interval_width: n_resamples must be positive");
  if (level <= 0.0 || level >= 1.0)
    throw std::invalid_argument("bootstrap_interval_width: level outside (0, 1)");

  Rng rng(seed);
  std::size_t n = values.size();
  std::vector<double> means(static_cast<std::size_t>(n_resamples));
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += values[rng.uniform_index(n)];
    m = s / static_cast<double>(n);
  }
  double lo = quantile(means, (1.0 - level) / 2.0);
  double hi = quantile(means, (1.0 + level) / 2.0);
  return (hi - lo) / 2.0;
}

}  // namespace perfband::tabular
