#pragma once

#include <cstdint>
#include <vector>

namespace perfband::tabular {

// Percentile-bootstrap half-width of a confidence interval for the mean:
// resample the values with replacement `n_resamples` times, take the
// (1-level)/2 and (1+level)/2 quantiles of the resample means, and return
// half the distance between them.
double bootstrap_interval_width(const std::vector<double>& values, int n_resamples,
                                double level, std::uint64_t seed);

}  // namespace perfband::tabular
