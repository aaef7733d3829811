#pragma once

#include <vector>

namespace perfband::learn {

// Non-decreasing least-squares fit via pool-adjacent-violators, evaluated by
// linear interpolation between fitted points and clamped outside the fitted
// range. Fewer than two distinct inputs yield the identity map.
struct IsotonicMap {
  std::vector<double> x;  // distinct, increasing
  std::vector<double> y;  // non-decreasing fitted values
  bool identity = false;

  double operator()(double value) const;

  bool operator==(const IsotonicMap&) const = default;
};

IsotonicMap fit_isotonic(const std::vector<double>& inputs, const std::vector<double>& targets,
                         const std::vector<double>& weights = {});

}  // namespace perfband::learn
