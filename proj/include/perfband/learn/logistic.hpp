#pragma once

#include <cstdint>
#include <vector>

#include "perfband/common/matrix.hpp"

namespace perfband::learn {

enum class Penalty { l1, l2 };

struct LogisticParams {
  Penalty penalty = Penalty::l2;
  double C = 1.0;  // inverse regularization strength
  double tol = 1e-6;
  int max_iter = 10000;

  bool operator==(const LogisticParams&) const = default;
};

// Multinomial softmax regression minimizing
//   (1/n) sum_i CE_i + (1/(C n)) R(W)
// with R the l1 norm or half squared l2 norm of the non-intercept weights.
// Optimized with Nesterov-accelerated (proximal) gradient descent with
// backtracking line search and restart on objective increase; converged when
// the (proximal) gradient norm drops below tol, else stops at max_iter.
// Callers are expected to pass standardized features.
class LogisticModel {
 public:
  LogisticParams params;
  int n_classes = 0;
  Matrix weights;  // n_classes x (dim + 1); last column is the intercept

  void fit(const Matrix& X, const std::vector<int>& labels, int n_classes_, std::uint64_t seed);

  Matrix predict_proba(const Matrix& X) const;
  std::vector<int> predict(const Matrix& X) const;

  // Regularized objective at the current weights (exposed for gradient
  // checks in tests).
  double objective(const Matrix& X, const std::vector<int>& labels) const;

  bool operator==(const LogisticModel&) const = default;
};

}  // namespace perfband::learn
