#pragma once

#include <cstdint>
#include <vector>

#include "perfband/common/matrix.hpp"
#include "perfband/learn/tree.hpp"

namespace perfband::learn {

struct RfParams {
  int n_estimators = 100;
  TreeParams tree{.max_features = MaxFeatures::sqrt_of_dim};
  bool bootstrap = true;

  bool operator==(const RfParams&) const = default;
};

// Bagged Gini forest. Per-class probability is the mean of per-tree leaf
// class frequencies.
class RandomForestModel {
 public:
  RfParams params;
  int n_classes = 0;
  std::vector<DecisionTree> trees;

  void fit(const Matrix& X, const std::vector<int>& labels, const std::vector<double>& weights,
           int n_classes_, std::uint64_t seed);

  Matrix predict_proba(const Matrix& X) const;
  std::vector<int> predict(const Matrix& X) const;

  // Impurity-decrease importances normalized to sum 1; uniform when the
  // forest contains no splits.
  std::vector<double> feature_importances() const;

  bool operator==(const RandomForestModel&) const = default;
};

// Class weights n / (K * n_k); classes absent from `labels` get weight 0.
std::vector<double> balanced_sample_weights(const std::vector<int>& labels, int n_classes);

std::vector<int> argmax_rows(const Matrix& proba);

}  // namespace perfband::learn
