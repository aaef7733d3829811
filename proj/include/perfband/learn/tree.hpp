#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "perfband/common/matrix.hpp"
#include "perfband/common/rng.hpp"

namespace perfband::learn {

enum class MaxFeatures { all, sqrt_of_dim, log2_of_dim };

struct TreeParams {
  int max_depth = 0;       // 0 = unlimited
  int max_leaf_nodes = 0;  // 0 = unlimited (depth-first growth); otherwise best-first
  // Values >= 1 are absolute counts; values in (0, 1) are fractions of the
  // training rows, rounded up.
  double min_samples_split = 2.0;
  double min_samples_leaf = 1.0;
  MaxFeatures max_features = MaxFeatures::all;

  bool operator==(const TreeParams&) const = default;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int depth = 0;
  std::int64_t count = 0;    // training rows reaching the node
  double weight = 0.0;       // training weight reaching the node
  std::vector<double> value; // leaf payload: class distribution or {mean}

  bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;       // nodes[0] is the root
  std::vector<double> importance;    // impurity decrease per feature, unnormalized

  bool empty() const { return nodes.empty(); }
  int leaf_index(std::span<const double> x) const;
  std::span<const double> predict_row(std::span<const double> x) const;
  // Node indices visited from root to leaf, inclusive.
  void traverse_path(std::span<const double> x, std::vector<int>& path) const;
  int max_depth() const;

  bool operator==(const DecisionTree&) const = default;
};

// Weighted Gini classification tree. `rows` selects (possibly repeated)
// training rows; `labels` and `weights` are indexed by absolute row id.
// Leaf values are weighted class frequencies. Split ties break to the lowest
// feature index, then the lowest threshold.
DecisionTree fit_classification_tree(const Matrix& X, const std::vector<int>& labels,
                                     const std::vector<double>& weights, int n_classes,
                                     const std::vector<int>& rows, const TreeParams& params,
                                     Rng& rng);

// Variance-reduction regression tree; leaf value is the mean target.
DecisionTree fit_regression_tree(const Matrix& X, const std::vector<double>& targets,
                                 const std::vector<int>& rows, const TreeParams& params,
                                 Rng& rng);

int resolve_count_param(double value, std::size_t n, int minimum);
int resolve_max_features(MaxFeatures mf, std::size_t dim);

}  // namespace perfband::learn
