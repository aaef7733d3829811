#include "perfband/learn/random_forest.hpp"

#include <stdexcept>

#include "perfband/common/rng.hpp"

namespace perfband::learn {

std::vector<double> balanced_sample_weights(const std::vector<int>& labels, int n_classes) {
  std::vector<double> class_counts(static_cast<std::size_t>(n_classes), 0.0);
  for (int y : labels) class_counts[static_cast<std::size_t>(y)] += 1.0;
  double n = static_cast<double>(labels.size());
  std::vector<double> class_weights(static_cast<std::size_t>(n_classes), 0.0);
  for (std::size_t k = 0; k < class_weights.size(); ++k) {
    if (class_counts[k] > 0.0)
      class_weights[k] = n / (static_cast<double>(n_classes) * class_counts[k]);
  }
  std::vector<double> weights(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    weights[i] = class_weights[static_cast<std::size_t>(labels[i])];
  return weights;
}

std::vector<int> argmax_rows(const Matrix& proba) {
  std::vector<int> out(proba.rows);
  for (std::size_t r = 0; r < proba.rows; ++r) {
    auto row = proba.row(r);
    int best = 0;
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (row[c] > row[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
    }
    out[r] = best;
  }
  return out;
}

void RandomForestModel::fit(const Matrix& X, const std::vector<int>& labels,
                            const std::vector<double>& weights, int n_classes_,
                            std::uint64_t seed) {
  if (X.rows == 0 || X.rows != labels.size())
    throw std::invalid_argument("RandomForestModel::fit: bad shapes");
  if (params.n_estimators < 1)
    throw std::invalid_argument("RandomForestModel::fit: n_estimators must be positive");
  n_classes = n_classes_;
  std::vector<double> w = weights.empty() ? std::vector<double>(X.rows, 1.0) : weights;
  if (w.size() != X.rows)
    throw std::invalid_argument("RandomForestModel::fit: weight size mismatch");

  trees.clear();
  trees.reserve(static_cast<std::size_t>(params.n_estimators));
  Rng base(seed);
  std::vector<int> all_rows(X.rows);
  for (std::size_t i = 0; i < X.rows; ++i) all_rows[i] = static_cast<int>(i);
  for (int t = 0; t < params.n_estimators; ++t) {
    Rng tree_rng = base.child(static_cast<std::uint64_t>(t));
    std::vector<int> rows;
    if (params.bootstrap) {
      rows.resize(X.rows);
      for (auto& r : rows) r = static_cast<int>(tree_rng.uniform_index(X.rows));
    } else {
      rows = all_rows;
    }
    trees.push_back(fit_classification_tree(X, labels, w, n_classes, rows, params.tree, tree_rng));
  }
}

Matrix RandomForestModel::predict_proba(const Matrix& X) const {
  if (trees.empty()) throw std::logic_error("RandomForestModel: not fitted");
  Matrix out(X.rows, static_cast<std::size_t>(n_classes));
  for (std::size_t r = 0; r < X.rows; ++r) {
    auto x = X.row(r);
    auto acc = out.row(r);
    for (const auto& tree : trees) {
      auto leaf = tree.predict_row(x);
      for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += leaf[k];
    }
    for (auto& v : acc) v /= static_cast<double>(trees.size());
  }
  return out;
}

std::vector<int> RandomForestModel::predict(const Matrix& X) const {
  return argmax_rows(predict_proba(X));
}

std::vector<double> RandomForestModel::feature_importances() const {
  if (trees.empty()) throw std::logic_error("RandomForestModel: not fitted");
  std::vector<double> total(trees.front().importance.size(), 0.0);
  for (const auto& tree : trees) {
    for (std::size_t f = 0; f < total.size(); ++f) total[f] += tree.importance[f];
  }
  double sum = 0.0;
  for (double v : total) sum += v;
  if (sum <= 0.0) {
    // No splits anywhere (degenerate data): report a uniform distribution.
    return std::vector<double>(total.size(), 1.0 / static_cast<double>(total.size()));
  }
  for (auto& v : total) v /= sum;
  return total;
}

}  // namespace perfband::learn
