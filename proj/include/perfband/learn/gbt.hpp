#pragma once

#include <cstdint>
#include <vector>

#include "perfband/common/matrix.hpp"
#include "perfband/common/rng.hpp"
#include "perfband/learn/tree.hpp"

namespace perfband::learn {

enum class GbtLoss { logloss, squared, quantile };
enum class DartNormalize { tree, forest };
enum class DartSample { normal, weighted };

struct GbtParams {
  GbtLoss loss = GbtLoss::squared;
  double tau = 0.5;  // quantile loss only
  int n_estimators = 100;
  double learning_rate = 0.1;
  double subsample = 1.0;      // per-stage row fraction, without replacement
  double l2_leaf_reg = 0.0;    // lambda added to leaf denominators
  TreeParams tree{.max_depth = 3, .max_features = MaxFeatures::all};

  // Tree dropout (regression only). Each stage drops every prior stage with
  // probability dropout_rate, fits the new tree against the reduced
  // ensemble, and renormalizes weights; dropout is applied at every stage.
  double dropout_rate = 0.0;
  DartNormalize normalize = DartNormalize::tree;
  DartSample sample = DartSample::normal;

  // Early stopping (regression only): patience in stages without RMSE
  // improvement on a held-out fraction; 0 disables. Training halts in place,
  // already-built stages are kept.
  int early_stopping_patience = 0;
  double validation_fraction = 0.2;

  bool operator==(const GbtParams&) const = default;
};

struct GbtStage {
  std::vector<DecisionTree> trees;  // one tree, or one per class for softmax
  double weight = 0.0;

  bool operator==(const GbtStage&) const = default;
};

class GbtModel {
 public:
  GbtParams params;
  int n_classes = 0;  // 0 = regression, 2 = sigmoid, K > 2 = softmax
  std::vector<double> base_score;
  std::vector<GbtStage> stages;

  void fit(const Matrix& X, const std::vector<double>& y, std::uint64_t seed);
  void fit_classification(const Matrix& X, const std::vector<int>& labels, int n_classes_,
                          std::uint64_t seed);

  std::vector<double> predict(const Matrix& X) const;
  Matrix predict_proba(const Matrix& X) const;

  // One inference-time dropout draw: each stage is kept with probability
  // 1 - dropout_rate and kept contributions are scaled by 1/(1 - rate) so
  // the expectation matches the deterministic prediction.
  std::vector<double> predict_stochastic(const Matrix& X, Rng& rng) const;

  bool is_regression() const { return n_classes == 0; }

  bool operator==(const GbtModel&) const = default;
};

}  // namespace perfband::learn
