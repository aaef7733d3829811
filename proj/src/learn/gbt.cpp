#include "perfband/learn/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "perfband/common/stats.hpp"

namespace perfband::learn {

namespace {

constexpr double kScoreClip = 15.0;   // base log-odds clip
constexpr double kLeafClip = 20.0;    // Newton leaf-step clip
constexpr double kDenomFloor = 1e-6;

double clip(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

std::vector<int> subsample_rows(const std::vector<int>& rows, double fraction, Rng& rng) {
  if (fraction >= 1.0) return rows;
  std::size_t k = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(rows.size()))));
  std::vector<int> pool = rows;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + rng.uniform_index(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

// Leaf-wise groups of row positions for one fitted tree.
std::vector<std::vector<int>> group_rows_by_leaf(const DecisionTree& tree, const Matrix& X,
                                                 const std::vector<int>& rows,
                                                 std::vector<int>& leaf_of_row) {
  std::vector<std::vector<int>> groups(tree.nodes.size());
  leaf_of_row.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    int leaf = tree.leaf_index(X.row(static_cast<std::size_t>(rows[i])));
    leaf_of_row[i] = leaf;
    groups[static_cast<std::size_t>(leaf)].push_back(rows[i]);
  }
  return groups;
}

}  // namespace

void GbtModel::fit(const Matrix& X, const std::vector<double>& y, std::uint64_t seed) {
  if (X.rows == 0 || X.rows != y.size()) throw std::invalid_argument("GbtModel::fit: bad shapes");
  if (params.loss == GbtLoss::logloss)
    throw std::invalid_argument("GbtModel::fit: logloss requires fit_classification");
  if (params.loss == GbtLoss::quantile && (params.tau <= 0.0 || params.tau >= 1.0))
    throw std::invalid_argument("GbtModel::fit: tau outside (0, 1)");
  if (params.n_estimators < 1)
    throw std::invalid_argument("GbtModel::fit: n_estimators must be positive");

  n_classes = 0;
  stages.clear();
  Rng rng(seed);

  std::vector<int> train_rows(X.rows);
  for (std::size_t i = 0; i < X.rows; ++i) train_rows[i] = static_cast<int>(i);
  std::vector<int> val_rows;
  if (params.early_stopping_patience > 0 && X.rows >= 5) {
    Rng split_rng = rng.child(0xE5);
    std::vector<int> shuffled = train_rows;
    split_rng.shuffle(shuffled);
    std::size_t n_val = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(params.validation_fraction *
                                                 static_cast<double>(X.rows))));
    n_val = std::min(n_val, X.rows - 1);
    val_rows.assign(shuffled.begin(), shuffled.begin() + static_cast<long>(n_val));
    train_rows.assign(shuffled.begin() + static_cast<long>(n_val), shuffled.end());
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(val_rows.begin(), val_rows.end());
  }

  std::vector<double> train_targets(train_rows.size());
  for (std::size_t i = 0; i < train_rows.size(); ++i)
    train_targets[i] = y[static_cast<std::size_t>(train_rows[i])];
  double base = params.loss == GbtLoss::quantile ? quantile(train_targets, params.tau)
                                                 : mean(train_targets);
  base_score = {base};

  // Raw per-stage tree outputs, cached per row so dropout can recombine
  // ensembles without re-traversing trees.
  std::vector<std::vector<double>> stage_out;
  const bool dart = params.dropout_rate > 0.0;

  std::vector<double> residual_target(X.rows, 0.0);
  std::vector<double> f_current(X.rows, base);  // used when dropout is off
  std::vector<int> leaf_of_row;
  double best_rmse = std::numeric_limits<double>::infinity();
  int stall = 0;

  for (int m = 0; m < params.n_estimators; ++m) {
    Rng stage_rng = rng.child(static_cast<std::uint64_t>(m) + 1);
    Rng sub_rng = stage_rng.child(0);
    Rng drop_rng = stage_rng.child(1);
    Rng tree_rng = stage_rng.child(2);

    // Dropout mask over existing stages.
    std::vector<std::size_t> dropped;
    if (dart && !stages.empty()) {
      double weight_sum = 0.0;
      for (const auto& s : stages) weight_sum += std::abs(s.weight);
      for (std::size_t j = 0; j < stages.size(); ++j) {
        double p = params.dropout_rate;
        if (params.sample == DartSample::weighted && weight_sum > 0.0) {
          p = std::min(1.0, params.dropout_rate * static_cast<double>(stages.size()) *
                                std::abs(stages[j].weight) / weight_sum);
        }
        if (drop_rng.bernoulli(p)) dropped.push_back(j);
      }
    }

    // Ensemble prediction the new tree corrects: full ensemble, or the
    // ensemble without the dropped stages.
    auto predict_at = [&](int row) {
      if (!dart) return f_current[static_cast<std::size_t>(row)];
      double f = base_score[0];
      std::size_t di = 0;
      for (std::size_t j = 0; j < stages.size(); ++j) {
        if (di < dropped.size() && dropped[di] == j) {
          ++di;
          continue;
        }
        f += stages[j].weight * stage_out[j][static_cast<std::size_t>(row)];
      }
      return f;
    };

    for (int r : train_rows) {
      double f = predict_at(r);
      double res = y[static_cast<std::size_t>(r)] - f;
      residual_target[static_cast<std::size_t>(r)] =
          params.loss == GbtLoss::quantile ? (res > 0.0 ? params.tau : params.tau - 1.0) : res;
    }

    std::vector<int> rows = subsample_rows(train_rows, params.subsample, sub_rng);
    DecisionTree tree = fit_regression_tree(X, residual_target, rows, params.tree, tree_rng);

    // Leaf values recomputed from the actual residuals of the subsampled rows.
    auto groups = group_rows_by_leaf(tree, X, rows, leaf_of_row);
    for (std::size_t leaf = 0; leaf < groups.size(); ++leaf) {
      if (groups[leaf].empty()) continue;
      std::vector<double> residuals;
      residuals.reserve(groups[leaf].size());
      for (int r : groups[leaf]) residuals.push_back(y[static_cast<std::size_t>(r)] - predict_at(r));
      double value;
      if (params.loss == GbtLoss::quantile) {
        value = quantile(residuals, params.tau);
      } else {
        double s = 0.0;
        for (double v : residuals) s += v;
        value = s / (static_cast<double>(residuals.size()) + params.l2_leaf_reg);
      }
      tree.nodes[leaf].value = {value};
    }

    // Stage weight and renormalization of dropped stages.
    double stage_weight = params.learning_rate;
    if (dart && !dropped.empty()) {
      double k = static_cast<double>(dropped.size());
      double lr = params.learning_rate;
      if (params.normalize == DartNormalize::tree) {
        stage_weight = lr / (k + lr);
        for (std::size_t j : dropped) stages[j].weight *= k / (k + lr);
      } else {
        stage_weight = lr / (1.0 + lr);
        for (std::size_t j : dropped) stages[j].weight *= 1.0 / (1.0 + lr);
      }
    }

    GbtStage stage;
    stage.trees.push_back(std::move(tree));
    stage.weight = stage_weight;
    stages.push_back(std::move(stage));

    if (dart) {
      std::vector<double> out(X.rows);
      for (std::size_t r = 0; r < X.rows; ++r)
        out[r] = stages.back().trees[0].predict_row(X.row(r))[0];
      stage_out.push_back(std::move(out));
    } else {
      const DecisionTree& t = stages.back().trees[0];
      for (std::size_t r = 0; r < X.rows; ++r)
        f_current[r] += stage_weight * t.predict_row(X.row(r))[0];
    }

    if (params.early_stopping_patience > 0 && !val_rows.empty()) {
      double sse = 0.0;
      for (int r : val_rows) {
        double f;
        if (dart) {
          f = base_score[0];
          for (std::size_t j = 0; j < stages.size(); ++j)
            f += stages[j].weight * stage_out[j][static_cast<std::size_t>(r)];
        } else {
          f = f_current[static_cast<std::size_t>(r)];
        }
        double e = y[static_cast<std::size_t>(r)] - f;
        sse += e * e;
      }
      double rmse = std::sqrt(sse / static_cast<double>(val_rows.size()));
      if (rmse < best_rmse - 1e-12) {
        best_rmse = rmse;
        stall = 0;
      } else if (++stall > params.early_stopping_patience) {
        break;
      }
    }
  }
}

void GbtModel::fit_classification(const Matrix& X, const std::vector<int>& labels,
                                  int n_classes_, std::uint64_t seed) {
  if (X.rows == 0 || X.rows != labels.size())
    throw std::invalid_argument("GbtModel::fit_classification: bad shapes");
  if (n_classes_ < 2)
    throw std::invalid_argument("GbtModel::fit_classification: need >= 2 classes");
  if (params.loss != GbtLoss::logloss)
    throw std::invalid_argument("GbtModel::fit_classification: loss must be logloss");
  if (params.dropout_rate > 0.0)
    throw std::invalid_argument("GbtModel::fit_classification: dropout is regression-only");
  if (params.n_estimators < 1)
    throw std::invalid_argument("GbtModel::fit_classification: n_estimators must be positive");

  n_classes = n_classes_;
  stages.clear();
  Rng rng(seed);
  const std::size_t n = X.rows;
  const bool binary = n_classes == 2;
  const std::size_t n_scores = binary ? 1 : static_cast<std::size_t>(n_classes);

  base_score.assign(n_scores, 0.0);
  std::vector<double> prior(static_cast<std::size_t>(n_classes), 0.0);
  for (int yv : labels) prior[static_cast<std::size_t>(yv)] += 1.0;
  for (auto& p : prior) p /= static_cast<double>(n);
  if (binary) {
    double p1 = clip(prior[1], 1e-6, 1.0 - 1e-6);
    base_score[0] = clip(std::log(p1 / (1.0 - p1)), -kScoreClip, kScoreClip);
  } else {
    for (std::size_t k = 0; k < n_scores; ++k)
      base_score[k] = std::log(std::max(prior[k], 1e-6));
  }

  // scores[r * n_scores + k]
  std::vector<double> scores(n * n_scores);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < n_scores; ++k) scores[r * n_scores + k] = base_score[k];

  std::vector<int> all_rows(n);
  for (std::size_t i = 0; i < n; ++i) all_rows[i] = static_cast<int>(i);

  std::vector<double> proba(n * static_cast<std::size_t>(n_classes));
  std::vector<double> residual(n);
  std::vector<double> hessian(n);
  std::vector<int> leaf_of_row;

  for (int m = 0; m < params.n_estimators; ++m) {
    Rng stage_rng = rng.child(static_cast<std::uint64_t>(m) + 1);
    Rng sub_rng = stage_rng.child(0);

    // Current probabilities.
    for (std::size_t r = 0; r < n; ++r) {
      if (binary) {
        double p = 1.0 / (1.0 + std::exp(-scores[r]));
        proba[r * 2] = 1.0 - p;
        proba[r * 2 + 1] = p;
      } else {
        double mx = scores[r * n_scores];
        for (std::size_t k = 1; k < n_scores; ++k) mx = std::max(mx, scores[r * n_scores + k]);
        double sum = 0.0;
        for (std::size_t k = 0; k < n_scores; ++k) {
          double e = std::exp(scores[r * n_scores + k] - mx);
          proba[r * static_cast<std::size_t>(n_classes) + k] = e;
          sum += e;
        }
        for (std::size_t k = 0; k < n_scores; ++k)
          proba[r * static_cast<std::size_t>(n_classes) + k] /= sum;
      }
    }

    std::vector<int> rows = subsample_rows(all_rows, params.subsample, sub_rng);

    GbtStage stage;
    stage.weight = params.learning_rate;
    for (std::size_t k = 0; k < n_scores; ++k) {
      Rng tree_rng = stage_rng.child(2 + k);
      for (std::size_t r = 0; r < n; ++r) {
        double pk = binary ? proba[r * 2 + 1]
                           : proba[r * static_cast<std::size_t>(n_classes) + k];
        double yk = binary ? static_cast<double>(labels[r] == 1)
                           : static_cast<double>(labels[r] == static_cast<int>(k));
        residual[r] = yk - pk;
        hessian[r] = pk * (1.0 - pk);
      }
      DecisionTree tree = fit_regression_tree(X, residual, rows, params.tree, tree_rng);

      auto groups = group_rows_by_leaf(tree, X, rows, leaf_of_row);
      double scale = binary ? 1.0
                            : static_cast<double>(n_classes - 1) /
                                  static_cast<double>(n_classes);
      for (std::size_t leaf = 0; leaf < groups.size(); ++leaf) {
        if (groups[leaf].empty()) continue;
        double num = 0.0, den = 0.0;
        for (int r : groups[leaf]) {
          num += residual[static_cast<std::size_t>(r)];
          den += hessian[static_cast<std::size_t>(r)];
        }
        den = std::max(den, kDenomFloor) + params.l2_leaf_reg;
        double value = clip(scale * num / den, -kLeafClip, kLeafClip);
        tree.nodes[leaf].value = {value};
      }

      for (std::size_t r = 0; r < n; ++r)
        scores[r * n_scores + k] +=
            params.learning_rate * tree.predict_row(X.row(r))[0];
      stage.trees.push_back(std::move(tree));
    }
    stages.push_back(std::move(stage));
  }
}

std::vector<double> GbtModel::predict(const Matrix& X) const {
  if (!is_regression()) throw std::logic_error("GbtModel::predict: classification model");
  if (base_score.empty()) throw std::logic_error("GbtModel: not fitted");
  std::vector<double> out(X.rows, base_score[0]);
  for (std::size_t r = 0; r < X.rows; ++r) {
    auto x = X.row(r);
    for (const auto& stage : stages) out[r] += stage.weight * stage.trees[0].predict_row(x)[0];
  }
  return out;
}

Matrix GbtModel::predict_proba(const Matrix& X) const {
  if (is_regression()) throw std::logic_error("GbtModel::predict_proba: regression model");
  const bool binary = n_classes == 2;
  const std::size_t n_scores = binary ? 1 : static_cast<std::size_t>(n_classes);
  Matrix out(X.rows, static_cast<std::size_t>(n_classes));
  std::vector<double> score(n_scores);
  for (std::size_t r = 0; r < X.rows; ++r) {
    auto x = X.row(r);
    for (std::size_t k = 0; k < n_scores; ++k) score[k] = base_score[k];
    for (const auto& stage : stages) {
      for (std::size_t k = 0; k < n_scores; ++k)
        score[k] += stage.weight * stage.trees[k].predict_row(x)[0];
    }
    if (binary) {
      double p = 1.0 / (1.0 + std::exp(-score[0]));
      out.at(r, 0) = 1.0 - p;
      out.at(r, 1) = p;
    } else {
      double mx = *std::max_element(score.begin(), score.end());
      double sum = 0.0;
      for (std::size_t k = 0; k < n_scores; ++k) {
        double e = std::exp(score[k] - mx);
        out.at(r, k) = e;
        sum += e;
      }
      for (std::size_t k = 0; k < n_scores; ++k) out.at(r, k) /= sum;
    }
  }
  return out;
}

std::vector<double> GbtModel::predict_stochastic(const Matrix& X, Rng& rng) const {
  if (!is_regression())
    throw std::logic_error("GbtModel::predict_stochastic: regression models only");
  double rate = params.dropout_rate;
  if (rate <= 0.0) return predict(X);
  std::vector<char> keep(stages.size());
  for (auto& k : keep) k = rng.bernoulli(rate) ? 0 : 1;
  double rescale = 1.0 / (1.0 - rate);
  std::vector<double> out(X.rows, base_score[0]);
  for (std::size_t r = 0; r < X.rows; ++r) {
    auto x = X.row(r);
    for (std::size_t j = 0; j < stages.size(); ++j) {
      if (!keep[j]) continue;
      out[r] += rescale * stages[j].weight * stages[j].trees[0].predict_row(x)[0];
    }
  }
  return out;
}

}  // namespace perfband::learn
