#include "perfband/learn/hpo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace perfband::learn {

namespace {

constexpr double kProbEps = 1e-15;

int count_classes(const std::vector<int>& labels) {
  int k = 0;
  for (int y : labels) k = std::max(k, y + 1);
  return k;
}

// Class prior of the training labels, used as a constant prediction when a
// fold's training rows collapse to a single class and a fit would be rejected.
Matrix prior_proba(const std::vector<int>& labels, int n_classes, std::size_t n_rows) {
  std::vector<double> prior(static_cast<std::size_t>(n_classes), 0.0);
  for (int y : labels) prior[static_cast<std::size_t>(y)] += 1.0;
  for (double& p : prior) p /= static_cast<double>(labels.size());
  Matrix out(n_rows, static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < n_rows; ++i)
    std::copy(prior.begin(), prior.end(), out.row(i).begin());
  return out;
}

}  // namespace

std::vector<std::vector<int>> stratified_folds(const std::vector<int>& labels, int n_folds,
                                               Rng& rng) {
  if (n_folds < 2) throw std::invalid_argument("stratified_folds: need at least 2 folds");
  if (labels.empty()) throw std::invalid_argument("stratified_folds: empty labels");
  int n_classes = count_classes(labels);
  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < labels.size(); ++i)
    by_class[static_cast<std::size_t>(labels[i])].push_back(static_cast<int>(i));

  std::vector<std::vector<int>> folds(static_cast<std::size_t>(n_folds));
  std::size_t next = 0;
  for (auto& rows : by_class) {
    rng.shuffle(rows);
    for (int r : rows) {
      folds[next % static_cast<std::size_t>(n_folds)].push_back(r);
      ++next;
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

double log_loss(const Matrix& proba, const std::vector<int>& labels) {
  if (proba.rows != labels.size() || proba.rows == 0)
    throw std::invalid_argument("log_loss: shape mismatch or empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < proba.rows; ++i) {
    double p = proba.at(i, static_cast<std::size_t>(labels[i]));
    p = std::clamp(p, kProbEps, 1.0 - kProbEps);
    total -= std::log(p);
  }
  return total / static_cast<double>(proba.rows);
}

HpoResult random_search_hpo(const ParamSpace& space, const HpoFitFn& fit, const Matrix& X,
                            const std::vector<int>& labels, int n_iter, int n_folds, Rng& rng) {
  if (space.empty()) throw std::invalid_argument("random_search_hpo: empty parameter space");
  if (n_iter < 1) throw std::invalid_argument("random_search_hpo: n_iter must be >= 1");
  if (X.rows != labels.size()) throw std::invalid_argument("random_search_hpo: shape mismatch");

  int n_classes = count_classes(labels);
  Rng sample_rng = rng.child(1);
  Rng fold_rng = rng.child(2);
  auto folds = stratified_folds(labels, n_folds, fold_rng);

  // Precompute complement training rows per fold.
  std::vector<std::vector<int>> train_rows(folds.size());
  {
    std::vector<char> in_fold(X.rows);
    for (std::size_t f = 0; f < folds.size(); ++f) {
      std::fill(in_fold.begin(), in_fold.end(), 0);
      for (int r : folds[f]) in_fold[static_cast<std::size_t>(r)] = 1;
      for (std::size_t i = 0; i < X.rows; ++i)
        if (!in_fold[i]) train_rows[f].push_back(static_cast<int>(i));
    }
  }

  HpoResult result;
  for (int iter = 0; iter < n_iter; ++iter) {
    ParamSet candidate = sample_params(space, sample_rng);
    double score_sum = 0.0;
    int scored = 0;
    Rng cand_rng = rng.child(100 + static_cast<std::uint64_t>(iter));
    for (std::size_t f = 0; f < folds.size(); ++f) {
      if (folds[f].empty() || train_rows[f].empty()) continue;
      Matrix X_tr = X.select_rows(train_rows[f]);
      Matrix X_val = X.select_rows(folds[f]);
      std::vector<int> y_tr, y_val;
      y_tr.reserve(train_rows[f].size());
      y_val.reserve(folds[f].size());
      for (int r : train_rows[f]) y_tr.push_back(labels[static_cast<std::size_t>(r)]);
      for (int r : folds[f]) y_val.push_back(labels[static_cast<std::size_t>(r)]);

      Matrix proba;
      bool degenerate =
          std::all_of(y_tr.begin(), y_tr.end(), [&](int y) { return y == y_tr[0]; });
      if (degenerate) {
        proba = prior_proba(y_tr, n_classes, X_val.rows);
      } else {
        Rng fit_rng = cand_rng.child(static_cast<std::uint64_t>(f));
        proba = fit(candidate, X_tr, y_tr, X_val, fit_rng);
      }
      score_sum += -log_loss(proba, y_val);
      ++scored;
    }
    double score = scored > 0 ? score_sum / scored : -std::numeric_limits<double>::infinity();
    result.scores.push_back(score);
    if (score > result.best_score) {
      result.best_score = score;
      result.best = candidate;
    }
  }
  if (result.best.empty() && !result.scores.empty()) {
    // All candidates unscorable (no usable folds): fall back to the first draw
    // so callers still get a valid configuration.
    Rng replay = rng.child(1);
    result.best = sample_params(space, replay);
  }
  return result;
}

}  // namespace perfband::learn
