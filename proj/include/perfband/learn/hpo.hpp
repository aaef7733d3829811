#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "perfband/common/matrix.hpp"
#include "perfband/common/rng.hpp"
#include "perfband/learn/params.hpp"

namespace perfband::learn {

// Validation-row index sets for stratified k-fold cross validation. Rows of
// each class are shuffled and dealt round-robin, so every fold holds roughly
// n/k rows of each class. The training rows of fold f are the complement.
std::vector<std::vector<int>> stratified_folds(const std::vector<int>& labels, int n_folds,
                                               Rng& rng);

// Mean negative log-likelihood of the true labels, probabilities clipped to
// [1e-15, 1 - 1e-15]. Lower is better.
double log_loss(const Matrix& proba, const std::vector<int>& labels);

// Fits a candidate configuration on (X, y) and returns class probabilities
// for the validation rows. The Rng is a fresh derived stream per fit.
using HpoFitFn = std::function<Matrix(const ParamSet&, const Matrix& X,
                                      const std::vector<int>& y, const Matrix& X_val, Rng&)>;

struct HpoResult {
  ParamSet best;
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<double> scores;  // cross-validated score per candidate, in sample order
};

// Uniform random search: draws n_iter configurations from `space`, scores each
// by mean negative log-loss across stratified folds (higher score = better),
// and returns the argmax. Ties keep the earliest candidate.
HpoResult random_search_hpo(const ParamSpace& space, const HpoFitFn& fit, const Matrix& X,
                            const std::vector<int>& labels, int n_iter, int n_folds, Rng& rng);

}  // namespace perfband::learn
