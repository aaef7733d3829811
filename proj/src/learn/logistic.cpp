#include "perfband/learn/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace perfband::learn {

namespace {

// Softmax scores for one row, written into `p` (log-sum-exp stabilized).
void softmax_row(const Matrix& W, std::span<const double> x, std::vector<double>& p) {
  std::size_t K = W.rows;
  std::size_t d = x.size();
  p.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    double s = W.at(k, d);  // intercept
    for (std::size_t j = 0; j < d; ++j) s += W.at(k, j) * x[j];
    p[k] = s;
  }
  double mx = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (auto& v : p) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (auto& v : p) v /= sum;
}

double dot_all(const Matrix& a, const Matrix& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
  return s;
}

double sq_norm_diff(const Matrix& a, const Matrix& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    double d = a.data[i] - b.data[i];
    s += d * d;
  }
  return s;
}

}  // namespace

void LogisticModel::fit(const Matrix& X, const std::vector<int>& labels, int n_classes_,
                        std::uint64_t seed) {
  (void)seed;  // deterministic optimizer; kept for interface uniformity
  if (X.rows == 0 || X.rows != labels.size())
    throw std::invalid_argument("LogisticModel::fit: bad shapes");
  if (n_classes_ < 2) throw std::invalid_argument("LogisticModel::fit: need >= 2 classes");
  bool all_same = std::all_of(labels.begin(), labels.end(),
                              [&](int y) { return y == labels[0]; });
  if (all_same) throw std::invalid_argument("LogisticModel::fit: single-class labels");
  if (params.C <= 0.0) throw std::invalid_argument("LogisticModel::fit: C must be positive");

  n_classes = n_classes_;
  const std::size_t n = X.rows;
  const std::size_t d = X.cols;
  const std::size_t K = static_cast<std::size_t>(n_classes);
  const double inv_n = 1.0 / static_cast<double>(n);
  const double reg = 1.0 / (params.C * static_cast<double>(n));
  const bool l1 = params.penalty == Penalty::l1;

  // Mean cross entropy plus the l2 term (the l1 term is handled by prox).
  std::vector<double> p;
  auto smooth_value = [&](const Matrix& W) {
    double loss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      softmax_row(W, X.row(r), p);
      loss -= std::log(std::max(p[static_cast<std::size_t>(labels[r])], 1e-300));
    }
    loss *= inv_n;
    if (!l1) {
      double sq = 0.0;
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < d; ++j) sq += W.at(k, j) * W.at(k, j);
      loss += 0.5 * reg * sq;
    }
    return loss;
  };
  auto smooth_grad = [&](const Matrix& W, Matrix& G) {
    G = Matrix(K, d + 1);
    for (std::size_t r = 0; r < n; ++r) {
      auto x = X.row(r);
      softmax_row(W, x, p);
      p[static_cast<std::size_t>(labels[r])] -= 1.0;
      for (std::size_t k = 0; k < K; ++k) {
        double coeff = p[k] * inv_n;
        if (coeff == 0.0) continue;
        for (std::size_t j = 0; j < d; ++j) G.at(k, j) += coeff * x[j];
        G.at(k, d) += coeff;
      }
    }
    if (!l1) {
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < d; ++j) G.at(k, j) += reg * W.at(k, j);
    }
  };
  auto full_objective = [&](const Matrix& W) {
    double v = smooth_value(W);
    if (l1) {
      double abs_sum = 0.0;
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < d; ++j) abs_sum += std::abs(W.at(k, j));
      v += reg * abs_sum;
    }
    return v;
  };
  auto prox = [&](const Matrix& V, double eta) {
    if (!l1) return V;
    Matrix out = V;
    double thr = eta * reg;
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t j = 0; j < d; ++j) {
        double v = out.at(k, j);
        out.at(k, j) = v > thr ? v - thr : (v < -thr ? v + thr : 0.0);
      }
    }
    return out;
  };

  Matrix W(K, d + 1), W_prev(K, d + 1), G;
  double t_prev = 1.0, t_cur = 1.0;
  double eta = 1.0;
  double obj = full_objective(W);

  for (int iter = 0; iter < params.max_iter; ++iter) {
    double theta = (t_prev - 1.0) / t_cur;
    Matrix Z = W;
    if (theta > 0.0) {
      for (std::size_t i = 0; i < Z.data.size(); ++i)
        Z.data[i] += theta * (W.data[i] - W_prev.data[i]);
    }
    double fZ = smooth_value(Z);
    smooth_grad(Z, G);

    Matrix W_cand;
    while (true) {
      Matrix step = Z;
      for (std::size_t i = 0; i < step.data.size(); ++i) step.data[i] -= eta * G.data[i];
      W_cand = prox(step, eta);
      Matrix diff = W_cand;
      for (std::size_t i = 0; i < diff.data.size(); ++i) diff.data[i] -= Z.data[i];
      double quad = fZ + dot_all(G, diff) + sq_norm_diff(W_cand, Z) / (2.0 * eta);
      if (smooth_value(W_cand) <= quad + 1e-12) break;
      eta *= 0.5;
      if (eta < 1e-16) break;
    }

    double map_norm = std::sqrt(sq_norm_diff(Z, W_cand)) / eta;
    W_prev = W;
    W = std::move(W_cand);

    double new_obj = full_objective(W);
    if (new_obj > obj + 1e-12) {
      // Momentum overshoot: restart acceleration from the current point.
      t_prev = t_cur = 1.0;
      W_prev = W;
    } else {
      t_prev = t_cur;
      t_cur = (1.0 + std::sqrt(1.0 + 4.0 * t_prev * t_prev)) / 2.0;
    }
    obj = new_obj;

    if (map_norm <= params.tol) break;
    eta = std::min(eta * 1.1, 1e6);
  }
  weights = std::move(W);
}

Matrix LogisticModel::predict_proba(const Matrix& X) const {
  if (weights.rows == 0) throw std::logic_error("LogisticModel: not fitted");
  if (X.cols + 1 != weights.cols)
    throw std::invalid_argument("LogisticModel::predict_proba: dimension mismatch");
  Matrix out(X.rows, static_cast<std::size_t>(n_classes));
  std::vector<double> p;
  for (std::size_t r = 0; r < X.rows; ++r) {
    softmax_row(weights, X.row(r), p);
    for (std::size_t k = 0; k < p.size(); ++k) out.at(r, k) = p[k];
  }
  return out;
}

std::vector<int> LogisticModel::predict(const Matrix& X) const {
  Matrix proba = predict_proba(X);
  std::vector<int> out(proba.rows);
  for (std::size_t r = 0; r < proba.rows; ++r) {
    auto row = proba.row(r);
    int best = 0;
    for (std::size_t k = 1; k < row.size(); ++k)
      if (row[k] > row[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
    out[r] = best;
  }
  return out;
}

double LogisticModel::objective(const Matrix& X, const std::vector<int>& labels) const {
  const std::size_t d = X.cols;
  const double reg = 1.0 / (params.C * static_cast<double>(X.rows));
  double loss = 0.0;
  std::vector<double> p;
  for (std::size_t r = 0; r < X.rows; ++r) {
    softmax_row(weights, X.row(r), p);
    loss -= std::log(std::max(p[static_cast<std::size_t>(labels[r])], 1e-300));
  }
  loss /= static_cast<double>(X.rows);
  double r_term = 0.0;
  for (std::size_t k = 0; k < weights.rows; ++k) {
    for (std::size_t j = 0; j < d; ++j) {
      double w = weights.at(k, j);
      r_term += params.penalty == Penalty::l1 ? std::abs(w) : 0.5 * w * w;
    }
  }
  return loss + reg * r_term;
}

}  // namespace perfband::learn
