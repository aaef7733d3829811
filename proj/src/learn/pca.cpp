#include "perfband/learn/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace perfband::learn {

namespace {

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
// eigenvalues in `diag` and eigenvectors as columns of `V`.
void jacobi_eigen(Matrix a, std::vector<double>& diag, Matrix& V) {
  const std::size_t n = a.rows;
  V = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) V.at(i, i) = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a.at(p, q) * a.at(p, q);
    if (off < 1e-24) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = a.at(p, q);
        if (std::abs(apq) < 1e-30) continue;
        double app = a.at(p, p);
        double aqq = a.at(q, q);
        double phi = 0.5 * std::atan2(2.0 * apq, aqq - app);
        double c = std::cos(phi);
        double s = std::sin(phi);
        for (std::size_t k = 0; k < n; ++k) {
          double akp = a.at(k, p);
          double akq = a.at(k, q);
          a.at(k, p) = c * akp - s * akq;
          a.at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double apk = a.at(p, k);
          double aqk = a.at(q, k);
          a.at(p, k) = c * apk - s * aqk;
          a.at(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double vkp = V.at(k, p);
          double vkq = V.at(k, q);
          V.at(k, p) = c * vkp - s * vkq;
          V.at(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  diag.resize(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = a.at(i, i);
}

}  // namespace

PcaModel PcaModel::fit(const Matrix& X, int n_components) {
  if (X.rows < 2) throw std::invalid_argument("PcaModel::fit: need at least two rows");
  if (n_components < 1) throw std::invalid_argument("PcaModel::fit: need >= 1 component");
  const std::size_t d = X.cols;
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(n_components), d);

  PcaModel model;
  model.center.assign(d, 0.0);
  for (std::size_t r = 0; r < X.rows; ++r) {
    auto row = X.row(r);
    for (std::size_t j = 0; j < d; ++j) model.center[j] += row[j];
  }
  for (auto& c : model.center) c /= static_cast<double>(X.rows);

  Matrix cov(d, d);
  for (std::size_t r = 0; r < X.rows; ++r) {
    auto row = X.row(r);
    for (std::size_t i = 0; i < d; ++i) {
      double xi = row[i] - model.center[i];
      for (std::size_t j = i; j < d; ++j)
        cov.at(i, j) += xi * (row[j] - model.center[j]);
    }
  }
  double denom = static_cast<double>(X.rows - 1);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      cov.at(i, j) /= denom;
      cov.at(j, i) = cov.at(i, j);
    }

  std::vector<double> eigvals;
  Matrix V;
  jacobi_eigen(cov, eigvals, V);

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return eigvals[a] > eigvals[b]; });

  model.components = Matrix(k, d);
  model.eigenvalues.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t src = order[c];
    model.eigenvalues[c] = eigvals[src];
    auto comp = model.components.row(c);
    for (std::size_t j = 0; j < d; ++j) comp[j] = V.at(j, src);
    // Sign convention: largest-magnitude loading is positive.
    std::size_t arg = 0;
    for (std::size_t j = 1; j < d; ++j)
      if (std::abs(comp[j]) > std::abs(comp[arg])) arg = j;
    if (comp[arg] < 0.0) {
      for (auto& v : comp) v = -v;
    }
  }
  return model;
}

Matrix PcaModel::transform(const Matrix& X) const {
  if (X.cols != center.size())
    throw std::invalid_argument("PcaModel::transform: dimension mismatch");
  Matrix out(X.rows, components.rows);
  for (std::size_t r = 0; r < X.rows; ++r) {
    auto row = X.row(r);
    for (std::size_t c = 0; c < components.rows; ++c) {
      double s = 0.0;
      auto comp = components.row(c);
      for (std::size_t j = 0; j < row.size(); ++j) s += (row[j] - center[j]) * comp[j];
      out.at(r, c) = s;
    }
  }
  return out;
}

std::vector<double> PcaModel::project(const Matrix& X, int component) const {
  if (component < 0 || static_cast<std::size_t>(component) >= components.rows)
    throw std::invalid_argument("PcaModel::project: bad component index");
  Matrix t = transform(X);
  std::vector<double> out(t.rows);
  for (std::size_t r = 0; r < t.rows; ++r) out[r] = t.at(r, static_cast<std::size_t>(component));
  return out;
}

std::vector<double> pca_top_projection(const Matrix& X) {
  PcaModel model = PcaModel::fit(X, 1);
  if (model.eigenvalues.empty() || model.eigenvalues[0] <= 1e-12)
    throw std::invalid_argument("pca_top_projection: data has no variance");
  return model.project(X, 0);
}

}  // namespace perfband::learn
