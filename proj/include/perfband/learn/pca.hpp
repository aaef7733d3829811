#pragma once

#include <vector>

#include "perfband/common/matrix.hpp"

namespace perfband::learn {

// Principal components of the sample covariance, via Jacobi rotation of the
// covariance matrix. Component signs are fixed so the largest-magnitude
// loading is positive.
struct PcaModel {
  std::vector<double> center;
  Matrix components;                // n_components x dim, unit rows
  std::vector<double> eigenvalues;  // descending

  static PcaModel fit(const Matrix& X, int n_components);

  Matrix transform(const Matrix& X) const;
  // Projection onto a single component.
  std::vector<double> project(const Matrix& X, int component) const;

  bool operator==(const PcaModel&) const = default;
};

// Convenience: projection of X onto its own top component. Throws when the
// data has no variance.
std::vector<double> pca_top_projection(const Matrix& X);

}  // namespace perfband::learn
