#pragma once

#include <vector>

#include "perfband/common/matrix.hpp"

namespace perfband::learn {

// Per-class Gaussian kernel density estimate. The score of a point is the
// highest class-conditional density.
struct ClassKde {
  double bandwidth = 0.2;
  std::vector<Matrix> class_points;  // one matrix per class

  static ClassKde fit(const Matrix& X, const std::vector<int>& labels, int n_classes,
                      double bandwidth);

  double class_density(std::span<const double> x, int cls) const;
  double max_class_density(std::span<const double> x) const;

  bool operator==(const ClassKde&) const = default;
};

// Mean Euclidean distance to the k nearest reference points; small values
// mean the query looks like the reference set.
struct KnnOutlierScorer {
  int k = 10;
  Matrix reference;

  static KnnOutlierScorer fit(const Matrix& reference, int k);

  double score(std::span<const double> x) const;

  bool operator==(const KnnOutlierScorer&) const = default;
};

}  // namespace perfband::learn
