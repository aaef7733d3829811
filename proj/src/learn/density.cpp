#include "perfband/learn/density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace perfband::learn {

ClassKde ClassKde::fit(const Matrix& X, const std::vector<int>& labels, int n_classes,
                       double bandwidth) {
  if (X.rows == 0 || X.rows != labels.size())
    throw std::invalid_argument("ClassKde::fit: bad shapes");
  if (bandwidth <= 0.0) throw std::invalid_argument("ClassKde::fit: bandwidth must be positive");
  ClassKde kde;
  kde.bandwidth = bandwidth;
  std::vector<std::vector<int>> rows_of(static_cast<std::size_t>(n_classes));
  for (std::size_t r = 0; r < X.rows; ++r)
    rows_of[static_cast<std::size_t>(labels[r])].push_back(static_cast<int>(r));
  for (auto& rows : rows_of) kde.class_points.push_back(X.select_rows(rows));
  return kde;
}

double ClassKde::class_density(std::span<const double> x, int cls) const {
  const Matrix& pts = class_points[static_cast<std::size_t>(cls)];
  if (pts.rows == 0) return 0.0;
  const double h2 = bandwidth * bandwidth;
  const std::size_t d = pts.cols;
  double sum = 0.0;
  for (std::size_t r = 0; r < pts.rows; ++r) {
    auto p = pts.row(r);
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      double diff = x[j] - p[j];
      sq += diff * diff;
    }
    sum += std::exp(-sq / (2.0 * h2));
  }
  double norm = std::pow(2.0 * M_PI * h2, static_cast<double>(d) / 2.0);
  return sum / (static_cast<double>(pts.rows) * norm);
}

double ClassKde::max_class_density(std::span<const double> x) const {
  double best = 0.0;
  for (std::size_t cls = 0; cls < class_points.size(); ++cls)
    best = std::max(best, class_density(x, static_cast<int>(cls)));
  return best;
}

KnnOutlierScorer KnnOutlierScorer::fit(const Matrix& reference, int k) {
  if (reference.rows == 0) throw std::invalid_argument("KnnOutlierScorer: empty reference");
  if (k < 1) throw std::invalid_argument("KnnOutlierScorer: k must be positive");
  KnnOutlierScorer scorer;
  scorer.k = std::min<int>(k, static_cast<int>(reference.rows));
  scorer.reference = reference;
  return scorer;
}

double KnnOutlierScorer::score(std::span<const double> x) const {
  std::vector<double> dists(reference.rows);
  for (std::size_t r = 0; r < reference.rows; ++r) {
    auto p = reference.row(r);
    double sq = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      double diff = x[j] - p[j];
      sq += diff * diff;
    }
    dists[r] = std::sqrt(sq);
  }
  std::size_t kk = static_cast<std::size_t>(k);
  std::partial_sort(dists.begin(), dists.begin() + static_cast<long>(kk), dists.end());
  double s = 0.0;
  for (std::size_t i = 0; i < kk; ++i) s += dists[i];
  return s / static_cast<double>(kk);
}

}  // namespace perfband::learn
