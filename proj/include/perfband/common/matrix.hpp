#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace perfband {

// Dense row-major matrix of doubles. Deliberately minimal: the learners only
// need row access and element indexing.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) {
    assert(r < rows && c < cols);
    return data[r * cols + c];
  }
  double at(std::size_t r, std::size_t c) const {
    assert(r < rows && c < cols);
    return data[r * cols + c];
  }

  std::span<double> row(std::size_t r) {
    return std::span<double>(data.data() + r * cols, cols);
  }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data.data() + r * cols, cols);
  }

  // Matrix with the given subset of rows, in the given order.
  Matrix select_rows(const std::vector<int>& indices) const {
    Matrix out(indices.size(), cols);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      auto src = row(static_cast<std::size_t>(indices[i]));
      std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
  }

  bool operator==(const Matrix& other) const = default;
};

}  // namespace perfband
