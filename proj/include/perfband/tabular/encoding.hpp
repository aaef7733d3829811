#pragma once

#include <string>
#include <vector>

#include "perfband/common/matrix.hpp"
#include "perfband/tabular/dataset.hpp"

namespace perfband::tabular {

// Feature-matrix encodings fitted on a training subset and applied to any
// subset of rows.
//
//   tree:     numeric columns imputed with the train median; categorical
//             columns kept as integer codes (one output column each).
//   linear:   numeric columns imputed then standardized to train mean/stdev;
//             categorical columns one-hot expanded over the dictionary
//             (unseen codes produce an all-zero block).
//   distance: like linear, with one-hot indicators scaled by 1/sqrt(2) so a
//             category change contributes distance 1 under the Euclidean
//             metric.
enum class EncodeMode { tree, linear, distance };

struct Encoder {
  EncodeMode mode = EncodeMode::tree;
  std::vector<double> medians;  // per input column (0 for categorical slots)
  std::vector<double> means;
  std::vector<double> stds;     // 0 marks a constant column; such columns map to 0
  std::vector<ColumnMeta> columns;

  static Encoder fit(const Dataset& data, const std::vector<int>& train_rows, EncodeMode mode);

  std::size_t out_dim() const;
  Matrix transform(const Dataset& data, const std::vector<int>& rows) const;
  std::vector<std::string> feature_names() const;

  bool operator==(const Encoder&) const = default;
};

}  // namespace perfband::tabular
