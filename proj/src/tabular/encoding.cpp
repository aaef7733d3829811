#include "perfband/tabular/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "perfband/common/stats.hpp"

namespace perfband::tabular {

namespace {

double finite_median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  if (v.empty()) return 0.0;
  return quantile(std::move(v), 0.5);
}

constexpr double kOneHotDistanceScale = 0.70710678118654752440;  // 1/sqrt(2)

}  // namespace

Encoder Encoder::fit(const Dataset& data, const std::vector<int>& train_rows, EncodeMode mode) {
  if (train_rows.empty()) throw std::invalid_argument("Encoder::fit: empty training subset");
  Encoder enc;
  enc.mode = mode;
  enc.columns = data.columns;
  enc.medians.assign(data.dim(), 0.0);
  enc.means.assign(data.dim(), 0.0);
  enc.stds.assign(data.dim(), 0.0);

  for (std::size_t c = 0; c < data.dim(); ++c) {
    if (data.columns[c].kind != ColumnKind::numeric) continue;
    std::vector<double> col;
    col.reserve(train_rows.size());
    for (int r : train_rows) col.push_back(data.values.at(static_cast<std::size_t>(r), c));
    enc.medians[c] = finite_median(col);
    if (mode == EncodeMode::tree) continue;
    for (auto& x : col) {
      if (std::isnan(x)) x = enc.medians[c];
    }
    enc.means[c] = mean(col);
    double sd = col.size() > 1 ? stdev(col, 0) : 0.0;
    enc.stds[c] = sd;
  }
  return enc;
}

std::size_t Encoder::out_dim() const {
  std::size_t d = 0;
  for (const auto& col : columns) {
    if (col.kind == ColumnKind::numeric || mode == EncodeMode::tree) d += 1;
    else d += col.categories.size();
  }
  return d;
}

Matrix Encoder::transform(const Dataset& data, const std::vector<int>& rows) const {
  if (data.dim() != columns.size())
    throw std::invalid_argument("Encoder::transform: column count mismatch");
  Matrix out(rows.size(), out_dim());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::size_t r = static_cast<std::size_t>(rows[i]);
    std::size_t o = 0;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      double v = data.values.at(r, c);
      if (columns[c].kind == ColumnKind::numeric) {
        if (std::isnan(v)) v = medians[c];
        if (mode == EncodeMode::tree) {
          out.at(i, o++) = v;
        } else {
          out.at(i, o++) = stds[c] > 0.0 ? (v - means[c]) / stds[c] : 0.0;
        }
      } else if (mode == EncodeMode::tree) {
        out.at(i, o++) = v;
      } else {
        std::size_t block = columns[c].categories.size();
        std::size_t code = static_cast<std::size_t>(v);
        double scale = mode == EncodeMode::distance ? kOneHotDistanceScale : 1.0;
        for (std::size_t k = 0; k < block; ++k)
          out.at(i, o + k) = (k == code) ? scale : 0.0;
        o += block;
      }
    }
  }
  return out;
}

std::vector<std::string> Encoder::feature_names() const {
  std::vector<std::string> names;
  for (const auto& col : columns) {
    if (col.kind == ColumnKind::numeric || mode == EncodeMode::tree) {
      names.push_back(col.name);
    } else {
      for (const auto& cat : col.categories) names.push_back(col.name + "=" + cat);
    }
  }
  return names;
}

}  // namespace perfband::tabular
