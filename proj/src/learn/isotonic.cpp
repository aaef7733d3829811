#include "perfband/learn/isotonic.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace perfband::learn {

double IsotonicMap::operator()(double value) const {
  if (identity) return value;
  if (value <= x.front()) return y.front();
  if (value >= x.back()) return y.back();
  auto it = std::upper_bound(x.begin(), x.end(), value);
  std::size_t hi = static_cast<std::size_t>(it - x.begin());
  std::size_t lo = hi - 1;
  double t = (value - x[lo]) / (x[hi] - x[lo]);
  return y[lo] + t * (y[hi] - y[lo]);
}

IsotonicMap fit_isotonic(const std::vector<double>& inputs, const std::vector<double>& targets,
                         const std::vector<double>& weights) {
  if (inputs.empty()) throw std::invalid_argument("fit_isotonic: empty input");
  if (inputs.size() != targets.size())
    throw std::invalid_argument("fit_isotonic: size mismatch");
  if (!weights.empty() && weights.size() != inputs.size())
    throw std::invalid_argument("fit_isotonic: weight size mismatch");

  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (inputs[a] != inputs[b]) return inputs[a] < inputs[b];
    return a < b;
  });

  // Collapse duplicate x values to their weighted mean target.
  std::vector<double> xs, ys, ws;
  for (std::size_t idx : order) {
    double w = weights.empty() ? 1.0 : weights[idx];
    if (!xs.empty() && xs.back() == inputs[idx]) {
      double total = ws.back() + w;
      ys.back() = (ys.back() * ws.back() + targets[idx] * w) / total;
      ws.back() = total;
    } else {
      xs.push_back(inputs[idx]);
      ys.push_back(targets[idx]);
      ws.push_back(w);
    }
  }

  IsotonicMap map;
  if (xs.size() < 2) {
    map.identity = true;
    return map;
  }

  // Pool adjacent violators over blocks of equal fitted value.
  struct Block {
    double value;
    double weight;
    std::size_t hi;  // exclusive end index into xs
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    blocks.push_back({ys[i], ws[i], i + 1});
    while (blocks.size() >= 2 &&
           blocks[blocks.size() - 2].value >= blocks.back().value) {
      Block top = blocks.back();
      blocks.pop_back();
      Block& prev = blocks.back();
      double total = prev.weight + top.weight;
      prev.value = (prev.value * prev.weight + top.value * top.weight) / total;
      prev.weight = total;
      prev.hi = top.hi;
    }
  }

  map.x = xs;
  map.y.resize(xs.size());
  std::size_t lo = 0;
  for (const auto& block : blocks) {
    for (std::size_t i = lo; i < block.hi; ++i) map.y[i] = block.value;
    lo = block.hi;
  }
  return map;
}

}  // namespace perfband::learn
