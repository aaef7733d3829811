#include "perfband/tabular/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace perfband::tabular {

BinSpec BinSpec::from_edges(std::vector<double> edges, OutOfRange policy) {
  if (edges.size() < 2) throw std::invalid_argument("BinSpec: need at least two edges");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1]))
      throw std::invalid_argument("BinSpec: edges must be strictly increasing");
  }
  BinSpec spec;
  spec.edges = std::move(edges);
  spec.policy = policy;
  return spec;
}

BinSpec BinSpec::uniform(double lo, double hi, int nbins, OutOfRange policy) {
  if (nbins < 1) throw std::invalid_argument("BinSpec: nbins must be positive");
  if (!(hi > lo)) throw std::invalid_argument("BinSpec: hi must exceed lo");
  std::vector<double> edges(static_cast<std::size_t>(nbins) + 1);
  for (int i = 0; i <= nbins; ++i)
    edges[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / nbins;
  edges.back() = hi;
  return from_edges(std::move(edges), policy);
}

BinSpec BinSpec::categorical(int n_categories) {
  if (n_categories < 1) throw std::invalid_argument("BinSpec: need at least one category");
  BinSpec spec;
  spec.categories = n_categories;
  return spec;
}

std::size_t BinSpec::bins() const {
  if (categories > 0) return static_cast<std::size_t>(categories);
  return edges.empty() ? 0 : edges.size() - 1;
}

int BinSpec::bin_index(double value) const {
  if (categories > 0) {
    long code = std::lround(value);
    if (code < 0) return policy == OutOfRange::clip ? 0 : -1;
    if (code >= categories)
      return policy == OutOfRange::clip ? categories - 1 : -1;
    return static_cast<int>(code);
  }
  if (std::isnan(value)) return -1;
  if (value < edges.front()) return policy == OutOfRange::clip ? 0 : -1;
  if (value > edges.back())
    return policy == OutOfRange::clip ? static_cast<int>(bins()) - 1 : -1;
  if (value == edges.back()) return static_cast<int>(bins()) - 1;
  auto it = std::upper_bound(edges.begin(), edges.end(), value);
  return static_cast<int>(it - edges.begin()) - 1;
}

Histogram build_histogram(const std::vector<double>& values, const BinSpec& spec) {
  if (spec.bins() == 0) throw std::invalid_argument("build_histogram: empty binning");
  if (values.empty()) throw std::invalid_argument("build_histogram: empty sample");
  Histogram h;
  h.spec = spec;
  h.counts.assign(spec.bins(), 0);
  for (double v : values) {
    int idx = spec.bin_index(v);
    if (idx < 0) continue;
    h.counts[static_cast<std::size_t>(idx)]++;
    h.included++;
  }
  if (h.included == 0)
    throw std::invalid_argument("build_histogram: all values outside binning range");
  h.mass.resize(h.counts.size());
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    h.mass[i] = static_cast<double>(h.counts[i]) / static_cast<double>(h.included);
  return h;
}

}  // namespace perfband::tabular
