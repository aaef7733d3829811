#pragma once

#include <cstdint>
#include <vector>
#include <vector>

namespace perfband::tabular {

enum class OutOfRange { clip, drop };

// Binning specification: either strictly increasing numeric edges (half-open
// bins [e_i, e_{i+1}), final bin closed) or one bin per categorical code.
struct BinSpec {
  std::vector<double> edges;
  int categories = 0;
  OutOfRange policy = OutOfRange::clip;

  static BinSpec from_edges(std::vector<double> edges, OutOfRange policy = OutOfRange::clip);
  static BinSpec uniform(double lo, double hi, int nbins, OutOfRange policy = OutOfRange::clip);
  static BinSpec categorical(int n_categories);

  std::size_t bins() const;
  // Bin index for a value, or -1 when the value falls outside the range and
  // the policy is drop.
  int bin_index(double value) const;

  bool operator==(const BinSpec&) const = default;
};

struct Histogram {
  BinSpec spec;
  std::vector<std::int64_t> counts;
  std::vector<double> mass;  // counts normalized over included values
  std::int64_t included = 0;
};

// Histogram of values under the binning. Throws on empty input, on a binning
// with no bins, and when every value is dropped by an out-of-range policy.
Histogram build_histogram(const std::vector<double>& values, const BinSpec& spec);

}  // namespace perfband::tabular
