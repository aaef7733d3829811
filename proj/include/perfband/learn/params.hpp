#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "perfband/common/rng.hpp"

namespace perfband::learn {

using ParamValue = std::variant<double, std::string>;
using ParamSet = std::map<std::string, ParamValue>;

double param_num(const ParamSet& params, const std::string& name, double fallback);
std::string param_str(const ParamSet& params, const std::string& name,
                      const std::string& fallback);

// One dimension of a search space: either a finite list of candidate values
// or an inclusive integer range.
struct ParamRange {
  std::vector<ParamValue> choices;
  bool is_int_range = false;
  long lo = 0;
  long hi = 0;

  static ParamRange values(std::vector<double> nums);
  static ParamRange labels(std::vector<std::string> strs);
  static ParamRange integers(long lo, long hi);
  static ParamRange linspace(double lo, double hi, int count);
  static ParamRange logspace(double exp_lo, double exp_hi, int count);  // base 10

  ParamValue sample(Rng& rng) const;
};

using ParamSpace = std::vector<std::pair<std::string, ParamRange>>;

ParamSet sample_params(const ParamSpace& space, Rng& rng);

}  // namespace perfband::learn
