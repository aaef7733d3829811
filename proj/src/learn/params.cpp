#include "perfband/learn/params.hpp"

#include <cmath>

namespace perfband::learn {

double param_num(const ParamSet& params, const std::string& name, double fallback) {
  auto it = params.find(name);
  if (it == params.end()) return fallback;
  if (const double* v = std::get_if<double>(&it->second)) return *v;
  throw std::invalid_argument("param '" + name + "': expected a number");
}

std::string param_str(const ParamSet& params, const std::string& name,
                      const std::string& fallback) {
  auto it = params.find(name);
  if (it == params.end()) return fallback;
  if (const std::string* v = std::get_if<std::string>(&it->second)) return *v;
  // Numeric values are accepted where a label is expected ("max_depth": 4).
  return std::to_string(std::get<double>(it->second));
}

ParamRange ParamRange::values(std::vector<double> nums) {
  if (nums.empty()) throw std::invalid_argument("ParamRange: empty value list");
  ParamRange r;
  for (double v : nums) r.choices.emplace_back(v);
  return r;
}

ParamRange ParamRange::labels(std::vector<std::string> strs) {
  if (strs.empty()) throw std::invalid_argument("ParamRange: empty label list");
  ParamRange r;
  for (auto& s : strs) r.choices.emplace_back(std::move(s));
  return r;
}

ParamRange ParamRange::integers(long lo, long hi) {
  if (hi < lo) throw std::invalid_argument("ParamRange: empty integer range");
  ParamRange r;
  r.is_int_range = true;
  r.lo = lo;
  r.hi = hi;
  return r;
}

ParamRange ParamRange::linspace(double lo, double hi, int count) {
  if (count < 2) throw std::invalid_argument("ParamRange::linspace: count must be >= 2");
  std::vector<double> vals(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    vals[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  return values(std::move(vals));
}

ParamRange ParamRange::logspace(double exp_lo, double exp_hi, int count) {
  if (count < 2) throw std::invalid_argument("ParamRange::logspace: count must be >= 2");
  std::vector<double> vals(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    double e = exp_lo + (exp_hi - exp_lo) * static_cast<double>(i) / (count - 1);
    vals[static_cast<std::size_t>(i)] = std::pow(10.0, e);
  }
  return values(std::move(vals));
}

ParamValue ParamRange::sample(Rng& rng) const {
  if (is_int_range) return static_cast<double>(rng.uniform_int(lo, hi));
  return choices[rng.uniform_index(choices.size())];
}

ParamSet sample_params(const ParamSpace& space, Rng& rng) {
  ParamSet out;
  for (const auto& [name, range] : space) out[name] = range.sample(rng);
  return out;
}

}  // namespace perfband::learn
