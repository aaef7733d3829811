#pragma once

#include <span>
#include <vector>

namespace perfband {

double mean(std::span<const double> v);

// ddof = 0 gives the population variance, ddof = 1 the sample variance.
double variance(std::span<const double> v, int ddof = 0);
double stdev(std::span<const double> v, int ddof = 0);

// Linear-interpolation quantile (the common "type 7" definition) of an
// unsorted sample. q in [0, 1].
double quantile(std::vector<double> values, double q);

// Shannon entropy in nats of a probability vector; zero entries contribute 0.
double entropy_nats(std::span<const double> probs);

// Inverse standard normal CDF. Accurate to ~1e-15 after one Halley step.
double normal_quantile(double p);

// Two-sided standard normal quantile for a central interval of mass `level`,
// i.e. normal_quantile((1 + level) / 2).
double two_sided_normal_quantile(double level);

}  // namespace perfband
