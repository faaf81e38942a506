#pragma once

#include <span>
#include <vector>

namespace hbship {

double mean(std::span<const double> xs);
/// Unbiased sample variance; 0 for fewer than two values.
double variance(std::span<const double> xs);
double stddev(std::span<const double> xs);

/// Empirical quantile with linear interpolation between order statistics
/// (h = (n-1)p, the "type 7" convention). Throws on empty input or p outside [0, 1].
double quantile(std::span<const double> xs, double p);
/// Same, for several probabilities at once; sorts a single copy.
std::vector<double> quantiles(std::span<const double> xs, std::span<const double> probs);
/// `quantile` on data that is already sorted ascending.
double quantile_sorted(std::span<const double> sorted, double p);

double median(std::span<const double> xs);

}  // namespace hbship
