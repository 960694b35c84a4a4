#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "anigrowth/core.hpp"

namespace anigrowth {

/// Sample quantile by linear interpolation between order statistics at
/// position h = (m - 1) q (Hyndman-Fan type 7).
inline double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw InvalidInput("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidInput("quantile level must lie in [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double median(std::span<const double> values) { return quantile(values, 0.5); }

inline double mean(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("mean of an empty sample");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

/// Unbiased sample variance (divisor m - 1).
inline double sample_variance(std::span<const double> values) {
  if (values.size() < 2) throw InvalidInput("variance needs at least two values");
  const double m = mean(values);
  double s = 0.0;
  for (double v : values) s += (v - m) * (v - m);
  return s / static_cast<double>(values.size() - 1);
}

struct FiveNumberSummary {
  double minimum = 0.0;
  double lower_quartile = 0.0;
  double median = 0.0;
  double upper_quartile = 0.0;
  double maximum = 0.0;
};

inline FiveNumberSummary five_number_summary(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("summary of an empty sample");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return {*lo, quantile(values, 0.25), quantile(values, 0.5), quantile(values, 0.75), *hi};
}

}  // namespace anigrowth
