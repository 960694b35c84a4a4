#pragma once

// Directional statistics on the doubled-angle circle.

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "anigrowth/core.hpp"

namespace anigrowth {

/// Angles on the full circle, reduced to [-pi, pi). Axial data (gamma in
/// [0, pi)) enter through `from_axes`, which doubles them.
class AngleSample {
 public:
  AngleSample() = default;
  explicit AngleSample(std::vector<double> angles) : values_(std::move(angles)) {
    for (auto& a : values_) {
      if (!std::isfinite(a)) throw InvalidInput("angles must be finite");
      a = wrap_pi(a);
    }
  }

  static AngleSample from_axes(std::span<const double> axes) {
    std::vector<double> doubled;
    doubled.reserve(axes.size());
    for (double g : axes) doubled.push_back(2.0 * g);
    return AngleSample(std::move(doubled));
  }

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Sum of the unit vectors e^{i theta_j}.
  Complex resultant() const {
    Complex s{0.0, 0.0};
    for (double a : values_) s += unit(a);
    return s;
  }

 private:
  std::vector<double> values_;
};

inline constexpr double kUndefinedMeanThreshold = 1e-12;

/// |sum e^{i theta_j}| / m.
inline double resultant_length(const AngleSample& sample) {
  if (sample.empty()) throw InvalidInput("resultant length of an empty sample");
  return std::min(1.0, std::abs(sample.resultant()) / static_cast<double>(sample.size()));
}

/// Arg of the summed unit vectors, in [-pi, pi). Also the von Mises MLE of
/// the location.
inline double extrinsic_mean(const AngleSample& sample) {
  if (sample.empty()) throw InvalidInput("extrinsic mean of an empty sample");
  const Complex s = sample.resultant();
  if (std::abs(s) / static_cast<double>(sample.size()) < kUndefinedMeanThreshold) {
    throw NumericalFailure("extrinsic mean undefined: resultant length vanishes");
  }
  return wrap_pi(std::arg(s));
}

struct CircularSummary {
  double resultant_length = 0.0;
  std::optional<double> extrinsic_mean;  // empty when the resultant vanishes
  double kappa_hat = 0.0;
};

/// Modified Bessel function I0 by its power series sum (x/2)^{2k}/(k!)^2,
/// stopped when a term drops below 1e-15 of the partial sum. Finite up to
/// kappa ~ 700.
inline double bessel_i0(double kappa) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw InvalidInput("bessel_i0 needs finite kappa >= 0");
  const double q = 0.25 * kappa * kappa;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 100000; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-15 * sum) break;
  }
  return sum;
}

/// e^{-kappa} I0(kappa), finite for all kappa >= 0. Large arguments use the
/// Hankel asymptotic expansion.
inline double bessel_i0_scaled(double kappa) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw InvalidInput("bessel_i0 needs finite kappa >= 0");
  if (kappa <= 500.0) return bessel_i0(kappa) * std::exp(-kappa);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 30; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= odd * odd / (8.0 * k * kappa);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum / std::sqrt(kTwoPi * kappa);
}

/// Approximate concentration MLE from the mean resultant length; three
/// branches with half-open breakpoints 0.53 and 0.85.
inline double kappa_hat(double r) {
  if (!(r >= 0.0)) throw InvalidInput("resultant length must be >= 0");
  if (!(r < 1.0)) throw InvalidInput("kappa_hat undefined for resultant length >= 1");
  if (r < 0.53) return 2.0 * r + r * r * r + 5.0 / 6.0 * std::pow(r, 5);
  if (r < 0.85) return -0.4 + 1.39 * r + 0.43 / (1.0 - r);
  return 1.0 / (2.0 * (1.0 - r));
}

inline CircularSummary summarize(const AngleSample& sample) {
  CircularSummary s;
  s.resultant_length = resultant_length(sample);
  if (s.resultant_length >= kUndefinedMeanThreshold) s.extrinsic_mean = extrinsic_mean(sample);
  s.kappa_hat = s.resultant_length < 1.0 ? kappa_hat(s.resultant_length) : INFINITY;
  return s;
}

/// von Mises density of an axis gamma with respect to dgamma/pi on the half
/// circle: exp(kappa cos(2 gamma - mu)) / I0(kappa).
inline double von_mises_halfcircle_density(double gamma, double mu, double kappa) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw InvalidInput("kappa must be finite and >= 0");
  if (!std::isfinite(gamma) || !std::isfinite(mu)) throw InvalidInput("angles must be finite");
  return std::exp(kappa * (std::cos(2.0 * gamma - mu) - 1.0)) / bessel_i0_scaled(kappa);
}

struct RoseBin {
  double center = 0.0;
  std::size_t count = 0;
};

/// Equal-width bins partitioning [-pi, pi).
inline std::vector<RoseBin> rose_bins(const AngleSample& sample, int bin_count = 24) {
  if (bin_count < 2) throw InvalidInput("rose diagram needs at least 2 bins");
  const double width = kTwoPi / bin_count;
  std::vector<RoseBin> bins(static_cast<std::size_t>(bin_count));
  for (int b = 0; b < bin_count; ++b) bins[b].center = -kPi + (b + 0.5) * width;
  for (double a : sample.values()) {
    auto idx = static_cast<long>(std::floor((a + kPi) / width));
    idx = std::clamp(idx, 0L, static_cast<long>(bin_count) - 1);
    ++bins[static_cast<std::size_t>(idx)].count;
  }
  return bins;
}

/// Draws from the von Mises distribution on the full circle (Best & Fisher
/// rejection sampler). kappa = 0 gives the uniform distribution.
template <typename Rng>
double sample_von_mises(double mu, double kappa, Rng& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  if (kappa < 1e-8) return wrap_pi(mu + kTwoPi * uni(rng) - kPi);
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  for (;;) {
    const double u1 = uni(rng);
    const double z = std::cos(kPi * u1);
    const double f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    const double u2 = uni(rng);
    if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
      const double u3 = uni(rng);
      const double theta = u3 > 0.5 ? std::acos(f) : -std::acos(f);
      return wrap_pi(mu + theta);
    }
  }
}

}  // namespace anigrowth
