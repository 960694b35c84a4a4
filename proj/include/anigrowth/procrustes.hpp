#pragma once

// Growth estimation between matched minutiae patterns.
//
// Model: a centered query pattern results from a centered template by
//   z'_j = lambda e^{i beta} ( (2+tau)/2 z_j + tau/2 e^{2i gamma} conj(z_j) ),
// i.e. isotropic growth lambda, anisotropic stretch by (1+tau) along the axis
// w = e^{i gamma}, and rotation beta. The estimator minimizes the summed
// squared residual over (e^{2i gamma}, e^{i beta}, tau, lambda) by exact
// coordinate-wise minimization in the order beta, lambda, gamma, tau.

#include <cmath>
#include <map>
#include <span>
#include <vector>

#include "anigrowth/core.hpp"
#include "anigrowth/minutiae.hpp"

namespace anigrowth {

/// Growth and nuisance parameters. gamma is an axis in [0, pi), beta a
/// rotation in [-pi, pi), tau >= 0, lambda > 0.
struct GrowthParams {
  double gamma = 0.0;
  double beta = 0.0;
  double tau = 0.0;
  double lambda = 1.0;

  /// Normalizes the angles into their canonical ranges.
  static GrowthParams make(double gamma, double beta, double tau, double lambda) {
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw InvalidInput("tau must be finite and >= 0");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidInput("lambda must be finite and > 0");
    return {wrap_half_turn(gamma), wrap_pi(beta), tau, lambda};
  }

  /// Builds parameters from the unit-value representation (e^{2i gamma}, e^{i beta}).
  static GrowthParams from_units(Complex doubled_axis, Complex rotation, double tau, double lambda) {
    return make(0.5 * std::arg(doubled_axis), std::arg(rotation), tau, lambda);
  }

  Complex doubled_axis() const { return unit(2.0 * gamma); }
  Complex rotation() const { return unit(beta); }
};

/// Image of one point under the growth model.
inline Complex grow_point(Complex z, Complex doubled_axis, Complex rotation, double tau, double lambda) {
  return lambda * rotation * ((2.0 + tau) / 2.0 * z + tau / 2.0 * doubled_axis * std::conj(z));
}

inline Complex grow_point(Complex z, const GrowthParams& p) {
  return grow_point(z, p.doubled_axis(), p.rotation(), p.tau, p.lambda);
}

/// Applies the forward growth model to every point of a pattern.
inline MinutiaPattern apply_growth(const MinutiaPattern& pattern, const GrowthParams& params) {
  std::vector<Complex> out;
  out.reserve(pattern.size());
  for (const auto& z : pattern.points()) out.push_back(grow_point(z, params));
  return MinutiaPattern(std::move(out), pattern.finger_id(), pattern.impression_id());
}

struct SolverConfig {
  double epsilon = 1e-16;  // on the summed squared parameter increments
  int max_iterations = 1000;

  void validate() const {
    if (!(epsilon > 0.0)) throw InvalidInput("solver epsilon must be > 0");
    if (max_iterations < 1) throw InvalidInput("solver max_iterations must be >= 1");
  }
};

struct EstimateResult {
  GrowthParams params;
  int iterations = 0;
  double final_objective = 0.0;
  bool converged = false;
  /// tau-hat below 1e-8: the axis carries no information.
  bool gamma_meaningless = false;
  /// Template points (nearly) on a line: gamma weakly identified.
  bool collinear = false;
};

/// One row of an estimate table.
struct EstimateRow {
  GrowthParams params;
  std::size_t n = 0;
  int iterations = 0;
  double final_objective = 0.0;
  bool converged = true;
};

using EstimateTable = std::map<PairKey, EstimateRow>;

namespace detail {

// Retain the previous unit value when the maximizing sum vanishes relative to
// this multiple of sum_j |z_j||z'_j|.
inline constexpr double kUnitTieTolerance = 1e-14;
inline constexpr double kGammaMeaninglessTau = 1e-8;
inline constexpr double kLambdaFloor = 1e-12;

inline double cross_scale(std::span<const Complex> z, std::span<const Complex> zq) {
  double s = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) s += std::abs(z[j]) * std::abs(zq[j]);
  return s;
}

inline double squared_norm(std::span<const Complex> z) {
  double s = 0.0;
  for (const auto& v : z) s += std::norm(v);
  return s;
}

inline void require_same_length(std::span<const Complex> z, std::span<const Complex> zq) {
  if (z.size() != zq.size()) throw InvalidInput("template and query differ in length");
}

inline Complex normalized_or(Complex sum, double scale, Complex previous) {
  const double mag = std::abs(sum);
  if (!(mag > kUnitTieTolerance * scale)) return previous;
  return sum / mag;
}

inline double objective(std::span<const Complex> z, std::span<const Complex> zq, Complex doubled_axis,
                        Complex rotation, double tau, double lambda) {
  require_same_length(z, zq);
  double f = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    f += std::norm(zq[j] - grow_point(z[j], doubled_axis, rotation, tau, lambda));
  }
  return f;
}

/// Conditional minimizer in e^{i beta}: maximizes Re(e^{-i beta} sum_j z'_j conj(u_j))
/// with u_j the grown, unrotated template point.
inline Complex update_rotation(std::span<const Complex> z, std::span<const Complex> zq, Complex doubled_axis,
                               double tau, Complex previous) {
  require_same_length(z, zq);
  const double a = (2.0 + tau) / 2.0;
  const double b = tau / 2.0;
  Complex sum{0.0, 0.0};
  for (std::size_t j = 0; j < z.size(); ++j) {
    sum += zq[j] * std::conj(a * z[j] + b * doubled_axis * std::conj(z[j]));
  }
  return normalized_or(sum, (a + b) * cross_scale(z, zq), previous);
}

/// Conditional minimizer in lambda on [kLambdaFloor, inf): the least-squares
/// ratio, clamped. Right after a rotation update the ratio is never negative.
inline double update_isotropic(std::span<const Complex> z, std::span<const Complex> zq, Complex doubled_axis,
                               Complex rotation, double tau) {
  require_same_length(z, zq);
  const double a = (2.0 + tau) / 2.0;
  const double b = tau / 2.0;
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    const Complex v = rotation * (a * z[j] + b * doubled_axis * std::conj(z[j]));
    num += std::real(zq[j] * std::conj(v));
    den += std::norm(v);
  }
  if (!(den > 0.0)) throw DegenerateConfiguration("template pattern collapses to a point");
  const double ratio = num / den;
  return std::max(ratio, kLambdaFloor);
}

/// Conditional minimizer in e^{2i gamma}. For tau > 0 this is the exact
/// argmin; for tau = 0 the objective does not depend on gamma and the same
/// formula still yields a minimizer (and the direction tau would grow along).
inline Complex update_axis(std::span<const Complex> z, std::span<const Complex> zq, Complex rotation, double tau,
                           double lambda, Complex previous) {
  require_same_length(z, zq);
  const double a = (2.0 + tau) / 2.0;
  Complex sum{0.0, 0.0};
  for (std::size_t j = 0; j < z.size(); ++j) {
    sum += (zq[j] - lambda * rotation * a * z[j]) * z[j];
  }
  return normalized_or(std::conj(rotation) * sum, cross_scale(z, zq) + lambda * squared_norm(z), previous);
}

/// Conditional minimizer in tau, projected onto [0, inf).
inline double update_anisotropic(std::span<const Complex> z, std::span<const Complex> zq, Complex doubled_axis,
                                 Complex rotation, double lambda, double previous) {
  require_same_length(z, zq);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    // g_j = d(model)/d(tau) = lambda e^{i beta} <z_j, w> w
    const Complex g = lambda * rotation * 0.5 * (z[j] + doubled_axis * std::conj(z[j]));
    const Complex r = zq[j] - lambda * rotation * z[j];
    num += std::real(r * std::conj(g));
    den += std::norm(g);
  }
  // All template points on the line orthogonal to the axis: tau is not identified.
  if (!(den > 1e-24 * lambda * lambda * squared_norm(z))) return previous;
  return std::max(0.0, num / den);
}

inline bool is_collinear(std::span<const Complex> z) {
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& v : z) {
    sxx += v.real() * v.real();
    syy += v.imag() * v.imag();
    sxy += v.real() * v.imag();
  }
  const double tr = sxx + syy;
  const double det = sxx * syy - sxy * sxy;
  const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  const double lmax = 0.5 * tr + disc;
  const double lmin = 0.5 * tr - disc;
  return lmin <= 1e-12 * lmax;
}

inline void require_centered(const MatchedPair& pair) {
  if (!pair.centered()) throw InvalidInput("matched pair must be centered");
}

}  // namespace detail

/// Summed squared residual between the query and the grown template.
inline double distance_functional(const MatchedPair& pair, const GrowthParams& params) {
  detail::require_centered(pair);
  return detail::objective(pair.reference.points(), pair.query.points(), params.doubled_axis(), params.rotation(),
                           params.tau, params.lambda);
}

// Single-coordinate updates on a centered pair. Each returns the exact
// minimizer of the distance functional in its own coordinate.

inline Complex update_gamma(const MatchedPair& pair, double beta, double tau, double lambda,
                            Complex previous = Complex{1.0, 0.0}) {
  detail::require_centered(pair);
  if (detail::squared_norm(pair.reference.points()) == 0.0) {
    throw DegenerateConfiguration("template pattern collapses to a point");
  }
  return detail::update_axis(pair.reference.points(), pair.query.points(), unit(beta), tau, lambda, previous);
}

inline Complex update_beta(const MatchedPair& pair, Complex doubled_axis, double tau, double lambda,
                           Complex previous = Complex{1.0, 0.0}) {
  (void)lambda;  // a positive scale does not move the optimal rotation
  detail::require_centered(pair);
  if (detail::squared_norm(pair.reference.points()) == 0.0) {
    throw DegenerateConfiguration("template pattern collapses to a point");
  }
  return detail::update_rotation(pair.reference.points(), pair.query.points(), doubled_axis, tau, previous);
}

inline double update_tau(const MatchedPair& pair, Complex doubled_axis, double beta, double lambda,
                         double previous = 0.0) {
  detail::require_centered(pair);
  if (detail::squared_norm(pair.reference.points()) == 0.0) {
    throw DegenerateConfiguration("template pattern collapses to a point");
  }
  return detail::update_anisotropic(pair.reference.points(), pair.query.points(), doubled_axis, unit(beta), lambda,
                                    previous);
}

inline double update_lambda(const MatchedPair& pair, Complex doubled_axis, double beta, double tau) {
  detail::require_centered(pair);
  return detail::update_isotropic(pair.reference.points(), pair.query.points(), doubled_axis, unit(beta), tau);
}

/// Alternating minimization from (e^{i beta}, e^{2i gamma}, lambda, tau) = (1, 1, 1, 0).
/// Patterns are centered first. Returns the last iterate with
/// `converged == false` if `max_iterations` is exhausted.
inline EstimateResult estimate(const MatchedPair& pair, const SolverConfig& config = {}) {
  config.validate();
  if (pair.size() < 3) throw InvalidInput("estimation requires at least 3 matched minutiae");
  const MatchedPair centered = center_pair(pair);
  const auto z = centered.reference.points();
  const auto zq = centered.query.points();
  if (detail::squared_norm(z) == 0.0) throw DegenerateConfiguration("template pattern collapses to a point");

  Complex axis{1.0, 0.0};
  Complex rotation{1.0, 0.0};
  double tau = 0.0;
  double lambda = 1.0;

  EstimateResult result;
  result.collinear = detail::is_collinear(z);
  for (int it = 1; it <= config.max_iterations; ++it) {
    const Complex next_rotation = detail::update_rotation(z, zq, axis, tau, rotation);
    const double next_lambda = detail::update_isotropic(z, zq, axis, next_rotation, tau);
    const Complex next_axis = detail::update_axis(z, zq, next_rotation, tau, next_lambda, axis);
    const double next_tau = detail::update_anisotropic(z, zq, next_axis, next_rotation, next_lambda, tau);

    const double step = std::norm(next_axis - axis) + std::norm(next_rotation - rotation) +
                        (next_tau - tau) * (next_tau - tau) + (next_lambda - lambda) * (next_lambda - lambda);
    axis = next_axis;
    rotation = next_rotation;
    tau = next_tau;
    lambda = next_lambda;
    result.iterations = it;
    if (step < config.epsilon) {
      result.converged = true;
      break;
    }
  }
  result.params = GrowthParams::from_units(axis, rotation, tau, lambda);
  result.final_objective = detail::objective(z, zq, axis, rotation, tau, lambda);
  result.gamma_meaningless = tau < detail::kGammaMeaninglessTau;
  return result;
}

/// Optimal rotation aligning the centered query onto the centered template
/// direction: minimizes sum |z'_j - e^{i beta} z_j|^2.
inline double partial_procrustes(const MatchedPair& pair) {
  const MatchedPair c = center_pair(pair);
  Complex sum{0.0, 0.0};
  for (std::size_t j = 0; j < c.size(); ++j) sum += c.query[j] * std::conj(c.reference[j]);
  if (!(std::abs(sum) > detail::kUnitTieTolerance * detail::cross_scale(c.reference.points(), c.query.points()))) {
    throw DegenerateConfiguration("rotation undefined for degenerate pattern");
  }
  return std::arg(sum);
}

struct SimilarityFit {
  double beta = 0.0;
  double lambda = 1.0;
};

/// Optimal rotation and scale: minimizes sum |z'_j - lambda e^{i beta} z_j|^2.
inline SimilarityFit full_procrustes(const MatchedPair& pair) {
  const MatchedPair c = center_pair(pair);
  Complex sum{0.0, 0.0};
  for (std::size_t j = 0; j < c.size(); ++j) sum += c.query[j] * std::conj(c.reference[j]);
  const double ss = detail::squared_norm(c.reference.points());
  if (ss == 0.0 ||
      !(std::abs(sum) > detail::kUnitTieTolerance * detail::cross_scale(c.reference.points(), c.query.points()))) {
    throw DegenerateConfiguration("similarity fit undefined for degenerate pattern");
  }
  return {wrap_pi(std::arg(sum)), std::abs(sum) / ss};
}

/// Runs the estimator over every pair of a study. Pairs that cannot be
/// estimated are reported through `on_error` and skipped.
template <typename OnError>
EstimateTable estimate_study(const StudyDataset& data, const SolverConfig& config, OnError&& on_error) {
  EstimateTable table;
  for (const auto& [key, pair] : data) {
    try {
      const EstimateResult r = estimate(pair, config);
      table[key] = EstimateRow{r.params, pair.size(), r.iterations, r.final_objective, r.converged};
    } catch (const std::exception& e) {
      on_error(key, e);
    }
  }
  return table;
}

inline EstimateTable estimate_study(const StudyDataset& data, const SolverConfig& config = {}) {
  return estimate_study(data, config, [](const PairKey&, const std::exception&) { throw; });
}

}  // namespace anigrowth
