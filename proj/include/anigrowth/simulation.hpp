#pragma once

// Synthetic minutiae studies: Poisson patterns in rectangles, truncated
// Gaussian distortion, isotropic null model, injected anisotropic growth,
// no-growth reference samples and variable-growth studies.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "anigrowth/anisotropy_tests.hpp"
#include "anigrowth/core.hpp"
#include "anigrowth/descriptive.hpp"
#include "anigrowth/minutiae.hpp"
#include "anigrowth/procrustes.hpp"
#include "json.hpp"

namespace anigrowth {

using Rng = std::mt19937_64;

/// Generator for task `index` of a run seeded with `seed`.
inline Rng task_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) { return Rng(mix_seed(seed, a, b)); }

struct NoiseModel {
  double sigma = 7.0;       // pixels
  double truncation = 5.0;  // in standard deviations, per coordinate

  void validate() const {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidInput("noise sigma must be finite and >= 0");
    if (!(truncation > 0.0)) throw InvalidInput("noise truncation must be > 0");
  }
};

/// Gaussian law truncated to [lower, inf) by resampling; sd = 0 gives a
/// point mass at the mean.
struct TruncatedGaussian {
  double mean = 0.0;
  double sd = 0.0;
  double lower = 0.0;
  bool strict = false;  // exclude `lower` itself (lambda > 0)

  static TruncatedGaussian fixed(double value) { return {value, 0.0, -INFINITY, false}; }

  template <typename R>
  double draw(R& rng) const {
    if (sd == 0.0) return mean;
    std::normal_distribution<double> g(mean, sd);
    for (;;) {
      const double v = g(rng);
      if (v > lower || (!strict && v == lower)) return v;
    }
  }
};

struct SimConfig {
  int fingers = 8;                      // P
  int impressions = 7;                  // K, impressions compared with the first
  double intensity = 22.0;              // expected minutiae per pattern
  double half_width = 95.0;             // a: x in [-a, a]
  double half_height = 160.0;           // b: y in [-b, b]
  std::vector<double> lambda_values{1.0};
  std::uint64_t seed = 1;

  void validate() const {
    if (fingers < 1 || impressions < 1) throw InvalidInput("fingers and impressions must be >= 1");
    if (!(intensity > 0.0)) throw InvalidInput("intensity must be > 0");
    if (!(half_width > 0.0 && half_height > 0.0)) throw InvalidInput("rectangle extents must be > 0");
    if (lambda_values.empty()) throw InvalidInput("lambda_values must not be empty");
    for (double l : lambda_values) {
      if (!(l > 0.0)) throw InvalidInput("lambda values must be > 0");
    }
  }
};

/// Anisotropic growth of rate tau along axis gamma combined with isotropic
/// growth lambda.
struct GrowthSpec {
  TruncatedGaussian tau = TruncatedGaussian::fixed(0.0);
  double gamma = 0.0;
  TruncatedGaussian lambda = TruncatedGaussian::fixed(1.0);

  static GrowthSpec fixed(double tau, double gamma, double lambda = 1.0) {
    return {TruncatedGaussian::fixed(tau), gamma, TruncatedGaussian::fixed(lambda)};
  }
  /// Laws truncated to tau >= 0 and lambda > 0.
  static GrowthSpec variable(double tau_mean, double tau_sd, double gamma, double lambda_mean, double lambda_sd) {
    return {{tau_mean, tau_sd, 0.0, false}, gamma, {lambda_mean, lambda_sd, 0.0, true}};
  }
  /// Distal growth of children's prints between sessions: moderate (about 15 %
  /// isotropic, tau around 0.06) and strong (about 60 %, tau around 0.45).
  static GrowthSpec moderate_scenario() { return variable(0.06, 0.05, 0.0, 1.15, 0.08); }
  static GrowthSpec strong_scenario() { return variable(0.45, 0.2, 0.0, 1.6, 0.25); }
};

/// Poisson(intensity) points, uniform on [-a, a] x [-b, b]; counts below 3
/// are redrawn.
template <typename R>
MinutiaPattern simulate_pattern(const SimConfig& config, R& rng, int finger_id = 0, int impression_id = 0) {
  config.validate();
  std::poisson_distribution<int> count(config.intensity);
  int n = 0;
  do {
    n = count(rng);
  } while (n < 3);
  std::uniform_real_distribution<double> ux(-config.half_width, config.half_width);
  std::uniform_real_distribution<double> uy(-config.half_height, config.half_height);
  std::vector<Complex> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double x = ux(rng);
    const double y = uy(rng);
    pts.emplace_back(x, y);
  }
  return MinutiaPattern(std::move(pts), finger_id, impression_id);
}

namespace detail {
template <typename R>
double truncated_normal(double sigma, double bound_sd, R& rng) {
  if (sigma == 0.0) return 0.0;
  std::normal_distribution<double> g(0.0, sigma);
  for (;;) {
    const double v = g(rng);
    if (std::abs(v) <= bound_sd * sigma) return v;
  }
}
}  // namespace detail

/// Adds i.i.d. Gaussian displacements, each coordinate resampled until it
/// lies within `truncation` standard deviations. No re-centering.
template <typename R>
MinutiaPattern perturb(const MinutiaPattern& pattern, const NoiseModel& noise, R& rng) {
  noise.validate();
  std::vector<Complex> pts;
  pts.reserve(pattern.size());
  for (const auto& z : pattern.points()) {
    const double dx = detail::truncated_normal(noise.sigma, noise.truncation, rng);
    const double dy = detail::truncated_normal(noise.sigma, noise.truncation, rng);
    pts.emplace_back(z.real() + dx, z.imag() + dy);
  }
  return MinutiaPattern(std::move(pts), pattern.finger_id(), pattern.impression_id());
}

/// z_kj = lambda e^{i beta} (z_0j + eps_kj).
template <typename R>
MinutiaPattern apply_null_model(const MinutiaPattern& reference, double lambda, double beta, const NoiseModel& noise,
                                R& rng) {
  if (!(lambda > 0.0)) throw InvalidInput("lambda must be > 0");
  return perturb(reference, noise, rng).scaled(lambda * unit(beta));
}

/// Rotates the query onto the reference by partial Procrustes and grows the
/// result: lambda (e^{i beta} z + tau <e^{i beta} z, w> w), w = e^{i gamma}.
inline MinutiaPattern inject_growth(const MinutiaPattern& reference, const MinutiaPattern& query, double tau,
                                    double gamma, double lambda = 1.0) {
  if (!(tau >= 0.0)) throw InvalidInput("tau must be >= 0");
  if (!(lambda > 0.0)) throw InvalidInput("lambda must be > 0");
  const MinutiaPattern q = center_pattern(query);
  // Fit reference ~ e^{i beta} query.
  const double beta = partial_procrustes(MatchedPair(q, center_pattern(reference)));
  const Complex rot = unit(beta);
  const Complex w = unit(gamma);
  std::vector<Complex> pts;
  pts.reserve(query.size());
  for (const auto& z : q.points()) {
    const Complex u = rot * z;
    const double proj = u.real() * w.real() + u.imag() * w.imag();  // <u, w>
    pts.push_back(lambda * (u + tau * proj * w));
  }
  return center_pattern(MinutiaPattern(std::move(pts), query.finger_id(), query.impression_id()));
}

struct DrawnGrowth {
  double tau = 0.0;
  double lambda = 1.0;
};

template <typename R>
MinutiaPattern inject_growth(const MinutiaPattern& reference, const MinutiaPattern& query, const GrowthSpec& spec,
                             R& rng, DrawnGrowth* drawn = nullptr) {
  const double tau = spec.tau.draw(rng);
  const double lambda = spec.lambda.draw(rng);
  if (drawn) *drawn = {tau, lambda};
  return inject_growth(reference, query, tau, spec.gamma, lambda);
}

/// Null-model study: per finger a centered Poisson pattern; per impression
/// lambda drawn from `lambda_values`, beta uniform on [-pi, pi), truncated
/// Gaussian noise. Every (p, k) uses its own derived generator stream.
inline StudyDataset simulate_null_study(const SimConfig& config, const NoiseModel& noise) {
  config.validate();
  noise.validate();
  StudyDataset data;
  for (int p = 1; p <= config.fingers; ++p) {
    Rng rng = task_rng(config.seed, static_cast<std::uint64_t>(p));
    const MinutiaPattern z0 = center_pattern(simulate_pattern(config, rng, p, 0));
    for (int k = 1; k <= config.impressions; ++k) {
      Rng prng = task_rng(config.seed, static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(k));
      std::uniform_int_distribution<std::size_t> pick(0, config.lambda_values.size() - 1);
      std::uniform_real_distribution<double> angle(-kPi, kPi);
      const double lambda = config.lambda_values[pick(prng)];
      const double beta = angle(prng);
      data.add({p, k}, MatchedPair(z0, apply_null_model(z0, lambda, beta, noise, prng)));
    }
  }
  return data;
}

struct ReferenceSample {
  std::vector<double> tau;
  std::vector<PairKey> keys;
  std::size_t excluded = 0;  // non-convergent fits left out
};

/// tau-hat under the null model (lambda = 1), to serve as the reference
/// sample of the KS test. Every (p, k) gets its own template, so the entries
/// are independent.
inline ReferenceSample reference_tau_sample(const SimConfig& config, const NoiseModel& noise,
                                            const SolverConfig& solver = {}) {
  config.validate();
  noise.validate();
  ReferenceSample out;
  for (int p = 1; p <= config.fingers; ++p) {
    for (int k = 1; k <= config.impressions; ++k) {
      Rng rng = task_rng(config.seed, static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(k));
      const MinutiaPattern z0 = center_pattern(simulate_pattern(config, rng, p, k));
      const double beta = std::uniform_real_distribution<double>(-kPi, kPi)(rng);
      const EstimateResult r = estimate(MatchedPair(z0, apply_null_model(z0, 1.0, beta, noise, rng)), solver);
      if (!r.converged) {
        ++out.excluded;
        continue;
      }
      out.tau.push_back(r.params.tau);
      out.keys.push_back({p, k});
    }
  }
  return out;
}

/// Alignment precision eta = max(|Q1|, |Q3|) of the residual rotations,
/// quartiles by linear interpolation (type 7).
inline double estimate_alignment_precision(std::span<const double> beta_hats) {
  if (beta_hats.empty()) throw InvalidInput("alignment precision needs at least one rotation");
  return std::max(std::abs(quantile(beta_hats, 0.25)), std::abs(quantile(beta_hats, 0.75)));
}

// ---------------------------------------------------------------------------
// Synthetic stand-in for a hand-marked no-growth study

/// A no-growth study mimicking eight fingers with seven repeat impressions:
/// Poisson(22) minutiae in [-95, 95] x [-160, 160], 7 px truncated Gaussian
/// distortion, and a per-impression pressure stretch across the finger
/// (medial-lateral, the vertical axis).
struct StandinConfig {
  SimConfig sim{};
  NoiseModel noise{};
  /// Stretch rate along the vertical axis, drawn per impression.
  TruncatedGaussian pressure{0.0, 0.012, 0.0, false};
  /// Spread of the residual rotation between impressions.
  double rotation_sd = 0.05;

  static StandinConfig default_preset(std::uint64_t seed = 2002) {
    StandinConfig c;
    c.sim.seed = seed;
    return c;
  }
};

inline StudyDataset simulate_standin(const StandinConfig& cfg) {
  cfg.sim.validate();
  cfg.noise.validate();
  StudyDataset data;
  for (int p = 1; p <= cfg.sim.fingers; ++p) {
    Rng rng = task_rng(cfg.sim.seed, static_cast<std::uint64_t>(p));
    const MinutiaPattern z0 = center_pattern(simulate_pattern(cfg.sim, rng, p, 0));
    for (int k = 1; k <= cfg.sim.impressions; ++k) {
      Rng prng = task_rng(cfg.sim.seed, static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(k));
      const double stretch = cfg.pressure.draw(prng);
      std::normal_distribution<double> rot(0.0, cfg.rotation_sd);
      const double beta = cfg.rotation_sd > 0.0 ? rot(prng) : 0.0;
      std::vector<Complex> pts;
      pts.reserve(z0.size());
      for (const auto& z : z0.points()) pts.emplace_back(z.real(), (1.0 + stretch) * z.imag());
      const MinutiaPattern pressed(std::move(pts), p, k);
      const MinutiaPattern zk = apply_null_model(pressed, 1.0, beta, cfg.noise, prng);
      data.add({p, k}, MatchedPair(z0, zk));
    }
  }
  return data;
}

/// Replaces every query by its growth-injected copy (fixed tau, gamma).
inline StudyDataset inject_study_growth(const StudyDataset& data, double tau, double gamma, double lambda = 1.0) {
  StudyDataset out;
  for (const auto& [key, pair] : data) {
    out.add(key, MatchedPair(pair.reference, inject_growth(pair.reference, pair.query, tau, gamma, lambda)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Study-level helpers

inline std::vector<double> column_gamma(const EstimateTable& t) {
  std::vector<double> v;
  for (const auto& [k, r] : t) v.push_back(r.params.gamma);
  return v;
}
inline std::vector<double> column_tau(const EstimateTable& t) {
  std::vector<double> v;
  for (const auto& [k, r] : t) v.push_back(r.params.tau);
  return v;
}
inline std::vector<double> column_lambda(const EstimateTable& t) {
  std::vector<double> v;
  for (const auto& [k, r] : t) v.push_back(r.params.lambda);
  return v;
}
inline std::vector<double> column_beta(const EstimateTable& t) {
  std::vector<double> v;
  for (const auto& [k, r] : t) v.push_back(r.params.beta);
  return v;
}

inline AngleSample doubled_axes(const EstimateTable& t) {
  const auto g = column_gamma(t);
  return AngleSample::from_axes(g);
}

/// (resultant length of the doubled axes, summed sphericity) of a study.
inline Point2 joint_statistic(const StudyDataset& data, const EstimateTable& table) {
  double rho = 0.0;
  for (const auto& [key, pair] : data) rho += pair_sphericity(pair).rho;
  return {resultant_length(doubled_axes(table)), rho};
}

/// Null replicates of the joint statistic, one simulated study each.
inline std::vector<Point2> simulate_joint_replicates(SimConfig config, const NoiseModel& noise, int replicates,
                                                     const SolverConfig& solver = {}) {
  std::vector<Point2> out;
  out.reserve(static_cast<std::size_t>(replicates));
  const std::uint64_t master = config.seed;
  for (int i = 0; i < replicates; ++i) {
    config.seed = mix_seed(master, static_cast<std::uint64_t>(i));
    const StudyDataset data = simulate_null_study(config, noise);
    out.push_back(joint_statistic(data, estimate_study(data, solver)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Variable growth

struct VariableGrowthResult {
  EstimateTable estimates;
  std::map<PairKey, DrawnGrowth> model;
  std::vector<TestReport> reports;
};

struct VariableGrowthOptions {
  double alpha = 0.05;
  DistalTestConfig distal{};
  std::uint64_t seed = 1;
  SimConfig reference{};  // null configuration for the KS reference sample
  NoiseModel reference_noise{};
  SolverConfig solver{};
};

/// Draws (tau, lambda) per pair from the growth laws, injects growth along
/// `spec.gamma`, estimates, and runs the Rayleigh, KS and both distal tests.
inline VariableGrowthResult variable_growth_study(const StudyDataset& data, const GrowthSpec& spec,
                                                  const VariableGrowthOptions& opt) {
  VariableGrowthResult out;
  StudyDataset grown;
  for (const auto& [key, pair] : data) {
    Rng rng = task_rng(opt.seed, static_cast<std::uint64_t>(key.finger), static_cast<std::uint64_t>(key.impression));
    DrawnGrowth drawn;
    MinutiaPattern q = inject_growth(pair.reference, pair.query, spec, rng, &drawn);
    out.model[key] = drawn;
    grown.add(key, MatchedPair(pair.reference, std::move(q)));
  }
  out.estimates = estimate_study(grown, opt.solver);
  const AngleSample axes = doubled_axes(out.estimates);
  out.reports.push_back(test_rayleigh(axes, opt.alpha));
  SimConfig ref = opt.reference;
  ref.seed = mix_seed(opt.seed, 0xFEEDULL);
  const ReferenceSample reference = reference_tau_sample(ref, opt.reference_noise, opt.solver);
  out.reports.push_back(test_tau_ks(column_tau(out.estimates), reference.tau, opt.alpha));
  DistalTestConfig distal = opt.distal;
  distal.alpha = opt.alpha;
  out.reports.push_back(test_distal_vm(axes, distal));
  out.reports.push_back(test_distal_boot(axes, distal, mix_seed(opt.seed, 0xB007ULL)));
  return out;
}

}  // namespace anigrowth
