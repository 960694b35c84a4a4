#pragma once

// Sensitivity sweeps: smallest injected tau at which a test detects growth,
// per growth axis, and rejection profiles of the distal tests over a grid of
// axes.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "anigrowth/anisotropy_tests.hpp"
#include "anigrowth/simulation.hpp"

namespace anigrowth {

struct SweepSpec {
  std::vector<double> gamma_grid;
  std::vector<double> tau_grid;
  TestId test = TestId::rayleigh;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  DistalTestConfig distal{};  // used by the distal tests
  SolverConfig solver{};

  /// {k pi / count : k = 0..count-1}.
  static std::vector<double> uniform_gamma_grid(int count) {
    std::vector<double> g;
    for (int k = 0; k < count; ++k) g.push_back(k * kPi / count);
    return g;
  }

  /// first, first + step, ... up to last (inclusive within rounding).
  static std::vector<double> linear_grid(double first, double last, double step) {
    std::vector<double> g;
    for (int i = 0;; ++i) {
      const double v = first + i * step;
      if (v > last + 1e-12) break;
      g.push_back(v);
    }
    return g;
  }

  void validate() const {
    if (gamma_grid.empty() || tau_grid.empty()) throw InvalidInput("sweep grids must not be empty");
    for (std::size_t i = 0; i < tau_grid.size(); ++i) {
      if (!(tau_grid[i] > 0.0)) throw InvalidInput("tau grid values must be > 0");
      if (i > 0 && !(tau_grid[i] > tau_grid[i - 1])) throw InvalidInput("tau grid must be strictly increasing");
    }
    check_alpha(alpha);
  }
};

/// Runs one test on a study's estimates. `reference_tau` is required for the
/// KS test; the joint test is not supported here (it needs a rectangle).
inline TestReport run_study_test(TestId test, const EstimateTable& table, double alpha,
                                 std::span<const double> reference_tau, const DistalTestConfig& distal,
                                 std::uint64_t seed) {
  switch (test) {
    case TestId::rayleigh:
      return test_rayleigh(doubled_axes(table), alpha);
    case TestId::tau_ks: {
      if (reference_tau.empty()) throw InvalidInput("tau_ks needs a reference sample");
      const auto tau = column_tau(table);
      return test_tau_ks(tau, reference_tau, alpha);
    }
    case TestId::distal_vm: {
      DistalTestConfig c = distal;
      c.alpha = alpha;
      return test_distal_vm(doubled_axes(table), c);
    }
    case TestId::distal_boot: {
      DistalTestConfig c = distal;
      c.alpha = alpha;
      return test_distal_boot(doubled_axes(table), c, seed);
    }
    case TestId::joint:
      break;
  }
  throw InvalidInput("test not supported in sweeps: " + to_string(test));
}

struct SweepPoint {
  double gamma = 0.0;
  std::optional<double> tau_min;  // empty: no rejection on the grid ("above-grid")
};

/// For each axis, ascends the tau grid and records the first tau at which
/// the test rejects on the growth-injected study.
inline std::vector<SweepPoint> sweep_min_tau(const StudyDataset& data, const SweepSpec& spec,
                                             std::span<const double> reference_tau = {}) {
  spec.validate();
  std::vector<SweepPoint> out;
  for (std::size_t gi = 0; gi < spec.gamma_grid.size(); ++gi) {
    SweepPoint pt{spec.gamma_grid[gi], std::nullopt};
    for (std::size_t ti = 0; ti < spec.tau_grid.size(); ++ti) {
      const StudyDataset grown = inject_study_growth(data, spec.tau_grid[ti], pt.gamma);
      const EstimateTable table = estimate_study(grown, spec.solver);
      const TestReport r = run_study_test(spec.test, table, spec.alpha, reference_tau, spec.distal,
                                          mix_seed(spec.seed, gi, ti));
      if (r.rejected()) {
        pt.tau_min = spec.tau_grid[ti];
        break;
      }
    }
    out.push_back(pt);
  }
  return out;
}

struct DistalProfilePoint {
  double gamma = 0.0;
  double doubled = 0.0;  // 2 gamma reduced to [-pi, pi)
  double extrinsic_mean = 0.0;
  bool vm_reject = false;
  bool boot_reject = false;
};

/// Both distal tests on the study grown by `tau` along each axis of the grid.
inline std::vector<DistalProfilePoint> distal_profile(const StudyDataset& data, std::span<const double> gammas,
                                                      double tau, const DistalTestConfig& cfg, std::uint64_t seed,
                                                      const SolverConfig& solver = {}) {
  std::vector<DistalProfilePoint> out;
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    const StudyDataset grown = inject_study_growth(data, tau, gammas[i]);
    const AngleSample axes = doubled_axes(estimate_study(grown, solver));
    const TestReport vm = test_distal_vm(axes, cfg);
    const TestReport boot = test_distal_boot(axes, cfg, mix_seed(seed, i));
    out.push_back({gammas[i], wrap_pi(2.0 * gammas[i]), vm.config["extrinsic_mean"].get<double>(), vm.rejected(),
                   boot.rejected()});
  }
  return out;
}

struct CriticalInterval {
  double lower = 0.0;  // on the doubled-angle scale
  double upper = 0.0;
  double width() const { return upper - lower; }
};

/// Connected run of rejecting grid points around doubled angle 0, read off a
/// profile. Empty if the test does not reject at the grid point nearest 0.
inline std::optional<CriticalInterval> critical_interval(std::span<const DistalProfilePoint> profile, bool parametric) {
  if (profile.empty()) return std::nullopt;
  std::vector<DistalProfilePoint> pts(profile.begin(), profile.end());
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.doubled < b.doubled; });
  auto rejects = [&](std::size_t i) { return parametric ? pts[i].vm_reject : pts[i].boot_reject; };
  std::size_t zero = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (std::abs(pts[i].doubled) < std::abs(pts[zero].doubled)) zero = i;
  }
  if (!rejects(zero)) return std::nullopt;
  std::size_t lo = zero, hi = zero;
  while (lo > 0 && rejects(lo - 1)) --lo;
  while (hi + 1 < pts.size() && rejects(hi + 1)) ++hi;
  return CriticalInterval{pts[lo].doubled, pts[hi].doubled};
}

}  // namespace anigrowth
