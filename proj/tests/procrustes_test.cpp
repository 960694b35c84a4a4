#include <gtest/gtest.h>

#include <random>

#include "anigrowth/procrustes.hpp"
#include "oracles.hpp"

using namespace anigrowth;

namespace {

std::vector<Complex> random_points(std::mt19937_64& rng, int n, double spread = 100.0) {
  std::uniform_real_distribution<double> u(-spread, spread);
  std::vector<Complex> pts;
  for (int j = 0; j < n; ++j) pts.emplace_back(u(rng), 1.5 * u(rng));
  return pts;
}

oracle::Points to_oracle(const MatchedPair& p) {
  oracle::Points o;
  for (std::size_t j = 0; j < p.size(); ++j) {
    o.ref.push_back({p.reference[j].real(), p.reference[j].imag()});
    o.query.push_back({p.query[j].real(), p.query[j].imag()});
  }
  return o;
}

GrowthParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return GrowthParams::make(kPi * u(rng), kTwoPi * u(rng) - kPi, 0.5 * u(rng), 0.5 + 1.5 * u(rng));
}

/// Centered pair whose query is the grown template plus optional noise.
MatchedPair random_pair(std::mt19937_64& rng, int n, const GrowthParams& p, double noise) {
  const auto ref = center_pattern(MinutiaPattern(random_points(rng, n)));
  std::normal_distribution<double> g(0.0, noise);
  std::vector<Complex> q;
  for (const auto& z : ref.points()) q.push_back(grow_point(z, p) + Complex(g(rng), g(rng)));
  return center_pair(MatchedPair(ref, MinutiaPattern(q)));
}

}  // namespace

TEST(GrowthModel, MatchesMatrixForm) {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 100; ++rep) {
    const GrowthParams p = random_params(rng);
    const Complex z(rng() % 200 - 100.0, rng() % 300 - 150.0);
    const Complex g = grow_point(z, p);
    const auto m = oracle::growth_matrix(p.gamma, p.beta, p.tau, p.lambda);
    const auto v = oracle::mul(m, {z.real(), z.imag()});
    EXPECT_NEAR(g.real(), v[0], 1e-10);
    EXPECT_NEAR(g.imag(), v[1], 1e-10);
  }
}

TEST(GrowthModel, HorizontalStretch) {
  const GrowthParams p = GrowthParams::make(0.0, 0.0, 0.3, 1.0);
  EXPECT_NEAR(std::abs(grow_point({2.0, 5.0}, p) - Complex(2.6, 5.0)), 0.0, 1e-14);
}

TEST(DistanceFunctional, MatchesIndependentEvaluation) {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 200; ++rep) {
    const auto pair = random_pair(rng, 5 + static_cast<int>(rng() % 30), random_params(rng), 3.0);
    const GrowthParams p = random_params(rng);
    const double f = distance_functional(pair, p);
    EXPECT_NEAR(f, oracle::objective(to_oracle(pair), p.gamma, p.beta, p.tau, p.lambda), 1e-9 * (1.0 + f));
  }
}

TEST(DistanceFunctional, ZeroAtTruthAndRequiresCentering) {
  std::mt19937_64 rng(3);
  const GrowthParams p = random_params(rng);
  const auto pair = random_pair(rng, 10, p, 0.0);
  EXPECT_NEAR(distance_functional(pair, p), 0.0, 1e-16 * distance_functional(pair, GrowthParams{}) + 1e-18);
  const MatchedPair raw(MinutiaPattern({{1, 1}, {2, 1}, {1, 3}}), MinutiaPattern({{1, 1}, {2, 1}, {1, 3}}));
  EXPECT_THROW(distance_functional(raw, p), InvalidInput);
}

// Each coordinate update is the exact conditional minimizer: it never
// increases F, and it matches a brute-force grid minimum at resolution 1e-4.
TEST(CoordinateUpdates, DescendAndMatchGridSearch) {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 60; ++rep) {
    const auto pair = random_pair(rng, 5 + static_cast<int>(rng() % 20), random_params(rng), 5.0);
    const auto o = to_oracle(pair);
    const GrowthParams cur = random_params(rng);
    const double f0 = distance_functional(pair, cur);
    const double tol = 1e-10 * (1.0 + f0);

    const Complex e2 = update_gamma(pair, cur.beta, cur.tau, cur.lambda, cur.doubled_axis());
    const double g = wrap_half_turn(0.5 * std::arg(e2));
    const double fg = oracle::objective(o, g, cur.beta, cur.tau, cur.lambda);
    EXPECT_LE(fg, f0 + tol);
    const auto gg = oracle::grid_min([&](double x) { return oracle::objective(o, x, cur.beta, cur.tau, cur.lambda); },
                                     0.0, kPi, 1e-4);
    EXPECT_LE(fg, gg.value + tol);
    if (cur.tau > 0.05) EXPECT_LT(angular_distance(g, gg.arg, kPi), 2e-4);

    const Complex eb = update_beta(pair, cur.doubled_axis(), cur.tau, cur.lambda, cur.rotation());
    const double fb = oracle::objective(o, cur.gamma, std::arg(eb), cur.tau, cur.lambda);
    EXPECT_LE(fb, f0 + tol);
    const auto gb = oracle::grid_min([&](double x) { return oracle::objective(o, cur.gamma, x, cur.tau, cur.lambda); },
                                     -kPi, kPi, 1e-4);
    EXPECT_LE(fb, gb.value + tol);
    EXPECT_LT(angular_distance(std::arg(eb), gb.arg), 2e-4);

    const double t = update_tau(pair, cur.doubled_axis(), cur.beta, cur.lambda, cur.tau);
    const double ft = oracle::objective(o, cur.gamma, cur.beta, t, cur.lambda);
    EXPECT_GE(t, 0.0);
    EXPECT_LE(ft, f0 + tol);
    const auto gt = oracle::grid_min([&](double x) { return oracle::objective(o, cur.gamma, cur.beta, x, cur.lambda); },
                                     0.0, 3.0, 1e-4);
    EXPECT_LE(ft, gt.value + tol);
    EXPECT_LT(std::abs(t - gt.arg), 2e-4);

    const double l = update_lambda(pair, cur.doubled_axis(), cur.beta, cur.tau);
    const double fl = oracle::objective(o, cur.gamma, cur.beta, cur.tau, l);
    EXPECT_GT(l, 0.0);
    EXPECT_LE(fl, f0 + tol);
    const auto gl = oracle::grid_min([&](double x) { return oracle::objective(o, cur.gamma, cur.beta, cur.tau, x); },
                                     1e-4, 4.0, 1e-4);
    EXPECT_LE(fl, gl.value + tol);
    EXPECT_LT(std::abs(l - gl.arg), 2e-4);
  }
}

TEST(CoordinateUpdates, TauIsProjectedToZero) {
  // Query shrunk along the axis: the unconstrained tau would be negative.
  std::mt19937_64 rng(5);
  const auto ref = center_pattern(MinutiaPattern(random_points(rng, 12)));
  std::vector<Complex> q;
  for (const auto& z : ref.points()) q.emplace_back(0.8 * z.real(), z.imag());
  const MatchedPair pair = center_pair(MatchedPair(ref, MinutiaPattern(q)));
  EXPECT_EQ(update_tau(pair, Complex{1.0, 0.0}, 0.0, 1.0), 0.0);
}

TEST(Estimate, IdentityPair) {
  std::mt19937_64 rng(6);
  const MinutiaPattern z(random_points(rng, 15));
  const EstimateResult r = estimate(MatchedPair(z, z));
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.params.beta, 0.0, 1e-9);
  EXPECT_NEAR(r.params.lambda, 1.0, 1e-9);
  EXPECT_NEAR(r.params.tau, 0.0, 1e-9);
  EXPECT_TRUE(r.gamma_meaningless);
}

TEST(Estimate, RecoversNoiseFreeParameters) {
  std::mt19937_64 rng(7);
  int recovered = 0;
  const int cases = 300;
  for (int rep = 0; rep < cases; ++rep) {
    const GrowthParams p = random_params(rng);
    // Uncentered inputs: the estimator centers them itself.
    const auto pts = random_points(rng, 5 + static_cast<int>(rng() % 36));
    std::vector<Complex> q;
    for (const auto& z : pts) q.push_back(grow_point(z, p) + Complex(40.0, -25.0));
    const EstimateResult r = estimate(MatchedPair(MinutiaPattern(pts), MinutiaPattern(q)));
    const bool ok = angular_distance(r.params.gamma, p.gamma, kPi) < 1e-6 &&
                    angular_distance(r.params.beta, p.beta) < 1e-6 && std::abs(r.params.tau - p.tau) < 1e-6 &&
                    std::abs(r.params.lambda - p.lambda) < 1e-6;
    if (ok) {
      ++recovered;
    } else {
      EXPECT_FALSE(r.converged) << "converged to a wrong answer in case " << rep;
    }
  }
  EXPECT_GE(recovered, cases - 1);
}

TEST(Estimate, SimilarityEquivariance) {
  // Rotating and scaling both patterns by the same similarity leaves
  // (gamma - rotation, beta, tau, lambda) consistent.
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 30; ++rep) {
    const GrowthParams p = random_params(rng);
    const auto pair = random_pair(rng, 20, p, 2.0);
    const double phi = 0.7 * rep;
    const Complex s = 1.7 * unit(phi);
    const MatchedPair moved(pair.reference.scaled(s), pair.query.scaled(s));
    const auto a = estimate(pair).params;
    const auto b = estimate(moved).params;
    EXPECT_NEAR(b.tau, a.tau, 1e-7);
    EXPECT_NEAR(b.lambda, a.lambda, 1e-7);
    EXPECT_LT(angular_distance(b.beta, a.beta), 1e-7);
    if (a.tau > 1e-3) EXPECT_LT(angular_distance(b.gamma, wrap_half_turn(a.gamma + phi), kPi), 1e-6);
  }
}

TEST(Estimate, RejectsTooFewPointsAndDegenerate) {
  const MinutiaPattern two({{0, 0}, {1, 0}});
  EXPECT_THROW(estimate(MatchedPair(two, two)), InvalidInput);
  const MinutiaPattern same({{2, 2}, {2, 2}, {2, 2}});
  EXPECT_THROW(estimate(MatchedPair(same, same)), DegenerateConfiguration);
  SolverConfig bad;
  bad.epsilon = 0.0;
  const MinutiaPattern tri({{0, 0}, {1, 0}, {0, 1}});
  EXPECT_THROW(estimate(MatchedPair(tri, tri), bad), InvalidInput);
}

TEST(Estimate, FlagsCollinearTemplates) {
  const MinutiaPattern line({{0, 0}, {1, 1}, {2, 2}, {3, 3}});
  const MinutiaPattern q({{0, 0}, {1.1, 1}, {2.2, 2}, {3.3, 3}});
  EXPECT_TRUE(estimate(MatchedPair(line, q)).collinear);
}

TEST(Estimate, ObjectiveNeverIncreasesAlongIterations) {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 50; ++rep) {
    const auto pair = random_pair(rng, 12, random_params(rng), 6.0);
    double previous = INFINITY;
    for (int it = 1; it <= 15; ++it) {
      const EstimateResult r = estimate(pair, SolverConfig{1e-300, it});
      EXPECT_LE(r.final_objective, previous * (1.0 + 1e-12) + 1e-12);
      previous = r.final_objective;
    }
  }
}

TEST(Procrustes, PartialAndFull) {
  std::mt19937_64 rng(10);
  const auto z = random_points(rng, 9);
  std::vector<Complex> q;
  for (const auto& v : z) q.push_back(1.3 * unit(0.4) * v + Complex(5, 7));
  const MatchedPair pair{MinutiaPattern(z), MinutiaPattern(q)};
  EXPECT_NEAR(partial_procrustes(pair), 0.4, 1e-12);
  const SimilarityFit f = full_procrustes(pair);
  EXPECT_NEAR(f.beta, 0.4, 1e-12);
  EXPECT_NEAR(f.lambda, 1.3, 1e-12);

  // Brute-force rotation oracle for a noisy pair.
  const auto noisy = random_pair(rng, 14, random_params(rng), 8.0);
  const auto o = to_oracle(noisy);
  const auto best = oracle::grid_min([&](double b) { return oracle::objective(o, 0.0, b, 0.0, 1.0); }, -kPi, kPi, 1e-5);
  EXPECT_LT(angular_distance(partial_procrustes(noisy), best.arg), 2e-5);
}

TEST(EstimateStudy, ReportsFailuresAndContinues) {
  StudyDataset d;
  const MinutiaPattern tri({{0, 0}, {3, 0}, {0, 2}});
  const MinutiaPattern two({{0, 0}, {1, 0}});
  d.add({1, 1}, MatchedPair(tri, tri));
  d.add({1, 2}, MatchedPair(two, two));
  int errors = 0;
  const EstimateTable t = estimate_study(d, {}, [&](const PairKey& k, const std::exception&) {
    ++errors;
    EXPECT_EQ(k, (PairKey{1, 2}));
  });
  EXPECT_EQ(errors, 1);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.begin()->second.n, 3u);
  EXPECT_THROW(estimate_study(d), InvalidInput);
}
