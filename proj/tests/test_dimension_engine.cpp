#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "beta_targets/dimension_engine.hpp"
#include "oracles.hpp"

using namespace beta_targets;

namespace {

using Kind = RotationRule::Kind;

TargetSpec example1(double theta) { return rotated_example_spec({Kind::constant, theta, 0.0}); }
TargetSpec example2(double a) { return rotated_example_spec({Kind::arccos_pow2, 0.0, a}); }

std::vector<double> ln_betas(const TargetSpec& spec) {
  std::vector<double> out;
  for (double b : spec.system.betas()) out.push_back(std::log(b));
  return out;
}

// A random target of moderate shape inside the unit cube.
TargetSpec random_explicit(std::mt19937_64& rng, std::size_t d, std::size_t n) {
  std::uniform_real_distribution<double> beta(1.2, 5.0), entry(-1.0, 1.0);
  std::vector<double> betas(d);
  for (auto& b : betas) b = beta(rng);
  Parallelepiped P{std::vector<double>(d, 0.1), Matrix(d, d)};
  for (std::size_t j = 0; j < d; ++j) {
    const double s = 0.2 * std::exp2(-8.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng));
    for (std::size_t i = 0; i < d; ++i) P.columns(i, j) = s * entry(rng);
  }
  ExplicitFamily fam;
  fam.by_level[n] = P;
  return TargetSpec{BetaSystem(betas), fam};
}

}  // namespace

TEST(GammaNorms, ExampleOneThetaZero) {
  for (std::size_t n = 1; n <= 30; ++n) {
    const auto g = gamma_magnitudes(example1(0.0), n);
    EXPECT_NEAR(g.log2[0], -2.0 * n, 1e-12);
    EXPECT_NEAR(g.log2[1], -4.0 * n, 1e-12);
  }
}

TEST(GammaNorms, AgreeWithClosedFormForRotatedRectangles) {
  for (double theta : {0.3, std::numbers::pi / 6, std::numbers::pi / 4, 1.0, 1.5}) {
    for (std::size_t n : {1, 2, 5, 20, 60}) {
      const auto g = gamma_magnitudes(example1(theta), n);
      const auto want = oracle::rotated_example_log_gammas(static_cast<double>(n), std::log2(std::cos(theta)),
                                                           std::sin(theta) * std::sin(theta));
      EXPECT_NEAR(g.log2[0], want[0] / std::numbers::ln2, 1e-9) << theta << " " << n;
      EXPECT_NEAR(g.log2[1], want[1] / std::numbers::ln2, 1e-9) << theta << " " << n;
    }
  }
}

TEST(GammaNorms, MatchClassicalOrthogonalisationOnWellConditionedInput) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 2 + trial % 4, n = 1 + trial % 3;
    const auto spec = random_explicit(rng, d, n);
    const auto frame = pivoted_orthogonalize(scale_by_f(spec.system, target_at(spec, n), n));
    for (ComputeMode mode : {ComputeMode::double_precision, ComputeMode::log_domain}) {
      const auto g = gamma_magnitudes(spec, n, mode);
      EXPECT_EQ(g.permutation, frame.permutation);
      for (std::size_t k = 0; k < d; ++k) EXPECT_NEAR(g.log2[k], std::log2(frame.norms[k]), 1e-9);
    }
  }
}

TEST(GammaNorms, ProductEqualsScaledVolume) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 2 + trial % 3;
    const auto spec = random_explicit(rng, d, 4);
    const auto g = gamma_magnitudes(spec, 4);
    double sum = 0.0;
    for (double v : g.log2) sum += v;
    const auto P = target_at(spec, 4);
    double want = std::log2(std::fabs(determinant(P.columns)));
    for (std::size_t i = 0; i < d; ++i) want += spec.system.log2_contraction(i, 4.0);
    EXPECT_NEAR(sum, want, 1e-9);
    for (std::size_t k = 1; k < d; ++k) EXPECT_LE(g.log2[k], g.log2[k - 1] + 1e-12);
  }
}

TEST(GammaNorms, DegenerateTargetIsRejected) {
  ExplicitFamily fam;
  fam.by_level[1] = Parallelepiped{{0, 0}, Matrix::from_columns({{0.1, 0.2}, {0.2, 0.4}})};
  try {
    gamma_magnitudes(TargetSpec{BetaSystem({2, 3}), fam}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate_input);
    EXPECT_EQ(e.module(), Module::dimension_engine);
  }
  EXPECT_THROW(gamma_magnitudes(TargetSpec{BetaSystem({2, 3}), fam}, 2), Error);  // no target at level 2
}

TEST(GammaNorms, AutomaticModeSwitchesToLogDomainWhenDoublesWouldUnderflow) {
  EXPECT_FALSE(gamma_magnitudes(example2(0.5), 10).log_domain);
  EXPECT_TRUE(gamma_magnitudes(example2(0.5), 200).log_domain);
  EXPECT_THROW(gamma_magnitudes(example2(0.5), 200, ComputeMode::double_precision), Error);
}

TEST(CoveringExponent, HandEvaluationOfTheThreeCandidates) {
  // Example 1 at theta = 0: tau in {2^-n, 4^-n = 2^-2n, 2^-4n}.
  LevelScales sc{3, {-3, -6}, {-6, -12}};
  EXPECT_DOUBLE_EQ(covering_exponent(sc, -3), 2.0);
  EXPECT_DOUBLE_EQ(covering_exponent(sc, -6), 1.5);
  EXPECT_DOUBLE_EQ(covering_exponent(sc, -12), 1.25);
  EXPECT_THROW(covering_exponent(sc, 0.0), Error);
  const auto level = evaluate_level(sc);
  EXPECT_EQ(level.candidates_log2, (std::vector<double>{-12, -6, -3}));
  EXPECT_DOUBLE_EQ(level.s_n, 1.25);
  EXPECT_DOUBLE_EQ(level.argmin_tau_log2, -12);
}

TEST(CoveringExponent, TiesGoToTheSmallerScale) {
  // tau = 2^-1: 1 + 1 + 0 = 2 ; tau = 2^-3: 1/3 + 1 + 2/3 + 0 = 2.
  LevelScales sc{1, {-1, -3}, {-1, -3}};
  EXPECT_DOUBLE_EQ(covering_exponent(sc, -1), 2.0);
  EXPECT_NEAR(covering_exponent(sc, -3), 2.0, 1e-15);
  const auto level = evaluate_level(sc);
  EXPECT_EQ(level.candidates_log2.size(), 2u);
  EXPECT_DOUBLE_EQ(level.argmin_tau_log2, -3);
}

TEST(CoveringExponent, MinimumOverCandidatesIsTheMinimumOverAllScales) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 2 + trial % 3;
    const auto spec = random_explicit(rng, d, 3);
    const auto level = s_n(spec, 3);
    const double lo = level.candidates_log2.front() * 1.5;
    for (int k = 1; k <= 2000; ++k) {
      const double L = lo * k / 2000.0;
      EXPECT_GE(covering_exponent(level_scales(spec, 3, gamma_magnitudes(spec, 3)), L), level.s_n - 1e-12);
    }
  }
}

TEST(Examples, ExampleOneFiniteLevelsMatchDirectEvaluation) {
  for (double theta : {0.0, std::numbers::pi / 6, std::numbers::pi / 4, 1.0}) {
    const auto spec = example1(theta);
    for (std::size_t n = 1; n <= 50; ++n) {
      const auto g = oracle::rotated_example_log_gammas(static_cast<double>(n), std::log2(std::cos(theta)),
                                                        std::sin(theta) * std::sin(theta));
      EXPECT_NEAR(s_n(spec, n).s_n, oracle::s_n_direct(ln_betas(spec), static_cast<double>(n), g), 1e-9) << theta << " " << n;
    }
  }
}

TEST(Examples, ExampleOneAxisAlignedAndQuarterTurn) {
  for (std::size_t n = 1; n <= 50; ++n) {
    const auto a = s_n(example1(0.0), n);
    EXPECT_NEAR(a.s_n, 1.25, 1e-12);
    EXPECT_DOUBLE_EQ(a.argmin_tau_log2, -4.0 * n);
    const auto b = s_n(example1(std::numbers::pi / 2), n);
    EXPECT_NEAR(b.s_n, 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(b.argmin_tau_log2, -3.0 * n);
  }
}

TEST(Examples, ExampleOneApproachesFiveQuarters) {
  for (double theta : {std::numbers::pi / 6, std::numbers::pi / 4, 1.0}) {
    const auto report = s_star(example1(theta), 1, 2000, 20, 1e-3);
    EXPECT_NEAR(report.s_star, 1.25, 1e-3) << theta;
    EXPECT_TRUE(report.converged);
  }
}

TEST(Examples, ExampleTwoAtDepth) {
  for (double a : {0.0, 0.25, 0.5, 0.75, 1.0, 2.0}) {
    const auto level = s_n(example2(a), 200, ComputeMode::log_domain);
    EXPECT_TRUE(level.log_domain);
    EXPECT_NEAR(level.s_n, closed_form_example(2, a), 1e-2) << a;
    const double n = 200.0;
    const auto g = oracle::rotated_example_log_gammas(n, -a * n, 1.0 - std::exp2(-2.0 * a * n));
    EXPECT_NEAR(level.s_n, oracle::s_n_direct(ln_betas(example2(a)), n, g), 1e-9) << a;
  }
  EXPECT_EQ(s_n(example2(0.0), 200, ComputeMode::log_domain).s_n, s_n(example1(0.0), 200).s_n);
}

TEST(Examples, LimsupEstimates) {
  const auto half = s_star(example2(0.5), 1, 200, 20, 1e-2);
  EXPECT_NEAR(half.s_star, 8.0 / 7.0, 1e-2);
  const auto two = s_star(example2(2.0), 1, 200, 20, 1e-2);
  EXPECT_NEAR(two.s_star, 1.0, 1e-2);
  // Near-quarter turns push the short side of P_n below x = 0; those levels are flagged, not dropped.
  std::vector<std::size_t> flagged;
  for (const auto& lv : two.levels)
    if (!lv.target_in_unit_cube) flagged.push_back(lv.n);
  EXPECT_EQ(two.containment_warnings, flagged);
  EXPECT_EQ(two.levels.size(), 200u);
  EXPECT_THROW(s_star(example2(2.0), 5, 4), Error);
  EXPECT_THROW(s_star(example2(2.0), 1, 10, 11), Error);
}

TEST(Examples, ThreadCountDoesNotChangeResults) {
  const auto a = s_star(example1(1.0), 1, 60, 10, 1e-3, ComputeMode::automatic, 1);
  const auto b = s_star(example1(1.0), 1, 60, 10, 1e-3, ComputeMode::automatic, 4);
  for (std::size_t i = 0; i < a.levels.size(); ++i) EXPECT_EQ(a.levels[i].s_n, b.levels[i].s_n);
}

TEST(Examples, ClosedForms) {
  EXPECT_EQ(closed_form_example(1, std::numbers::pi / 4), 1.25);
  EXPECT_EQ(closed_form_example(1, 0.0), 1.25);
  EXPECT_EQ(closed_form_example(1, std::numbers::pi / 2), 1.0);
  EXPECT_EQ(closed_form_example(2, 0.0), 1.25);
  EXPECT_NEAR(closed_form_example(2, 0.5), 8.0 / 7.0, 1e-15);
  EXPECT_EQ(closed_form_example(2, 2.0), 1.0);
  EXPECT_THROW(closed_form_example(3, 0.0), Error);
}

TEST(OneDimensional, PowerLawSides) {
  for (double beta : {2.0, std::numbers::phi, 2.5}) {
    for (double t : {0.5, 1.0, 3.0}) {
      const TargetSpec spec{BetaSystem({beta}), AxisFamily{{ExponentRule{beta, t, 0.0}}, {}}};
      for (std::size_t n = 1; n <= 40; ++n) {
        const double got = s_n(spec, n).s_n;
        const double nn = static_cast<double>(n);
        EXPECT_NEAR(got, 1.0 / (1.0 + t), 1e-9);
        EXPECT_NEAR(got, oracle::s_n_direct({std::log(beta)}, nn, {-nn * (1.0 + t) * std::log(beta)}), 1e-9);
      }
    }
  }
}

TEST(Targets, ContainmentWarningsAreReported) {
  const TargetSpec spec{BetaSystem({2.0}), AxisFamily{{ExponentRule{2.0, 1.0, 0.0}}, {0.9}}};
  EXPECT_FALSE(s_n(spec, 1).target_in_unit_cube);  // [0.9, 1.4]
  EXPECT_TRUE(s_n(spec, 4).target_in_unit_cube);
  const auto report = s_star(spec, 1, 5, 2);
  EXPECT_EQ(report.containment_warnings, (std::vector<std::size_t>{1, 2, 3}));
}

TEST(Targets, QuarterTurnIsExact) {
  const auto [c, s] = RotationRule{Kind::constant, std::numbers::pi / 2, 0.0}.cos_sin(1);
  EXPECT_EQ(c, 0.0);
  EXPECT_EQ(s, 1.0);
  const auto P = target_at(example1(std::numbers::pi / 2), 3);
  EXPECT_EQ(P.columns(0, 0), 0.0);
  EXPECT_EQ(P.columns(1, 0), 0.125);
}

TEST(Targets, TableLoader) {
  std::istringstream in(
      "n,o1,o2,a11,a21,a12,a22\n"
      "# level one\n"
      "1,0.1,0.2,0.5,0,0,0.25\n"
      "\n"
      "2,0.1,0.2,0.25,0,0.01,0.0625\n");
  const auto fam = load_target_table(in, 2);
  ASSERT_EQ(fam.by_level.size(), 2u);
  const auto& P = fam.by_level.at(2);
  EXPECT_EQ(P.origin, (std::vector<double>{0.1, 0.2}));
  EXPECT_EQ(P.columns(0, 1), 0.01);
  EXPECT_EQ(P.columns(1, 1), 0.0625);
  std::istringstream bad("1,0.1,0.2,0.5\n");
  EXPECT_THROW(load_target_table(bad, 2), Error);
}
