#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "beta_targets/numerical_lab.hpp"

using namespace beta_targets;

namespace {

using Kind = RotationRule::Kind;

TargetSpec example1(double theta) { return rotated_example_spec({Kind::constant, theta, 0.0}); }

// beta = (2, 2), P_n = [0, 2^-n]^2: f P_1 = [0, 1/4]^2.
TargetSpec dyadic_squares() {
  return TargetSpec{BetaSystem({2.0, 2.0}), AxisFamily{{ExponentRule{2.0, 1.0, 0.0}, ExponentRule{2.0, 1.0, 0.0}}, {}}};
}

EnSet single(const geom::ConvexPolygon& shape) {
  EnSet E;
  E.copies.push_back({{}, {}, {0, 0}, shape});
  return E;
}

}  // namespace

TEST(BuildEn, CopyCounts) {
  const auto E = build_E_n(example1(std::numbers::pi / 4), 2);
  EXPECT_EQ(E.copies.size(), 64u);
  EXPECT_EQ(E.count_x, 4u);
  EXPECT_EQ(E.count_y, 16u);
  const TargetSpec golden{BetaSystem({std::numbers::phi, 2.5}), AxisFamily{{ExponentRule{2.0, 1.0, 1.0}, ExponentRule{2.0, 1.0, 1.0}}, {}}};
  for (std::size_t n = 1; n <= 5; ++n) {
    const auto G = build_E_n(golden, n);
    EXPECT_EQ(G.count_x, count_admissible(BetaParam(std::numbers::phi), n));
    EXPECT_EQ(G.count_y, count_admissible(BetaParam(2.5), n));
    const auto F = build_E_n(golden, n, EnMode::full_in_D, Square{});
    EXPECT_EQ(F.count_x, count_full(BetaParam(std::numbers::phi), n));
    EXPECT_EQ(F.count_y, count_full(BetaParam(2.5), n));
  }
}

TEST(BuildEn, DyadicCopiesSitAtCylinderCorners) {
  const auto E = build_E_n(dyadic_squares(), 1);
  ASSERT_EQ(E.copies.size(), 4u);
  std::set<std::pair<double, double>> corners;
  for (const auto& c : E.copies) {
    corners.insert({c.z.x, c.z.y});
    EXPECT_DOUBLE_EQ(c.shape.area(), 1.0 / 16.0);
    const auto bb = c.shape.bbox();
    EXPECT_EQ(bb.x0, c.z.x);
    EXPECT_EQ(bb.x1, c.z.x + 0.25);
  }
  EXPECT_EQ(corners, (std::set<std::pair<double, double>>{{0, 0}, {0, 0.5}, {0.5, 0}, {0.5, 0.5}}));
}

TEST(BuildEn, FullModeOnTheUnitSquareMatchesAllModeForIntegerBases) {
  const auto spec = example1(std::numbers::pi / 4);
  const auto a = build_E_n(spec, 2);
  const auto b = build_E_n(spec, 2, EnMode::full_in_D, Square{});
  ASSERT_EQ(a.copies.size(), b.copies.size());
  for (std::size_t k = 0; k < a.copies.size(); ++k) {
    EXPECT_EQ(a.copies[k].z.x, b.copies[k].z.x);
    EXPECT_EQ(a.copies[k].z.y, b.copies[k].z.y);
  }
}

TEST(BuildEn, Preconditions) {
  EXPECT_THROW(build_E_n(example1(0.0), 2, EnMode::full_in_D), Error);
  EXPECT_THROW(build_E_n(example1(0.0), 2, EnMode::full_in_D, Square{{0, 0.5}, {0, 0.25}}), Error);
  try {
    build_E_n(example1(0.0), 1, EnMode::full_in_D, Square{{0, 0.125}, {0, 0.125}}, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::precondition_failed);
  }
  try {
    build_E_n(example1(0.0), 6, EnMode::all, std::nullopt, std::nullopt, 1000);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::resource_limit);
  }
  const TargetSpec line{BetaSystem({2.0}), AxisFamily{{ExponentRule{}}, {}}};
  EXPECT_THROW(build_E_n(line, 1), Error);
}

TEST(CoverCount, UnitSquareAndSingleCells) {
  EXPECT_EQ(empirical_cover_count(single(geom::ConvexPolygon::from_box({0, 0, 1, 1})), 0.125), 64u);
  const auto small = geom::ConvexPolygon::from_box({0.3, 0.3, 0.35, 0.32});
  EXPECT_EQ(empirical_cover_count(single(small), 0.5), 1u);
  const auto straddle = geom::ConvexPolygon::from_box({0.45, 0.45, 0.55, 0.55});
  EXPECT_EQ(empirical_cover_count(single(straddle), 0.5), 4u);
  EXPECT_THROW(empirical_cover_count(single(small), 1.0), Error);
}

TEST(CoverCount, WithinTheGridFactorOfThePrediction) {
  const auto scan = cover_exponent_scan(example1(0.0), 2);
  EXPECT_DOUBLE_EQ(scan.s_n, 1.25);
  EXPECT_EQ(scan.argmin_tau_log2, -8.0);
  ASSERT_EQ(scan.rows.size(), 3u);
  for (const auto& row : scan.rows) {
    EXPECT_LE(row.ratio, 64.0);
    EXPECT_GE(row.ratio, 1.0 / 64.0);
  }
  // tau = 2^-8: sixteen 2^-4 x 2^-8 copies per column strip, each needing 16 cells.
  EXPECT_EQ(scan.at_argmin().count, 64u * 16u);
}

TEST(CoverCount, ThreadCountDoesNotChangeCounts) {
  const auto E = build_E_n(example1(1.0), 3);
  EXPECT_EQ(empirical_cover_count(E, std::exp2(-9.0), kDefaultLabCap, 1), empirical_cover_count(E, std::exp2(-9.0), kDefaultLabCap, 3));
}

TEST(Mu, BallMasses) {
  const auto M = build_mu(dyadic_squares(), 1, Square{}, 0.1);
  EXPECT_DOUBLE_EQ(mu_ball_mass(M, {0.5, 0.5}, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(mu_ball_mass(M, {0.125, 0.125}, 0.125), 0.25);
  EXPECT_DOUBLE_EQ(mu_ball_mass(M, {0.125, 0.125}, 0.0625), 0.0625);
  EXPECT_EQ(mu_ball_mass(M, {0.375, 0.375}, 0.1), 0.0);
  EXPECT_THROW(mu_ball_mass(M, {0.5, 0.5}, 0.0), Error);
}

TEST(Mu, FullModeClipsCopiesToTheirCylinders) {
  const auto M = build_mu(example1(std::numbers::pi / 4), 2, Square{}, 0.1);
  double total = 0.0;
  for (std::size_t k = 0; k < M.E.copies.size(); ++k) {
    const auto bb = M.copy_boxes[k];
    const auto& z = M.E.copies[k].z;
    EXPECT_GE(bb.x0, z.x - 1e-15);
    EXPECT_LE(bb.x1, z.x + 0.25 + 1e-15);
    EXPECT_GE(bb.y0, z.y - 1e-15);
    EXPECT_LE(bb.y1, z.y + 0.0625 + 1e-15);
    total += M.copy_areas[k];
  }
  EXPECT_GT(total, 0.0);
  EXPECT_NEAR(mu_ball_mass(M, {0.5, 0.5}, 0.5), 1.0, 1e-12);
}

TEST(MeasureCheck, ZeroExponentGivesPlainMass) {
  const auto M = build_mu(dyadic_squares(), 2, Square{}, 0.1);
  const auto check = verify_measure_bound(M, dyadic_squares(), 0.0, 400, 1);
  EXPECT_LE(check.max_ratio, 1.0);
  EXPECT_GT(check.max_ratio, 0.0);
}

TEST(MeasureCheck, DeterministicAndThreadIndependent) {
  const auto spec = example1(std::numbers::pi / 4);
  const double sn = s_n(spec, 2).s_n;
  const auto M = build_mu(spec, 2, Square{}, 0.05);
  const auto a = verify_measure_bound(M, spec, sn - 0.1, 500, 99, 1);
  const auto b = verify_measure_bound(M, spec, sn - 0.1, 500, 99, 4);
  EXPECT_EQ(a.max_ratio, b.max_ratio);
  EXPECT_EQ(a.worst.r, b.worst.r);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_GT(a.regime_samples[i], 0u);
  EXPECT_TRUE(std::isfinite(a.max_ratio));
}

TEST(MeasureCheck, BoundedAcrossLevelsForAxisSquares) {
  const auto spec = dyadic_squares();
  double prev = 0.0;
  for (std::size_t n = 2; n <= 4; ++n) {
    const double t = s_n(spec, n).s_n / 2.0;
    const auto M = build_mu(spec, n, Square{}, default_epsilon(s_n(spec, n).s_n, t));
    const double r = verify_measure_bound(M, spec, t, 2000, 5).max_ratio;
    EXPECT_TRUE(std::isfinite(r));
    if (prev > 0.0) {
      EXPECT_LE(r, 2.0 * prev);
    }
    prev = r;
  }
}

TEST(MeasureCheck, RejectsExponentsAboveTheSlack) {
  const auto spec = example1(std::numbers::pi / 4);
  const auto M = build_mu(spec, 2, Square{}, 0.2);
  EXPECT_THROW(verify_measure_bound(M, spec, s_n(spec, 2).s_n - 0.1, 10, 1), Error);
  EXPECT_THROW(default_epsilon(1.0, 1.0), Error);
}
