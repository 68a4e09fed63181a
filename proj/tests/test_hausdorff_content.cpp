#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "beta_targets/hausdorff_content.hpp"

using namespace beta_targets;
using geom::ConvexPolygon;

TEST(SingularValueFunction, Examples) {
  const SortedRectangle R({0.5, 0.1});
  EXPECT_NEAR(singular_value_function(R, 1.5), 0.5 * std::sqrt(0.1), 1e-15);
  EXPECT_NEAR(singular_value_function(R, 1.5), 0.158113883, 1e-9);
  EXPECT_NEAR(singular_value_function(R, 2.0), 0.05, 1e-16);
  EXPECT_DOUBLE_EQ(singular_value_function(R, 1.0), 0.5);
  const SortedRectangle cube({0.3, 0.3, 0.3});
  for (double s : {0.2, 1.0, 1.7, 2.5, 3.0}) EXPECT_NEAR(singular_value_function(cube, s), std::pow(0.3, s), 1e-15);
  EXPECT_THROW(singular_value_function(R, 0.0), Error);
  EXPECT_THROW(singular_value_function(R, 2.1), Error);
  EXPECT_EQ(SortedRectangle({0.1, 0.5}).sides(), (std::vector<double>{0.5, 0.1}));
  EXPECT_THROW(SortedRectangle({0.1, -0.5}), Error);
}

TEST(SingularValueFunction, MonotoneAndContinuousInS) {
  const SortedRectangle R({0.8, 0.3, 0.05});
  double prev = singular_value_function(R, 0.01);
  for (double s = 0.02; s <= 3.0; s += 0.01) {
    const double v = singular_value_function(R, s);
    EXPECT_LE(v, prev * (1 + 1e-12));
    prev = v;
  }
  for (double m : {1.0, 2.0}) {
    EXPECT_NEAR(singular_value_function(R, m - 1e-9), singular_value_function(R, m), 1e-8);
    EXPECT_NEAR(singular_value_function(R, m + 1e-9), singular_value_function(R, m), 1e-8);
  }
}

TEST(ContentSandwich, Examples) {
  const SortedRectangle R({0.5, 0.1});
  const auto a = content_sandwich(R, 1.0, 1.5);
  EXPECT_NEAR(a.upper, 0.158113883, 1e-9);
  EXPECT_NEAR(a.lower, a.upper / 4.0, 1e-16);
  const double c = std::exp2(-6.0);
  EXPECT_NEAR(content_sandwich(R, c, 1.3).lower, std::exp2(-8.0) * singular_value_function(R, 1.3), 1e-18);
  const auto full = content_sandwich(R, 0.5, 2.0);
  EXPECT_NEAR(full.upper, 0.05, 1e-16);
  EXPECT_NEAR(full.lower, 0.5 * 0.05 / 4.0, 1e-17);
  EXPECT_THROW(content_sandwich(R, 0.0, 1.0), Error);
}

TEST(MassDistribution, Examples) {
  EXPECT_DOUBLE_EQ(mdp_lower_bound(1.0, 4.0), 0.25);
  EXPECT_DOUBLE_EQ(mdp_lower_bound(1.0, 8.0), mdp_lower_bound(1.0, 4.0) / 2.0);
  EXPECT_THROW(mdp_lower_bound(1.0, 0.0), Error);

  // Lebesgue measure on the unit square: mu(B(x, r)) <= (2r)^2.
  auto lebesgue = [](const std::vector<double>& x, double r) {
    auto overlap = [&](double c) { return std::max(0.0, std::min(1.0, c + r) - std::max(0.0, c - r)); };
    return overlap(x[0]) * overlap(x[1]);
  };
  const std::vector<BallProbe> probes{{{0.5, 0.5}, 0.1}, {{0.0, 0.0}, 0.3}, {{0.5, 0.5}, 2.0}};
  EXPECT_DOUBLE_EQ(mdp_lower_bound(lebesgue, probes, 1.0, 4.0, 2.0), 0.25);
  EXPECT_THROW(mdp_lower_bound(lebesgue, probes, 1.0, 1.0, 2.0), Error);
}

TEST(BallMassConstant, IsAnUpperBoundOnTheRatio) {
  auto F = [](double r) { return std::min(4.0 * r * r, 1.0); };
  const double c = ball_mass_constant(F, 1.0, 1e-4, 10.0);
  EXPECT_GE(c, 2.0);  // sup of min(4r^2, 1)/r is 2, at r = 1/2
  EXPECT_LE(c, 2.01);
}

TEST(BallMassConstant, ExactEnvelopeMatchesAFineScan) {
  // 0.5 x 0.1 box: the kinks of the axis and strip terms coincide pairwise.
  for (double s : {0.6, 1.0, 1.5, 2.0}) {
    const double exact = detail::strip_box_mass_constant(0.5, 0.1, 0.1, 0.5, 0.05, s);
    double scan = 0.0;
    for (double r = 1e-3; r < 5.0; r *= 1.001) {
      const double m = std::min({std::min(2 * r, 0.5) * std::min(2 * r, 0.1),
                                 std::min(2 * std::numbers::sqrt2 * r, 0.5) * std::min(2 * std::numbers::sqrt2 * r, 0.1), 0.05});
      scan = std::max(scan, m / 0.05 / std::pow(r, s));
    }
    EXPECT_GE(exact, scan * (1 - 1e-12)) << s;
    EXPECT_LE(exact, scan * 1.002) << s;
  }
  EXPECT_DOUBLE_EQ(detail::strip_box_mass_constant(1, 1, 1, 1, 1, 2.0), 4.0);
}

TEST(BruteForceContent, UnitSquare) {
  const auto sq = ConvexPolygon::from_box({0, 0, 1, 1});
  const auto e = brute_force_content_2d(sq, 2.0);
  EXPECT_GE(e.upper, 1.0 - 1e-12);
  EXPECT_LE(e.upper, 1.05);
  EXPECT_GE(e.lower, 0.25);
  EXPECT_LE(e.lower, e.upper);
}

TEST(BruteForceContent, RectangleWithinSandwich) {
  const auto rect = ConvexPolygon::from_box({0.2, 0.3, 0.7, 0.4});
  const SortedRectangle R({0.5, 0.1});
  for (double s : {0.5, 1.0, 1.3, 1.5, 1.7, 2.0}) {
    const auto e = brute_force_content_2d(rect, s);
    const auto sw = content_sandwich(R, 1.0, s);
    EXPECT_GE(e.lower, sw.lower * 0.9) << s;
    EXPECT_LE(e.upper, sw.upper * 1.1) << s;
    EXPECT_LE(e.lower, e.upper) << s;
  }
}

TEST(BruteForceContent, ThinParallelogramBehavesLikeASegment) {
  const Parallelepiped P{{0.1, 0.1}, Matrix::from_columns({{0.8, 0.4}, {0.0, 1e-4}})};
  const auto poly = ConvexPolygon::from_parallelepiped(P);
  for (double s : {0.5, 0.8, 1.0}) {
    const auto e = brute_force_content_2d(poly, s);
    // The segment has max-norm length 0.8, so one square of side 0.8 covers it.
    EXPECT_LE(e.upper, std::pow(0.8, s) * (1 + 1e-9)) << s;
    EXPECT_GT(e.lower, 0.0);
  }
}

TEST(BruteForceContent, ScalingLaw) {
  const auto rect = ConvexPolygon::from_box({0.0, 0.0, 0.4, 0.1});
  for (double s : {0.7, 1.3}) {
    const double u1 = brute_force_content_2d(rect, s).upper;
    const double u2 = brute_force_content_2d(rect.scaled(0.5), s).upper;
    EXPECT_NEAR(u2 / u1, std::pow(0.5, s), 0.05 * std::pow(0.5, s)) << s;
  }
}

TEST(BruteForceContent, RejectsBadExponent) {
  const auto sq = ConvexPolygon::from_box({0, 0, 1, 1});
  EXPECT_THROW(brute_force_content_2d(sq, 0.0), Error);
  EXPECT_THROW(brute_force_content_2d(sq, 2.5), Error);
  EXPECT_EQ(brute_force_content_2d(ConvexPolygon(), 1.0).upper, 0.0);
}
