#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "beta_targets/polygon.hpp"

using namespace beta_targets;
using geom::Box;
using geom::ConvexPolygon;

TEST(Polygon, AreaAndOrientation) {
  const ConvexPolygon cw({{0, 0}, {0, 1}, {2, 1}, {2, 0}});
  EXPECT_DOUBLE_EQ(cw.area(), 2.0);
  EXPECT_GT(cw.signed_area(), 0.0);
  const Parallelepiped P{{1, 1}, Matrix::from_columns({{1, 0}, {3, 3}})};
  EXPECT_NEAR(ConvexPolygon::from_parallelepiped(P).area(), 3.0, 1e-14);
  EXPECT_TRUE(ConvexPolygon({{0, 0}, {1, 1}, {2, 2}}).empty());
}

TEST(Polygon, ClipAgainstBoxes) {
  const ConvexPolygon diamond({{1, 0}, {2, 1}, {1, 2}, {0, 1}});
  EXPECT_DOUBLE_EQ(diamond.area(), 2.0);
  EXPECT_NEAR(diamond.clipped_area({0, 0, 1, 2}), 1.0, 1e-15);
  EXPECT_NEAR(diamond.clipped_area({0, 0, 1, 1}), 0.5, 1e-15);
  EXPECT_NEAR(diamond.clipped_area({-5, -5, 5, 5}), 2.0, 1e-15);
  EXPECT_EQ(diamond.clipped_area({3, 3, 4, 4}), 0.0);
}

TEST(Polygon, IntersectsCountsTouching) {
  const ConvexPolygon tri({{0, 0}, {1, 0}, {0, 1}});
  EXPECT_TRUE(tri.intersects({1, 0, 2, 1}));     // shares the vertex (1, 0)
  EXPECT_TRUE(tri.intersects({0.5, 0.5, 1, 1}));  // touches the hypotenuse
  EXPECT_FALSE(tri.intersects({0.6, 0.6, 1, 1}));
  EXPECT_FALSE(tri.intersects({-1, -1, -0.1, 2}));
}

TEST(Polygon, SlabRange) {
  const ConvexPolygon tri({{0, 0}, {2, 0}, {0, 2}});
  const auto r = tri.slab_x_range(1.0, 1.5);
  ASSERT_TRUE(r);
  EXPECT_NEAR(r->first, 0.0, 1e-15);
  EXPECT_NEAR(r->second, 1.0, 1e-15);
  EXPECT_FALSE(tri.slab_x_range(2.5, 3.0));
}

TEST(Polygon, WidthOfAParallelogram) {
  const Parallelepiped P{{0, 0}, Matrix::from_columns({{4, 0}, {1, 0.5}})};
  const auto poly = ConvexPolygon::from_parallelepiped(P);
  EXPECT_NEAR(poly.min_width(), 0.5, 1e-15);
  EXPECT_NEAR(poly.extent_along_min_width_strip(), 5.0, 1e-14);
}

TEST(Polygon, ClippedAreaMatchesMonteCarlo) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const ConvexPolygon poly({{0.1, 0.2}, {0.9, 0.05}, {0.8, 0.9}, {0.3, 0.7}});
  for (int trial = 0; trial < 20; ++trial) {
    const double x = u(rng), y = u(rng), r = 0.05 + 0.3 * u(rng);
    const Box b = geom::ball({x, y}, r);
    int hits = 0;
    const int N = 40000;
    for (int k = 0; k < N; ++k) {
      const geom::Point p{b.x0 + 2 * r * u(rng), b.y0 + 2 * r * u(rng)};
      const auto& v = poly.vertices();
      bool inside = true;
      for (std::size_t i = 0; i < v.size(); ++i)
        if (geom::orient(v[i], v[(i + 1) % v.size()], p) < 0) inside = false;
      hits += inside;
    }
    const double mc = 4 * r * r * hits / N;
    EXPECT_NEAR(poly.clipped_area(b), mc, 4 * r * r * 0.02);
  }
}
