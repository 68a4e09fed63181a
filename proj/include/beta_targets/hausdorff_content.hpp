#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "beta_targets/error.hpp"
#include "beta_targets/polygon.hpp"

namespace beta_targets {

/// Side lengths a_1 >= ... >= a_d > 0 of a hyperrectangle.
class SortedRectangle {
 public:
  /// Sides in any order; they are sorted non-increasingly.
  explicit SortedRectangle(std::vector<double> sides) : sides_(std::move(sides)) {
    if (sides_.empty()) fail(Module::hausdorff_content, ErrorCode::domain_error, "rectangle needs at least one side");
    for (double a : sides_)
      if (!(a > 0.0) || !std::isfinite(a))
        fail(Module::hausdorff_content, ErrorCode::domain_error, "side lengths must be finite and positive");
    std::sort(sides_.begin(), sides_.end(), std::greater<>());
  }
  std::size_t dim() const { return sides_.size(); }
  double side(std::size_t i) const { return sides_[i]; }
  const std::vector<double>& sides() const { return sides_; }
  double volume() const {
    double v = 1.0;
    for (double a : sides_) v *= a;
    return v;
  }

 private:
  std::vector<double> sides_;
};

/// phi^s(R) = a_1 ... a_m a_{m+1}^{s-m}, m = floor(s), for 0 < s <= d.
inline double singular_value_function(const SortedRectangle& R, double s) {
  const auto d = static_cast<double>(R.dim());
  if (!(s > 0.0) || !(s <= d))
    fail(Module::hausdorff_content, ErrorCode::domain_error, "s must lie in (0, d]");
  const auto m = static_cast<std::size_t>(std::floor(s));
  double value = 1.0;
  for (std::size_t i = 0; i < m; ++i) value *= R.side(i);
  if (m < R.dim()) value *= std::pow(R.side(m), s - static_cast<double>(m));
  return value;
}

struct ContentSandwich {
  double lower = 0.0;
  double upper = 0.0;
};

/// For E inside R with vol(E) >= c vol(R): c 2^-d phi^s(R) <= H^s_inf(E) <= phi^s(R).
inline ContentSandwich content_sandwich(const SortedRectangle& R, double c, double s) {
  if (!(c > 0.0) || !(c <= 1.0)) fail(Module::hausdorff_content, ErrorCode::domain_error, "volume ratio c must lie in (0, 1]");
  const double phi = singular_value_function(R, s);
  return {c * std::ldexp(phi, -static_cast<int>(R.dim())), phi};
}

/// Mass distribution principle: if mu(B(x, r)) <= c r^s for every ball, H^s_inf(E) >= mu(E) / c.
inline double mdp_lower_bound(double total_mass, double c) {
  if (!(c > 0.0)) fail(Module::hausdorff_content, ErrorCode::domain_error, "ball-mass constant must be positive");
  if (!(total_mass >= 0.0)) fail(Module::hausdorff_content, ErrorCode::domain_error, "total mass must be non-negative");
  return total_mass / c;
}

/// A ball B(center, r) at which a claimed ball-mass constant is spot-checked.
struct BallProbe {
  std::vector<double> center;
  double r = 0.0;
};

/// mdp_lower_bound after confirming mu(B) <= c r^s on every probe ball.
template <class BallMass>
double mdp_lower_bound(BallMass&& ball_mass, std::span<const BallProbe> probes, double total_mass, double c, double s) {
  for (const auto& p : probes) {
    const double mass = ball_mass(p.center, p.r);
    if (mass > c * std::pow(p.r, s) * (1.0 + 1e-12))
      fail(Module::hausdorff_content, ErrorCode::precondition_failed,
           "probe ball of radius " + std::to_string(p.r) + " carries mass " + std::to_string(mass) + " above c r^s");
  }
  return mdp_lower_bound(total_mass, c);
}

/// sup over r in [r_min, r_max] of F(r) / r^s for a non-decreasing majorant F.
///
/// Evaluated on a geometric grid r_j = r_min q^j: on [r_j, r_{j+1}] the ratio
/// is at most F(r_{j+1}) / r_j^s, so the result is an upper bound, not an estimate.
template <class Majorant>
double ball_mass_constant(Majorant&& F, double s, double r_min, double r_max, double q = 1.0005) {
  if (!(r_min > 0.0) || !(r_max > r_min) || !(q > 1.0))
    fail(Module::hausdorff_content, ErrorCode::domain_error, "need 0 < r_min < r_max and q > 1");
  double best = 0.0;
  double r = r_min;
  while (r < r_max) {
    const double next = std::min(r * q, r_max);
    best = std::max(best, F(next) / std::pow(r, s));
    r = next;
  }
  return best;
}

struct ContentEstimate {
  double lower = 0.0;
  double upper = 0.0;
  /// Square side lengths of every grid cover that was tried.
  std::vector<double> scale_grid;
};

namespace detail {

// Closed cells of side h anchored at (x0, y0) meeting the polygon, limited to
// the ceil(W/h) x ceil(H/h) block that covers the bounding box.
inline std::uint64_t occupied_cells(const geom::ConvexPolygon& shape, double x0, double y0, double W, double H, double h) {
  const auto cols = static_cast<std::int64_t>(std::max(1.0, std::ceil(W / h - 1e-9)));
  const auto rows = static_cast<std::int64_t>(std::max(1.0, std::ceil(H / h - 1e-9)));
  std::uint64_t count = 0;
  for (std::int64_t i = 0; i < rows; ++i) {
    const auto range = shape.slab_x_range(y0 + static_cast<double>(i) * h, y0 + static_cast<double>(i + 1) * h);
    if (!range) continue;
    const auto lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil((range->first - x0) / h)) - 1);
    const auto hi = std::min<std::int64_t>(cols - 1, static_cast<std::int64_t>(std::floor((range->second - x0) / h)));
    if (hi >= lo) count += static_cast<std::uint64_t>(hi - lo + 1);
  }
  return count;
}

// Best mixed-scale cover built from a dyadic quadtree over the square of side L
// anchored at (x0, y0): each node costs min(side^s, sum of its children's costs).
inline double quadtree_cover_cost(const geom::ConvexPolygon& shape, double x0, double y0, double L, int depth, double s) {
  const std::size_t n = std::size_t{1} << depth;
  const double h = L / static_cast<double>(n);
  std::vector<double> cost(n * n, 0.0);
  const double leaf = std::pow(h, s);
  for (std::size_t i = 0; i < n; ++i) {
    const auto range = shape.slab_x_range(y0 + static_cast<double>(i) * h, y0 + static_cast<double>(i + 1) * h);
    if (!range) continue;
    const auto lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil((range->first - x0) / h)) - 1);
    const auto hi = std::min<std::int64_t>(static_cast<std::int64_t>(n) - 1,
                                           static_cast<std::int64_t>(std::floor((range->second - x0) / h)));
    for (std::int64_t j = lo; j <= hi; ++j) cost[i * n + static_cast<std::size_t>(j)] = leaf;
  }
  for (std::size_t m = n / 2; m >= 1; m /= 2) {
    const double side_cost = std::pow(L / static_cast<double>(m), s);
    std::vector<double> parent(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t c = 2 * m;
        const double sum = cost[(2 * i) * c + 2 * j] + cost[(2 * i) * c + 2 * j + 1] + cost[(2 * i + 1) * c + 2 * j] +
                           cost[(2 * i + 1) * c + 2 * j + 1];
        parent[i * m + j] = sum > 0.0 ? std::min(side_cost, sum) : 0.0;
      }
    cost = std::move(parent);
  }
  return cost.front();
}

}  // namespace detail

inline constexpr int kMaxQuadtreeDepth = 9;

inline std::vector<int> default_content_depths() { return {4, 5, 6, 7, 8, 9, 10, 11, 12}; }

namespace detail {

/// Exact sup over r > 0 of min(axis(r), strip(r), A) / (A r^s), where
///   axis(r)  = min(2r, W) min(2r, H),  strip(r) = min(2 sqrt2 r, l) min(2 sqrt2 r, w).
/// Between kinks every term is a monomial c r^k, so the ratio is a monomial
/// on each piece of the lower envelope; the sup sits at a kink or a crossing.
inline double strip_box_mass_constant(double W, double H, double w, double l, double A, double s) {
  const double d = 2.0 * std::numbers::sqrt2;
  std::vector<double> kinks;
  for (double k : {W / 2.0, H / 2.0, w / d, l / d})
    if (k > 0.0) kinks.push_back(k);
  std::sort(kinks.begin(), kinks.end());
  kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());

  struct Mono {
    double c;
    int k;
  };
  auto factor = [](double slope, double cap, double r, Mono& m) {
    if (slope * r < cap) {
      m.c *= slope;
      ++m.k;
    } else {
      m.c *= cap;
    }
  };
  auto value = [&](double r) {
    const double axis = std::min(2.0 * r, W) * std::min(2.0 * r, H);
    const double strip = std::min(d * r, l) * std::min(d * r, w);
    return std::min({axis, strip, A}) / A / std::pow(r, s);
  };

  std::vector<double> candidates = kinks;
  candidates.push_back(kinks.front() / 2.0);  // the first piece, which is constant in r when s = 2
  for (std::size_t i = 0; i <= kinks.size(); ++i) {
    const double lo = i == 0 ? 0.0 : kinks[i - 1];
    const double hi = i == kinks.size() ? std::numeric_limits<double>::infinity() : kinks[i];
    const double mid = i == 0 ? hi / 2.0 : (i == kinks.size() ? 2.0 * lo : std::sqrt(lo * hi));
    Mono axis{1.0, 0}, strip{1.0, 0};
    factor(2.0, W, mid, axis);
    factor(2.0, H, mid, axis);
    factor(d, l, mid, strip);
    factor(d, w, mid, strip);
    const Mono terms[3] = {axis, strip, {A, 0}};
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b) {
        if (terms[a].k == terms[b].k) continue;
        const double r = std::pow(terms[b].c / terms[a].c, 1.0 / (terms[a].k - terms[b].k));
        if (r > lo && r < hi) candidates.push_back(r);
      }
  }
  double best = 0.0;
  for (double r : candidates) best = std::max(best, value(r));
  return best;
}

}  // namespace detail

/// Brute-force bounds on H^s_inf of a planar convex shape under the max norm.
///
/// upper: the cheapest of several explicit square covers, all anchored at the
/// shape's bounding-box corner: uniform grids of side L 2^-k (L the long side
/// of the box, k = 0 and each requested depth), grids of side a/j for each box
/// side a and j <= 8, and a quadtree merge of the dyadic grid.
/// lower: the mass distribution principle for normalised area on the shape,
/// with the ball-mass constant taken from the majorant
///   area(B(x,r) n E) <= min( min(2r, W) min(2r, H),
///                            min(2 sqrt2 r, l) min(2 sqrt2 r, w), area(E) )
/// (W x H the bounding box, w the minimal width, l the extent along that strip).
inline ContentEstimate brute_force_content_2d(const geom::ConvexPolygon& shape, double s,
                                              const std::vector<int>& depths = default_content_depths()) {
  if (!(s > 0.0) || !(s <= 2.0)) fail(Module::hausdorff_content, ErrorCode::domain_error, "s must lie in (0, 2]");
  ContentEstimate est;
  if (shape.empty()) return est;
  const geom::Box bb = shape.bbox();
  const double W = bb.width(), H = bb.height();
  const double L = std::max(W, H);
  const double A = shape.area();

  std::vector<double> sides{L};
  for (int k : depths) {
    if (k < 0 || k > 20) fail(Module::hausdorff_content, ErrorCode::domain_error, "grid depth must lie in [0, 20]");
    sides.push_back(std::ldexp(L, -k));
  }
  for (double a : {W, H})
    if (a > 0.0)
      for (int j = 1; j <= 8; ++j) sides.push_back(a / j);
  std::sort(sides.begin(), sides.end(), std::greater<>());
  sides.erase(std::unique(sides.begin(), sides.end()), sides.end());

  est.upper = std::numeric_limits<double>::infinity();
  for (double h : sides) {
    // Skip grids too fine to enumerate row by row.
    if (std::max(W, H) / h > 1 << 14) continue;
    const auto cells = detail::occupied_cells(shape, bb.x0, bb.y0, W, H, h);
    est.upper = std::min(est.upper, static_cast<double>(cells) * std::pow(h, s));
    est.scale_grid.push_back(h);
  }
  int dp_depth = 0;
  for (int k : depths) dp_depth = std::max(dp_depth, k);
  dp_depth = std::min(dp_depth, kMaxQuadtreeDepth);
  est.upper = std::min(est.upper, detail::quadtree_cover_cost(shape, bb.x0, bb.y0, L, dp_depth, s));

  if (!(A > 0.0)) return est;
  est.lower = mdp_lower_bound(1.0, detail::strip_box_mass_constant(W, H, shape.min_width(),
                                                                   shape.extent_along_min_width_strip(), A, s));
  return est;
}

}  // namespace beta_targets
