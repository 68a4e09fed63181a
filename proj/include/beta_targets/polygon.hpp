#pragma once

// Planar convex polygons: orientation tests, areas and clipping against
// axis-aligned boxes. Max-norm balls are axis-aligned squares, so every
// ball/cell query in the content oracle and the measure lab reduces to these.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "beta_targets/parallelepiped.hpp"

namespace beta_targets::geom {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Twice the signed area of (a, b, c); positive for a counter-clockwise turn.
inline double orient(const Point& a, const Point& b, const Point& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

/// Closed axis-aligned box [x0, x1] x [y0, y1].
struct Box {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool overlaps(const Box& o) const { return x0 <= o.x1 && o.x0 <= x1 && y0 <= o.y1 && o.y0 <= y1; }
};

/// Max-norm ball B(c, r): the square of side 2r centred at c.
inline Box ball(const Point& c, double r) { return {c.x - r, c.y - r, c.x + r, c.y + r}; }

class ConvexPolygon {
 public:
  ConvexPolygon() = default;
  /// Vertices in either orientation; stored counter-clockwise.
  explicit ConvexPolygon(std::vector<Point> pts) : pts_(std::move(pts)) {
    if (signed_area() < 0.0) std::reverse(pts_.begin(), pts_.end());
  }

  /// origin, origin + a1, origin + a1 + a2, origin + a2 for a planar parallelepiped.
  static ConvexPolygon from_parallelepiped(const Parallelepiped& P) {
    if (P.dim() != 2) fail(Module::numerical_lab, ErrorCode::domain_error, "planar geometry needs d = 2");
    const Point o{P.origin[0], P.origin[1]};
    const Point a{P.columns(0, 0), P.columns(1, 0)};
    const Point b{P.columns(0, 1), P.columns(1, 1)};
    return ConvexPolygon({o, {o.x + a.x, o.y + a.y}, {o.x + a.x + b.x, o.y + a.y + b.y}, {o.x + b.x, o.y + b.y}});
  }

  static ConvexPolygon from_box(const Box& b) { return ConvexPolygon({{b.x0, b.y0}, {b.x1, b.y0}, {b.x1, b.y1}, {b.x0, b.y1}}); }

  const std::vector<Point>& vertices() const { return pts_; }
  bool empty() const { return pts_.size() < 3 || area() <= 0.0; }

  double signed_area() const {
    double s = 0.0;
    for (std::size_t i = 0, n = pts_.size(); i < n; ++i) {
      const Point& p = pts_[i];
      const Point& q = pts_[(i + 1) % n];
      s += p.x * q.y - q.x * p.y;
    }
    return 0.5 * s;
  }
  double area() const { return std::fabs(signed_area()); }

  Box bbox() const {
    Box b{pts_.front().x, pts_.front().y, pts_.front().x, pts_.front().y};
    for (const auto& p : pts_) {
      b.x0 = std::min(b.x0, p.x);
      b.x1 = std::max(b.x1, p.x);
      b.y0 = std::min(b.y0, p.y);
      b.y1 = std::max(b.y1, p.y);
    }
    return b;
  }

  ConvexPolygon translated(double dx, double dy) const {
    ConvexPolygon out = *this;
    for (auto& p : out.pts_) p = {p.x + dx, p.y + dy};
    return out;
  }
  ConvexPolygon scaled(double s) const {
    ConvexPolygon out = *this;
    for (auto& p : out.pts_) p = {p.x * s, p.y * s};
    return out;
  }

  /// Intersection with a closed axis-aligned box (Sutherland-Hodgman; may be empty or degenerate).
  ConvexPolygon clipped(const Box& b) const {
    std::vector<Point> cur = pts_;
    // Each half-plane as (axis, bound, keep_greater).
    const std::array<std::tuple<int, double, bool>, 4> planes{{{0, b.x0, true}, {0, b.x1, false}, {1, b.y0, true}, {1, b.y1, false}}};
    for (const auto& [axis, bound, keep_greater] : planes) {
      if (cur.empty()) break;
      std::vector<Point> next;
      next.reserve(cur.size() + 2);
      auto coord = [axis = axis](const Point& p) { return axis == 0 ? p.x : p.y; };
      auto inside = [&, bound = bound, keep_greater = keep_greater](const Point& p) {
        return keep_greater ? coord(p) >= bound : coord(p) <= bound;
      };
      for (std::size_t i = 0, n = cur.size(); i < n; ++i) {
        const Point& p = cur[i];
        const Point& q = cur[(i + 1) % n];
        const bool pin = inside(p), qin = inside(q);
        if (pin) next.push_back(p);
        if (pin != qin) {
          const double t = (bound - coord(p)) / (coord(q) - coord(p));
          Point x{p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)};
          if (axis == 0) x.x = bound; else x.y = bound;
          next.push_back(x);
        }
      }
      cur = std::move(next);
    }
    ConvexPolygon out;
    out.pts_ = std::move(cur);
    return out;
  }

  double clipped_area(const Box& b) const {
    const Box bb = bbox();
    if (!bb.overlaps(b)) return 0.0;
    if (b.x0 <= bb.x0 && bb.x1 <= b.x1 && b.y0 <= bb.y0 && bb.y1 <= b.y1) return area();
    const ConvexPolygon c = clipped(b);
    return c.pts_.size() < 3 ? 0.0 : c.area();
  }

  /// True when the closed polygon and the closed box share a point (touching counts).
  /// Separating-axis test over the box axes and the polygon's edge normals.
  bool intersects(const Box& b) const {
    if (pts_.empty() || !bbox().overlaps(b)) return false;
    if (pts_.size() < 3) return true;
    const std::array<Point, 4> corners{{{b.x0, b.y0}, {b.x1, b.y0}, {b.x1, b.y1}, {b.x0, b.y1}}};
    for (std::size_t i = 0, n = pts_.size(); i < n; ++i) {
      const Point& p = pts_[i];
      const Point& q = pts_[(i + 1) % n];
      bool all_outside = true;
      for (const auto& c : corners)
        if (orient(p, q, c) >= 0.0) {
          all_outside = false;
          break;
        }
      if (all_outside) return false;
    }
    return true;
  }

  /// x-extent of the polygon restricted to the closed slab y0 <= y <= y1, if non-empty.
  std::optional<std::pair<double, double>> slab_x_range(double y0, double y1) const {
    const Box bb = bbox();
    if (y1 < bb.y0 || y0 > bb.y1) return std::nullopt;
    const ConvexPolygon c = clipped({bb.x0 - 1.0, y0, bb.x1 + 1.0, y1});
    if (c.pts_.empty()) return std::nullopt;
    double lo = c.pts_.front().x, hi = lo;
    for (const auto& p : c.pts_) {
      lo = std::min(lo, p.x);
      hi = std::max(hi, p.x);
    }
    return std::make_pair(lo, hi);
  }

  /// Width of the thinnest strip containing the polygon (minimum over edge directions).
  double min_width() const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0, n = pts_.size(); i < n; ++i) {
      const Point& p = pts_[i];
      const Point& q = pts_[(i + 1) % n];
      const double len = std::hypot(q.x - p.x, q.y - p.y);
      if (len == 0.0) continue;
      double far = 0.0;
      for (const auto& c : pts_) far = std::max(far, std::fabs(orient(p, q, c)) / len);
      best = std::min(best, far);
    }
    return best;
  }

  /// Extent of the polygon along the direction of its thinnest strip.
  double extent_along_min_width_strip() const {
    double best = std::numeric_limits<double>::infinity();
    double along = 0.0;
    for (std::size_t i = 0, n = pts_.size(); i < n; ++i) {
      const Point& p = pts_[i];
      const Point& q = pts_[(i + 1) % n];
      const double len = std::hypot(q.x - p.x, q.y - p.y);
      if (len == 0.0) continue;
      const double ux = (q.x - p.x) / len, uy = (q.y - p.y) / len;
      double far = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (const auto& c : pts_) {
        far = std::max(far, std::fabs(orient(p, q, c)) / len);
        const double proj = (c.x - p.x) * ux + (c.y - p.y) * uy;
        lo = std::min(lo, proj);
        hi = std::max(hi, proj);
      }
      if (far < best) {
        best = far;
        along = hi - lo;
      }
    }
    return along;
  }

 private:
  std::vector<Point> pts_;
};

}  // namespace beta_targets::geom
