#pragma once

// Planar, desk-scale replays of the two halves of the dimension proof: the
// union E_n of translated copies f^n P_n + z* with its grid cover counts
// (upper bound), and the measure mu_n spread uniformly over the full copies
// inside a square D, probed with random max-norm balls (lower bound).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "beta_targets/beta_dynamics.hpp"
#include "beta_targets/dimension_engine.hpp"
#include "beta_targets/error.hpp"
#include "beta_targets/parallel.hpp"
#include "beta_targets/parallelepiped.hpp"
#include "beta_targets/polygon.hpp"

namespace beta_targets {

/// Axis-aligned square I_1 x I_2 (half-open sides of equal length).
struct Square {
  Interval x{0.0, 1.0};
  Interval y{0.0, 1.0};

  double side() const { return x.length(); }
  geom::Box box() const { return {x.lo, y.lo, x.hi, y.hi}; }
  static Square unit() { return {}; }
};

enum class EnMode { all, full_in_D };

struct EnCopy {
  Word word_x;
  Word word_y;
  geom::Point z;  ///< left endpoints of the two cylinders
  geom::ConvexPolygon shape;
};

struct EnSet {
  std::size_t n = 0;
  EnMode mode = EnMode::all;
  std::optional<Square> D;
  std::vector<EnCopy> copies;
  std::size_t count_x = 0;  ///< cylinders used along each axis
  std::size_t count_y = 0;
  /// Area of one unclipped copy, |det f^n P_n|.
  double copy_area = 0.0;
};

inline constexpr std::uint64_t kDefaultLabCap = 50'000'000;

namespace detail {

inline void require_planar(const TargetSpec& spec) {
  if (spec.dim() != 2) fail(Module::numerical_lab, ErrorCode::domain_error, "the lab works in d = 2 only");
}

}  // namespace detail

/// Conditions on D and n for building mu_n with slack eps:
/// n >= -(1 + eps/d) log_beta_i |D| and beta_i^-n / 2 <= |D|^(d + eps) for each i.
inline bool level_admissible_for_square(const BetaSystem& sys, std::size_t n, const Square& D, double eps) {
  const double side = D.side();
  const auto d = static_cast<double>(sys.dim());
  for (double b : sys.betas()) {
    const double need = -(1.0 + eps / d) * std::log(side) / std::log(b);
    if (static_cast<double>(n) < need - 1e-12) return false;
    if (std::pow(b, -static_cast<double>(n)) / 2.0 > std::pow(side, d + eps) * (1.0 + 1e-12)) return false;
  }
  return true;
}

/// The copies z* + f^n P_n over admissible words (mode all), or over full words
/// whose cylinders lie in D, each clipped to its cylinder product (mode full_in_D).
/// The translation of P_n is carried through f^n, so a copy is exactly the set
/// of points in the cylinder product whose n-th image lies in P_n.
inline EnSet build_E_n(const TargetSpec& spec, std::size_t n, EnMode mode = EnMode::all, std::optional<Square> D = std::nullopt,
                       std::optional<double> eps = std::nullopt, std::uint64_t cap = kDefaultLabCap) {
  detail::require_planar(spec);
  if (mode == EnMode::full_in_D) {
    if (!D) fail(Module::numerical_lab, ErrorCode::domain_error, "full_in_D mode needs a square D");
    if (std::fabs(D->x.length() - D->y.length()) > 1e-12 * D->x.length())
      fail(Module::numerical_lab, ErrorCode::domain_error, "D must be a square");
    if (eps && !level_admissible_for_square(spec.system, n, *D, *eps))
      fail(Module::numerical_lab, ErrorCode::precondition_failed,
           "level " + std::to_string(n) + " violates n >= -(1+eps/d) log_beta |D| or beta^-n/2 <= |D|^(d+eps)");
  }
  EnSet E;
  E.n = n;
  E.mode = mode;
  E.D = D;
  const Parallelepiped image = scale_by_f(spec.system, target_at(spec, n), n);
  E.copy_area = std::fabs(determinant(image.columns));
  const geom::ConvexPolygon base = geom::ConvexPolygon::from_parallelepiped(image);

  std::vector<CylinderNode<double>> axis[2];
  for (int i = 0; i < 2; ++i) {
    EnumerationOptions opts;
    opts.node_cap = cap;
    if (mode == EnMode::full_in_D) {
      opts.full_only = true;
      opts.within = i == 0 ? D->x : D->y;
    }
    axis[i] = enumerate_cylinders<double>(BetaParam(spec.system.beta(static_cast<std::size_t>(i))), n, opts);
  }
  E.count_x = axis[0].size();
  E.count_y = axis[1].size();
  const auto total = static_cast<std::uint64_t>(E.count_x) * E.count_y;
  if (total > cap)
    fail(Module::numerical_lab, ErrorCode::resource_limit, "E_n has " + std::to_string(total) + " copies, above the cap");
  E.copies.reserve(total);
  for (const auto& cx : axis[0])
    for (const auto& cy : axis[1]) {
      EnCopy c{cx.word, cy.word, {cx.left, cy.left}, base.translated(cx.left, cy.left)};
      if (mode == EnMode::full_in_D) c.shape = c.shape.clipped({cx.left, cy.left, cx.right(), cy.right()});
      E.copies.push_back(std::move(c));
    }
  return E;
}

/// Uniform-on-copies probability measure on E_n n D: each copy carries mass
/// 1 / #copies, spread as normalised area.
struct MuMeasure {
  EnSet E;
  double eps = 0.0;
  std::vector<double> copy_areas;
  std::vector<geom::Box> copy_boxes;

  const Square& D() const { return *E.D; }
  double copy_mass() const { return 1.0 / static_cast<double>(E.copies.size()); }
};

/// mu_n on D with slack eps; D and n must satisfy level_admissible_for_square.
inline MuMeasure build_mu(const TargetSpec& spec, std::size_t n, const Square& D, double eps,
                          std::uint64_t cap = kDefaultLabCap) {
  if (!(eps > 0.0)) fail(Module::numerical_lab, ErrorCode::domain_error, "eps must be positive");
  MuMeasure M{build_E_n(spec, n, EnMode::full_in_D, D, eps, cap), eps, {}, {}};
  if (M.E.copies.empty())
    fail(Module::numerical_lab, ErrorCode::precondition_failed, "D contains no full level-" + std::to_string(n) + " cylinder product");
  for (const auto& c : M.E.copies) {
    const double a = c.shape.empty() ? 0.0 : c.shape.area();
    if (!(a > 0.0))
      fail(Module::numerical_lab, ErrorCode::degenerate_input, "a copy of f^n P_n has no area inside its cylinder product");
    M.copy_areas.push_back(a);
    M.copy_boxes.push_back(c.shape.bbox());
  }
  return M;
}

/// The slack used when none is given: half the gap between s_n and t.
inline double default_epsilon(double s_n, double t) {
  if (!(t < s_n)) fail(Module::numerical_lab, ErrorCode::precondition_failed, "t must be below s_n");
  return (s_n - t) / 2.0;
}

/// mu_n(B(center, r)) by exact clipping of every copy against the max-norm ball.
inline double mu_ball_mass(const MuMeasure& M, const geom::Point& center, double r) {
  if (!(r > 0.0)) fail(Module::numerical_lab, ErrorCode::domain_error, "radius must be positive");
  const geom::Box B = geom::ball(center, r);
  double mass = 0.0;
  for (std::size_t k = 0; k < M.E.copies.size(); ++k) {
    if (!M.copy_boxes[k].overlaps(B)) continue;
    mass += M.E.copies[k].shape.clipped_area(B) / M.copy_areas[k];
  }
  return std::min(1.0, mass * M.copy_mass());
}

/// Cells [j tau, (j+1) tau] x [i tau, (i+1) tau] of the grid anchored at the
/// origin whose interior meets a copy. For a copy with interior these closed
/// cells still cover it, and a cell merely touching its boundary is not counted;
/// copies without area fall back to every closed cell they touch.
inline std::uint64_t empirical_cover_count(const EnSet& E, double tau, std::uint64_t cap = kDefaultLabCap, unsigned threads = 1) {
  if (!(tau > 0.0) || !(tau < 1.0)) fail(Module::numerical_lab, ErrorCode::domain_error, "tau must lie in (0, 1)");
  if (1.0 / tau > 1e9) fail(Module::numerical_lab, ErrorCode::resource_limit, "grid mesh below 1e-9");
  // Cells are keyed by (row + 2) * 2^32 + (col + 2); copies of non-full cylinders may poke slightly past 1.
  auto key = [](std::int64_t i, std::int64_t j) { return (static_cast<std::uint64_t>(i + 2) << 32) | static_cast<std::uint64_t>(j + 2); };
  std::vector<std::vector<std::uint64_t>> per_copy(E.copies.size());
  std::vector<std::uint64_t> touched(E.copies.size(), 0);
  parallel_for(E.copies.size(), threads, [&](std::size_t k) {
    const auto& shape = E.copies[k].shape;
    if (shape.vertices().empty()) return;
    const bool solid = !shape.empty();
    // Index ranges of cells meeting [a, b]: open cells for solid shapes, closed ones otherwise.
    auto first = [&](double a) { return static_cast<std::int64_t>(solid ? std::floor(a / tau) : std::ceil(a / tau) - 1); };
    auto last = [&](double b) { return static_cast<std::int64_t>(solid ? std::ceil(b / tau) - 1 : std::floor(b / tau)); };
    const geom::Box bb = shape.bbox();
    const auto row_lo = std::max<std::int64_t>(first(bb.y0), -1), row_hi = last(bb.y1);
    const auto estimate = static_cast<double>(row_hi - row_lo + 1) * static_cast<double>(last(bb.x1) - first(bb.x0) + 1);
    if (estimate > static_cast<double>(cap))
      fail(Module::numerical_lab, ErrorCode::resource_limit, "one copy spans more grid cells than the cap");
    auto& cells = per_copy[k];
    for (std::int64_t i = row_lo; i <= row_hi; ++i) {
      const auto range = shape.slab_x_range(static_cast<double>(i) * tau, static_cast<double>(i + 1) * tau);
      if (!range) continue;
      if (solid && !(range->second > range->first)) continue;  // only touches the slab boundary
      const auto lo = std::max<std::int64_t>(-1, first(range->first)), hi = last(range->second);
      for (std::int64_t j = lo; j <= hi; ++j) cells.push_back(key(i, j));
    }
    touched[k] = cells.size();
  });
  std::uint64_t total = 0;
  for (auto t : touched) total += t;
  if (total > cap) fail(Module::numerical_lab, ErrorCode::resource_limit, "grid occupancy touched more cells than the cap");
  std::vector<std::uint64_t> all;
  all.reserve(total);
  for (auto& v : per_copy) {
    all.insert(all.end(), v.begin(), v.end());
    std::vector<std::uint64_t>().swap(v);
  }
  std::sort(all.begin(), all.end());
  return static_cast<std::uint64_t>(std::unique(all.begin(), all.end()) - all.begin());
}

/// log2 of prod_{K1} tau^-1 prod_{not K1} beta_i^n prod_{K2} |gamma_i| / tau,
/// the ball count the covering argument predicts for E_n at scale tau.
inline double predicted_cover_log2(const LevelScales& scales, double log2_tau) {
  double v = 0.0;
  for (double c : scales.contraction_log2) v += c <= log2_tau ? -log2_tau : -c;
  for (double g : scales.gamma_log2)
    if (g >= log2_tau) v += g - log2_tau;
  return v;
}

struct CoverRow {
  double tau_log2 = 0.0;
  std::uint64_t count = 0;
  double predicted_log2 = 0.0;
  double ratio = 0.0;           ///< count / predicted
  double volume_at_s_n = 0.0;   ///< count * tau^s_n
  double volume_above = 0.0;    ///< count * tau^(s_n + excess)
};

struct CoverScan {
  std::size_t n = 0;
  double s_n = 0.0;
  double argmin_tau_log2 = 0.0;
  double excess = 0.0;
  std::vector<CoverRow> rows;

  const CoverRow& at_argmin() const {
    for (const auto& r : rows)
      if (r.tau_log2 == argmin_tau_log2) return r;
    fail(Module::numerical_lab, ErrorCode::internal_consistency, "argmin tau missing from the scan");
  }
};

/// Grid cover counts of E_n (all admissible words) at every tau in A_n, or at
/// the given log2 scales, next to the predicted count and the s-volumes.
inline CoverScan cover_exponent_scan(const TargetSpec& spec, std::size_t n, std::vector<double> taus_log2 = {}, double excess = 0.2,
                                     std::uint64_t cap = kDefaultLabCap, unsigned threads = 1) {
  detail::require_planar(spec);
  const GammaMagnitudes g = gamma_magnitudes(spec, n, ComputeMode::double_precision);
  const LevelScales scales = level_scales(spec, n, g);
  const LevelData level = evaluate_level(scales);
  if (taus_log2.empty()) taus_log2 = level.candidates_log2;
  const EnSet E = build_E_n(spec, n, EnMode::all, std::nullopt, std::nullopt, cap);
  CoverScan scan{n, level.s_n, level.argmin_tau_log2, excess, {}};
  for (double L : taus_log2) {
    CoverRow row;
    row.tau_log2 = L;
    row.count = empirical_cover_count(E, std::exp2(L), cap, threads);
    row.predicted_log2 = predicted_cover_log2(scales, L);
    const double count_log2 = std::log2(static_cast<double>(row.count));
    row.ratio = std::exp2(count_log2 - row.predicted_log2);
    row.volume_at_s_n = std::exp2(count_log2 + level.s_n * L);
    row.volume_above = std::exp2(count_log2 + (level.s_n + excess) * L);
    scan.rows.push_back(row);
  }
  return scan;
}

enum class RadiusRegime { above_D, below_gamma, cylinder_to_D, between_scales };

inline const char* to_string(RadiusRegime r) {
  switch (r) {
    case RadiusRegime::above_D: return "r>=|D|";
    case RadiusRegime::below_gamma: return "r<=|gamma_d|";
    case RadiusRegime::cylinder_to_D: return "beta^-n<r<=|D|";
    case RadiusRegime::between_scales: return "tau_k+1<=r<tau_k";
  }
  return "?";
}

struct BallWitness {
  geom::Point center;
  double r = 0.0;
  RadiusRegime regime = RadiusRegime::above_D;
  double mass = 0.0;
  double ratio = 0.0;
};

struct MeasureCheck {
  double t = 0.0;
  double max_ratio = 0.0;
  BallWitness worst;
  /// Largest ratio seen in each regime, indexed by RadiusRegime.
  std::array<double, 4> regime_max{};
  std::array<std::size_t, 4> regime_samples{};
};

namespace detail {

// Uniform point in a convex polygon: pick a fan triangle by area, then a uniform point in it.
template <class Rng>
geom::Point sample_in(const geom::ConvexPolygon& shape, Rng& rng) {
  const auto& v = shape.vertices();
  std::vector<double> w;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) w.push_back(std::fabs(geom::orient(v[0], v[i], v[i + 1])));
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  const std::size_t i = pick(rng) + 1;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double a = u01(rng), b = u01(rng);
  if (a + b > 1.0) {
    a = 1.0 - a;
    b = 1.0 - b;
  }
  return {v[0].x + a * (v[i].x - v[0].x) + b * (v[i + 1].x - v[0].x), v[0].y + a * (v[i].y - v[0].y) + b * (v[i + 1].y - v[0].y)};
}

}  // namespace detail

/// Largest mu_n(B(x, r)) |D|^d / r^t over `samples` balls centred on the support.
/// Radii are log-uniform within one of four regimes, taken in rotation:
/// [|D|, 2|D|]; [|gamma_d|/16, |gamma_d|]; (max beta_i^-n, |D|]; and a random
/// gap [tau_{k+1}, tau_k) between consecutive elements of A_n. Empty regimes are skipped.
inline MeasureCheck verify_measure_bound(const MuMeasure& M, const TargetSpec& spec, double t, std::size_t samples, std::uint64_t seed,
                                         unsigned threads = 1) {
  if (!(t >= 0.0)) fail(Module::numerical_lab, ErrorCode::domain_error, "t must be non-negative");
  const LevelData level = s_n(spec, M.E.n, ComputeMode::double_precision);
  if (t > 0.0 && !(t < level.s_n - M.eps + 1e-12))
    fail(Module::numerical_lab, ErrorCode::precondition_failed, "t must be below s_n - eps");
  const double side = M.D().side();
  const double d = 2.0;
  double max_contraction = 0.0;
  for (std::size_t i = 0; i < spec.dim(); ++i)
    max_contraction = std::max(max_contraction, std::exp2(spec.system.log2_contraction(i, static_cast<double>(M.E.n))));
  const double gamma_d = std::exp2(level.gamma_log2.back());
  const auto& A = level.candidates_log2;  // increasing

  struct Range {
    RadiusRegime regime;
    double lo, hi;  // log2 bounds
  };
  std::vector<Range> regimes{{RadiusRegime::above_D, std::log2(side), std::log2(2.0 * side)},
                             {RadiusRegime::below_gamma, std::log2(gamma_d) - 4.0, std::log2(gamma_d)}};
  if (max_contraction < side) regimes.push_back({RadiusRegime::cylinder_to_D, std::log2(max_contraction), std::log2(side)});
  if (A.size() >= 2) regimes.push_back({RadiusRegime::between_scales, 0.0, 0.0});

  std::vector<BallWitness> results(samples);
  parallel_for(samples, threads, [&](std::size_t k) {
    // One generator per sample keeps results independent of the thread count.
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (k + 1)));
    std::uniform_int_distribution<std::size_t> copy_pick(0, M.E.copies.size() - 1);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const Range& R = regimes[k % regimes.size()];
    double lo = R.lo, hi = R.hi;
    if (R.regime == RadiusRegime::between_scales) {
      std::uniform_int_distribution<std::size_t> gap(0, A.size() - 2);
      const std::size_t j = gap(rng);
      lo = A[j];
      hi = A[j + 1];
    }
    BallWitness w;
    w.regime = R.regime;
    w.r = std::exp2(lo + (hi - lo) * u01(rng));
    w.center = detail::sample_in(M.E.copies[copy_pick(rng)].shape, rng);
    w.mass = mu_ball_mass(M, w.center, w.r);
    w.ratio = w.mass * std::pow(side, d) / std::pow(w.r, t);
    results[k] = w;
  });
  MeasureCheck check;
  check.t = t;
  for (const auto& w : results) {
    const auto idx = static_cast<std::size_t>(w.regime);
    ++check.regime_samples[idx];
    check.regime_max[idx] = std::max(check.regime_max[idx], w.ratio);
    if (w.ratio > check.max_ratio) {
      check.max_ratio = w.ratio;
      check.worst = w;
    }
  }
  return check;
}

}  // namespace beta_targets
