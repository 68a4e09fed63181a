#pragma once

// The dimension formula for shrinking parallelepiped targets under a product of
// beta-transformations. At level n the targets P_n are pushed through
// f^n = diag(beta_i^-n), orthogonalised with pivoting, and the resulting
// |gamma_i| together with the beta_i^-n form the candidate scales A_n. The
// level value s_n minimises a covering exponent over A_n; the dimension is
// limsup s_n, which the engine estimates with a windowed maximum.

#include <algorithm>
#include <bit>
#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "beta_targets/error.hpp"
#include "beta_targets/matrix.hpp"
#include "beta_targets/parallel.hpp"
#include "beta_targets/parallelepiped.hpp"
#include "beta_targets/scaled_real.hpp"

namespace beta_targets {

/// side(n) = base^-(rate * n + offset).
struct ExponentRule {
  double base = 2.0;
  double rate = 1.0;
  double offset = 0.0;

  double log2_at(std::size_t n) const { return -(rate * static_cast<double>(n) + offset) * std::log2(base); }
};

/// Per-level parallelepipeds given explicitly (also what a CSV table loads into).
struct ExplicitFamily {
  std::map<std::size_t, Parallelepiped> by_level;
};

/// Axis-aligned boxes origin + prod [0, side_i(n)].
struct AxisFamily {
  std::vector<ExponentRule> sides;
  std::vector<double> origin;  ///< empty means the zero vector
};

struct RotationRule {
  enum class Kind { constant, arccos_pow2 };
  Kind kind = Kind::constant;
  double theta = 0.0;  ///< used by constant
  double a = 0.0;      ///< used by arccos_pow2: theta_n = arccos 2^(-a n)

  /// (cos theta_n, sin theta_n); for arccos_pow2 the cosine is returned as the exact log2 value -a n.
  std::pair<double, double> cos_sin(std::size_t n) const {
    if (kind == Kind::constant) {
      // std::cos(pi/2) is 6e-17, which would tilt a quarter turn measurably at deep levels.
      if (std::fabs(theta - std::numbers::pi / 2.0) <= 4.0 * std::numeric_limits<double>::epsilon()) return {0.0, 1.0};
      return {std::cos(theta), std::sin(theta)};
    }
    const double c = std::exp2(-a * static_cast<double>(n));
    return {c, std::sqrt((1.0 - c) * (1.0 + c))};
  }
  /// log2 cos theta_n when it is known in closed form.
  std::optional<double> log2_cos(std::size_t n) const {
    if (kind == Kind::arccos_pow2) return -a * static_cast<double>(n);
    return std::nullopt;
  }
};

/// R_{theta_n} H_n + translation with H_n = [0, side_1(n)] x [0, side_2(n)].
struct Rotated2dFamily {
  std::array<ExponentRule, 2> sides{ExponentRule{2.0, 1.0, 0.0}, ExponentRule{4.0, 1.0, 0.0}};
  RotationRule rotation;
  std::array<double, 2> translation{0.5, 0.5};
};

using TargetGenerator = std::variant<ExplicitFamily, AxisFamily, Rotated2dFamily>;

struct TargetSpec {
  BetaSystem system;
  TargetGenerator generator;

  std::size_t dim() const { return system.dim(); }
};

/// Spanning columns of P_n in scalar type T, built without passing through
/// doubles so exponentially small sides survive in ScaledReal.
template <class T>
BasicMatrix<T> target_columns(const TargetSpec& spec, std::size_t n) {
  const std::size_t d = spec.dim();
  return std::visit(
      [&](const auto& g) -> BasicMatrix<T> {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, ExplicitFamily>) {
          const auto it = g.by_level.find(n);
          if (it == g.by_level.end())
            fail(Module::dimension_engine, ErrorCode::domain_error, "no explicit parallelepiped for level " + std::to_string(n));
          if (it->second.dim() != d)
            fail(Module::dimension_engine, ErrorCode::domain_error, "explicit parallelepiped has the wrong dimension");
          return it->second.columns.template cast<T>();
        } else if constexpr (std::is_same_v<G, AxisFamily>) {
          if (g.sides.size() != d) fail(Module::dimension_engine, ErrorCode::domain_error, "axis family needs d side rules");
          BasicMatrix<T> m(d, d, T(0));
          for (std::size_t i = 0; i < d; ++i) m(i, i) = from_log2<T>(g.sides[i].log2_at(n));
          return m;
        } else {
          if (d != 2) fail(Module::dimension_engine, ErrorCode::domain_error, "rotated2d family needs d = 2");
          const T h1 = from_log2<T>(g.sides[0].log2_at(n));
          const T h2 = from_log2<T>(g.sides[1].log2_at(n));
          const auto [c_d, s_d] = g.rotation.cos_sin(n);
          const auto l2c = g.rotation.log2_cos(n);
          const T c = l2c ? from_log2<T>(*l2c) : T(c_d);
          const T s = T(s_d);
          BasicMatrix<T> m(2, 2);
          m(0, 0) = h1 * c;
          m(1, 0) = h1 * s;
          m(0, 1) = -(h2 * s);
          m(1, 1) = h2 * c;
          return m;
        }
      },
      spec.generator);
}

inline std::vector<double> target_origin(const TargetSpec& spec, std::size_t n) {
  const std::size_t d = spec.dim();
  return std::visit(
      [&](const auto& g) -> std::vector<double> {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, ExplicitFamily>) {
          const auto it = g.by_level.find(n);
          if (it == g.by_level.end())
            fail(Module::dimension_engine, ErrorCode::domain_error, "no explicit parallelepiped for level " + std::to_string(n));
          return it->second.origin;
        } else if constexpr (std::is_same_v<G, AxisFamily>) {
          return g.origin.empty() ? std::vector<double>(d, 0.0) : g.origin;
        } else {
          return {g.translation[0], g.translation[1]};
        }
      },
      spec.generator);
}

/// P_n in plain doubles (sides may underflow for deep levels).
inline Parallelepiped target_at(const TargetSpec& spec, std::size_t n) {
  return {target_origin(spec, n), target_columns<double>(spec, n)};
}

/// True when every vertex of P_n lies in [0,1)^d.
inline bool target_in_unit_cube(const TargetSpec& spec, std::size_t n) {
  for (const auto& v : vertices(target_at(spec, n)))
    for (double x : v)
      if (!(x >= 0.0) || !(x < 1.0)) return false;
  return true;
}

enum class ComputeMode { automatic, double_precision, log_domain };

/// Double evaluation is used while every entry of f^n P_n has a binary
/// exponent within kDoubleVolumeBudget / (2d): squared d x d volumes then stay
/// inside double range.
inline constexpr std::int64_t kDoubleVolumeBudget = 1000;
/// P_n counts as degenerate when |det| < this times the product of its column norms.
inline constexpr double kTargetDegeneracy = 1e-12;

struct GammaMagnitudes {
  std::vector<double> log2;  ///< log2 |gamma_i^(n)|, non-increasing
  std::vector<std::size_t> permutation;  ///< pivot order of the columns
  bool log_domain = false;
};

namespace detail {

// Determinant of the rows x cols submatrix by elimination with partial pivoting.
template <class T>
T minor_det(const BasicMatrix<T>& A, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
  using std::abs;
  const std::size_t k = rows.size();
  std::vector<T> m(k * k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) m[i * k + j] = A(rows[i], cols[j]);
  T det(1.0);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < k; ++r)
      if (abs(m[p * k + c]) < abs(m[r * k + c])) p = r;
    if (m[p * k + c] == T(0.0)) return T(0.0);
    if (p != c) {
      for (std::size_t j = 0; j < k; ++j) std::swap(m[p * k + j], m[c * k + j]);
      det = -det;
    }
    det = det * m[c * k + c];
    for (std::size_t r = c + 1; r < k; ++r) {
      const T f = m[r * k + c] / m[c * k + c];
      for (std::size_t j = c + 1; j < k; ++j) m[r * k + j] = m[r * k + j] - f * m[c * k + j];
    }
  }
  return det;
}

// Squared k-volume of the columns `cols` of diag(2^row_log2) A, by Cauchy-Binet:
// the sum over k-row subsets S of (2^{sum_S row_log2} minor_{S,cols}(A))^2.
template <class T>
T scaled_volume_sq(const BasicMatrix<T>& A, const std::vector<double>& row_log2, const std::vector<std::size_t>& cols) {
  const std::size_t d = A.rows(), k = cols.size();
  T total(0.0);
  std::vector<std::size_t> rows;
  for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != k) continue;
    rows.clear();
    double scale = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      if (mask >> i & 1u) {
        rows.push_back(i);
        scale += row_log2[i];
      }
    const T m = from_log2<T>(scale) * minor_det(A, rows, cols);
    total = total + m * m;
  }
  return total;
}

template <class T>
GammaMagnitudes pivoted_gamma_norms(const BasicMatrix<T>& A, const std::vector<double>& row_log2) {
  const std::size_t d = A.cols();
  GammaMagnitudes out;
  std::vector<std::size_t> chosen;
  std::vector<bool> used(d, false);
  double prev_log2 = 0.0;  // log2 of the squared volume of the chosen columns
  for (std::size_t step = 0; step < d; ++step) {
    std::size_t best = d;
    T best_vol(0.0);
    for (std::size_t j = 0; j < d; ++j) {
      if (used[j]) continue;
      auto cols = chosen;
      cols.push_back(j);
      const T v = scaled_volume_sq(A, row_log2, cols);
      if (best == d || best_vol < v) {
        best = j;
        best_vol = v;
      }
    }
    if (!(T(0.0) < best_vol))
      fail(Module::dimension_engine, ErrorCode::domain_error,
           "volume of f^n P_n underflowed at pivot step " + std::to_string(step + 1) + "; use log-domain mode");
    const double vol_log2 = log2_abs(best_vol);
    out.log2.push_back((vol_log2 - prev_log2) / 2.0);
    prev_log2 = vol_log2;
    used[best] = true;
    chosen.push_back(best);
  }
  out.permutation = chosen;
  return out;
}

}  // namespace detail

/// |gamma_1^(n)| >= ... >= |gamma_d^(n)| for the pivoted frame of f^n P_n.
///
/// Classical Gram-Schmidt on f^n P_n loses the small residuals to cancellation
/// once the rows are scaled by very different powers (for a rotated rectangle
/// the relative residual shrinks like 2^-n). The norms are therefore taken from
/// volumes instead: |gamma_1| ... |gamma_k| is the k-volume of the first k
/// pivot columns, and because f^n is diagonal every minor of f^n P_n is a
/// power-of-beta factor times a minor of the unscaled columns. The greedy pivot
/// (largest residual = largest volume gain, ties to the lower index) matches
/// pivoted_orthogonalize on well-conditioned input.
inline GammaMagnitudes gamma_magnitudes(const TargetSpec& spec, std::size_t n, ComputeMode mode = ComputeMode::automatic) {
  if (n == 0) fail(Module::dimension_engine, ErrorCode::domain_error, "level must be positive");
  const std::size_t d = spec.dim();
  if (d > 16) fail(Module::dimension_engine, ErrorCode::resource_limit, "dimension above 16");
  const BasicMatrix<ScaledReal> A = target_columns<ScaledReal>(spec, n);
  std::vector<double> row_log2(d);
  for (std::size_t i = 0; i < d; ++i) row_log2[i] = spec.system.log2_contraction(i, static_cast<double>(n));

  std::vector<std::size_t> all(d);
  for (std::size_t j = 0; j < d; ++j) all[j] = j;
  double hadamard_log2 = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    ScaledReal sq(0.0);
    for (std::size_t i = 0; i < d; ++i) sq = sq + A(i, j) * A(i, j);
    if (sq.is_zero()) fail(Module::dimension_engine, ErrorCode::degenerate_input, "P_" + std::to_string(n) + " has a zero column");
    hadamard_log2 += sq.log2_abs() / 2.0;
  }
  const ScaledReal det = detail::minor_det(A, all, all);
  if (det.is_zero() || det.log2_abs() - hadamard_log2 < std::log2(kTargetDegeneracy))
    fail(Module::dimension_engine, ErrorCode::degenerate_input, "P_" + std::to_string(n) + " is degenerate");

  bool use_log = mode == ComputeMode::log_domain;
  if (mode == ComputeMode::automatic) {
    const auto limit = kDoubleVolumeBudget / static_cast<std::int64_t>(2 * d);
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t i = 0; i < d; ++i) {
        const ScaledReal& x = A(i, j);
        if (x.is_zero()) continue;
        const double e = x.log2_abs() + row_log2[i];
        if (e < -static_cast<double>(limit) || e > static_cast<double>(limit)) use_log = true;
      }
  }
  GammaMagnitudes out;
  if (use_log) {
    out = detail::pivoted_gamma_norms<ScaledReal>(A, row_log2);
  } else {
    BasicMatrix<double> Ad(d, d);
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t i = 0; i < d; ++i) Ad(i, j) = A(i, j).to_double();
    out = detail::pivoted_gamma_norms<double>(Ad, row_log2);
  }
  out.log_domain = use_log;
  return out;
}

/// Inputs of the covering exponent at one level, all as log2 values.
struct LevelScales {
  std::size_t n = 0;
  std::vector<double> contraction_log2;  ///< log2 beta_i^-n
  std::vector<double> gamma_log2;        ///< log2 |gamma_i^(n)|
};

/// sum_{K1} 1 + sum_{not K1} n log beta_i / -log tau + sum_{K2} (1 - log|gamma_i| / log tau),
/// K1 = {i : beta_i^-n <= tau}, K2 = {i : |gamma_i| >= tau}; tau given as log2 tau < 0.
inline double covering_exponent(const LevelScales& scales, double log2_tau) {
  if (!(log2_tau < 0.0))
    fail(Module::dimension_engine, ErrorCode::domain_error, "candidate scale tau must be below 1");
  double value = 0.0;
  for (double c : scales.contraction_log2) value += c <= log2_tau ? 1.0 : c / log2_tau;
  for (double g : scales.gamma_log2)
    if (g >= log2_tau) value += 1.0 - g / log2_tau;
  return value;
}

/// Relative tolerance for merging equal candidates of A_n.
inline constexpr double kCandidateTolerance = 1e-12;
/// Objective values closer than this count as a tie (broken toward smaller tau).
inline constexpr double kObjectiveTieTolerance = 1e-12;

struct LevelData {
  std::size_t n = 0;
  std::vector<double> gamma_log2;
  /// A_n deduplicated, as log2 tau in increasing order (smallest tau first).
  std::vector<double> candidates_log2;
  double s_n = 0.0;
  double argmin_tau_log2 = 0.0;
  bool log_domain = false;
  bool target_in_unit_cube = true;
};

/// A_n as sorted, deduplicated log2 values.
inline std::vector<double> candidate_scales(const LevelScales& scales) {
  std::vector<double> all = scales.contraction_log2;
  all.insert(all.end(), scales.gamma_log2.begin(), scales.gamma_log2.end());
  std::sort(all.begin(), all.end());
  std::vector<double> out;
  for (double v : all) {
    // tau ratio 2^dv - 1 ~ dv ln2
    if (!out.empty() && std::fabs(v - out.back()) * std::numbers::ln2 <= kCandidateTolerance) continue;
    out.push_back(v);
  }
  return out;
}

/// Minimises covering_exponent over A_n.
inline LevelData evaluate_level(const LevelScales& scales) {
  LevelData data;
  data.n = scales.n;
  data.gamma_log2 = scales.gamma_log2;
  data.candidates_log2 = candidate_scales(scales);
  if (data.candidates_log2.back() >= 0.0)
    fail(Module::dimension_engine, ErrorCode::domain_error,
         "level " + std::to_string(scales.n) + " has a candidate scale >= 1; the target is too large");
  data.s_n = std::numeric_limits<double>::infinity();
  for (double L : data.candidates_log2) {
    const double v = covering_exponent(scales, L);
    if (v < data.s_n - kObjectiveTieTolerance) {
      data.s_n = v;
      data.argmin_tau_log2 = L;
    }
  }
  return data;
}

inline LevelScales level_scales(const TargetSpec& spec, std::size_t n, const GammaMagnitudes& gammas) {
  LevelScales scales;
  scales.n = n;
  for (std::size_t i = 0; i < spec.dim(); ++i) scales.contraction_log2.push_back(spec.system.log2_contraction(i, static_cast<double>(n)));
  scales.gamma_log2 = gammas.log2;
  return scales;
}

/// s_n with its minimising scale.
inline LevelData s_n(const TargetSpec& spec, std::size_t n, ComputeMode mode = ComputeMode::automatic) {
  const GammaMagnitudes g = gamma_magnitudes(spec, n, mode);
  LevelData data = evaluate_level(level_scales(spec, n, g));
  data.log_domain = g.log_domain;
  data.target_in_unit_cube = target_in_unit_cube(spec, n);
  return data;
}

struct DimensionReport {
  std::vector<LevelData> levels;
  double s_star = 0.0;
  bool converged = false;
  std::size_t window = 0;
  double tolerance = 0.0;
  double window_min = 0.0;
  double window_max = 0.0;
  /// Levels whose target was not inside [0,1)^d.
  std::vector<std::size_t> containment_warnings;
  /// The limit set also lies in the large intersection class of exponent s_star;
  /// stated as a consequence of the dimension theorem, not computed.
  static constexpr const char* kLargeIntersectionNote =
      "W(P) belongs to the large intersection class G^{s*}([0,1]^d) (theorem-level statement, not computed)";
};

inline constexpr std::size_t kDefaultWindow = 20;
inline constexpr double kDefaultConvergenceTolerance = 1e-3;

/// s_n for n in [n_min, n_max]; s_star is the maximum over the last `window`
/// levels, and converged means that window's spread is below `tolerance`.
/// This is an estimate of the limsup, never an extrapolation.
inline DimensionReport s_star(const TargetSpec& spec, std::size_t n_min, std::size_t n_max, std::size_t window = kDefaultWindow,
                              double tolerance = kDefaultConvergenceTolerance, ComputeMode mode = ComputeMode::automatic,
                              unsigned threads = 1) {
  if (n_min < 1 || n_min > n_max) fail(Module::dimension_engine, ErrorCode::domain_error, "need 1 <= n_min <= n_max");
  if (window < 1 || window > n_max - n_min + 1)
    fail(Module::dimension_engine, ErrorCode::domain_error, "window must lie in [1, n_max - n_min + 1]");
  DimensionReport report;
  report.window = window;
  report.tolerance = tolerance;
  report.levels.resize(n_max - n_min + 1);
  parallel_for(report.levels.size(), threads, [&](std::size_t i) { report.levels[i] = s_n(spec, n_min + i, mode); });
  report.window_max = -std::numeric_limits<double>::infinity();
  report.window_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = report.levels.size() - window; i < report.levels.size(); ++i) {
    report.window_max = std::max(report.window_max, report.levels[i].s_n);
    report.window_min = std::min(report.window_min, report.levels[i].s_n);
  }
  report.s_star = report.window_max;
  report.converged = report.window_max - report.window_min < tolerance;
  for (const auto& lv : report.levels)
    if (!lv.target_in_unit_cube) report.containment_warnings.push_back(lv.n);
  return report;
}

/// Closed-form dimensions of the two rotated-rectangle examples with beta = (2, 4):
/// which = 1: constant angle theta in [0, pi/2]; 5/4 unless theta = pi/2, where it is 1.
/// which = 2: theta_n = arccos 2^(-a n), a >= 0; 1 + (1-a)/(4-a) for a <= 1, else 1.
/// Used as a test oracle.
inline double closed_form_example(int which, double param) {
  if (which == 1) {
    constexpr double half_pi = std::numbers::pi / 2.0;
    if (!(param >= 0.0) || param > half_pi + 1e-12)
      fail(Module::dimension_engine, ErrorCode::domain_error, "theta must lie in [0, pi/2]");
    return std::fabs(param - half_pi) <= 1e-12 ? 1.0 : 1.25;
  }
  if (which == 2) {
    if (!(param >= 0.0) || !std::isfinite(param)) fail(Module::dimension_engine, ErrorCode::domain_error, "a must be >= 0");
    return param <= 1.0 ? 1.0 + (1.0 - param) / (4.0 - param) : 1.0;
  }
  fail(Module::dimension_engine, ErrorCode::domain_error, "example must be 1 or 2");
}

/// The rotated-rectangle family with beta = (2, 4), H_n = [0, 2^-n] x [0, 4^-n], translated by (1/2, 1/2).
inline TargetSpec rotated_example_spec(RotationRule rotation) {
  Rotated2dFamily fam;
  fam.rotation = rotation;
  return TargetSpec{BetaSystem({2.0, 4.0}), fam};
}

/// Reads a per-level table: each non-comment row is n, origin_1..origin_d, then
/// the d*d column entries column by column (alpha_1 first). A header row whose
/// first field is not numeric is skipped, as are blank lines and '#' comments.
inline ExplicitFamily load_target_table(std::istream& in, std::size_t d) {
  ExplicitFamily fam;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        fields.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (fam.by_level.empty()) continue;  // header
      fail(Module::dimension_engine, ErrorCode::schema_error, "non-numeric field on table line " + std::to_string(line_no));
    }
    if (fields.size() != 1 + d + d * d)
      fail(Module::dimension_engine, ErrorCode::schema_error,
           "table line " + std::to_string(line_no) + " needs " + std::to_string(1 + d + d * d) + " fields");
    if (!(fields[0] >= 1.0) || fields[0] != std::floor(fields[0]))
      fail(Module::dimension_engine, ErrorCode::schema_error, "table line " + std::to_string(line_no) + " has a bad level");
    Parallelepiped P{std::vector<double>(fields.begin() + 1, fields.begin() + 1 + static_cast<std::ptrdiff_t>(d)), Matrix(d, d)};
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t i = 0; i < d; ++i) P.columns(i, j) = fields[1 + d + j * d + i];
    fam.by_level[static_cast<std::size_t>(fields[0])] = std::move(P);
  }
  return fam;
}

}  // namespace beta_targets
