#pragma once

// Greedy beta-expansions of a single beta-transformation: digits, cylinder
// enumeration, fullness, and the counting bounds for admissible and full words.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "beta_targets/error.hpp"

namespace beta_targets {

/// A base beta > 1.
class BetaParam {
 public:
  explicit BetaParam(double beta) : value_(beta) {
    if (!(beta > 1.0) || !std::isfinite(beta))
      fail(Module::beta_dynamics, ErrorCode::domain_error, "beta must be a finite real > 1, got " + std::to_string(beta));
  }
  double value() const { return value_; }
  operator double() const { return value_; }  // NOLINT(google-explicit-constructor)

  bool is_integer() const { return value_ == std::floor(value_); }
  /// Largest digit that can occur, ceil(beta - 1).
  int max_digit() const { return static_cast<int>(std::ceil(value_ - 1.0)); }

 private:
  double value_;
};

/// A finite digit string.
struct Word {
  std::vector<int> digits;

  std::size_t level() const { return digits.size(); }

  /// Digits concatenated; digits above 9 are written in brackets, e.g. "0[10]1".
  std::string to_string() const {
    std::string out;
    for (int d : digits) {
      if (d >= 0 && d <= 9) {
        out.push_back(static_cast<char>('0' + d));
      } else {
        out += "[" + std::to_string(d) + "]";
      }
    }
    return out;
  }

  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word&, const Word&) = default;
};

/// Half-open interval [lo, hi).
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double length() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x < hi; }
};

/// Nodes closer to full length than this (relative) are treated as full and
/// snapped to t = 1 so rounding does not accumulate down a full branch.
inline constexpr double kFullTolerance = 1e-9;
/// A child whose normalised image length falls at or below this does not exist.
inline constexpr double kVanishTolerance = 1e-9;
inline constexpr std::uint64_t kDefaultNodeCap = 100'000'000;

template <class Real = double>
struct CylinderNode {
  Word word;
  Real left{};
  /// Normalised image length t in (0, 1]: |T^n(cylinder)|, so the interval has length t * beta^-n.
  Real image_length{};
  Real length{};
  std::size_t level = 0;
  bool full = false;

  Real right() const { return left + length; }
};

struct EnumerationOptions {
  bool full_only = false;
  /// Keep only nodes whose interval lies inside this one; subtrees disjoint from it are pruned.
  std::optional<Interval> within;
  std::uint64_t node_cap = kDefaultNodeCap;
};

/// T_beta x = beta x - floor(beta x).
template <class Real = double>
Real transform(const BetaParam& beta, Real x) {
  if (!(x >= Real(0)) || !(x < Real(1)))
    fail(Module::beta_dynamics, ErrorCode::domain_error, "x must lie in [0,1)");
  const Real bx = static_cast<Real>(beta.value()) * x;
  return bx - std::floor(bx);
}

/// First n digits of the greedy beta-expansion of x.
template <class Real = double>
Word digits(const BetaParam& beta, Real x, std::size_t n) {
  if (!(x >= Real(0)) || !(x < Real(1)))
    fail(Module::beta_dynamics, ErrorCode::domain_error, "x must lie in [0,1)");
  if (n == 0) fail(Module::beta_dynamics, ErrorCode::domain_error, "digit count must be positive");
  Word w;
  w.digits.reserve(n);
  const Real b = static_cast<Real>(beta.value());
  for (std::size_t k = 0; k < n; ++k) {
    const Real bx = b * x;
    const Real f = std::floor(bx);
    w.digits.push_back(static_cast<int>(f));
    x = bx - f;
  }
  return w;
}

/// sum_k digit_k beta^-k, the left endpoint of the word's cylinder.
template <class Real = double>
Real word_value(const BetaParam& beta, const Word& w) {
  Real acc{};
  Real scale = Real(1);
  const Real b = static_cast<Real>(beta.value());
  for (int d : w.digits) {
    scale /= b;
    acc += static_cast<Real>(d) * scale;
  }
  return acc;
}

/// ceil(beta)^n, the worst-case node count at level n (saturating at +inf).
inline double projected_node_count(const BetaParam& beta, std::size_t n) {
  return std::pow(std::ceil(beta.value()), static_cast<double>(n));
}

namespace detail {

template <class Real, class Visitor>
class CylinderWalker {
 public:
  CylinderWalker(const BetaParam& beta, std::size_t n, const EnumerationOptions& opts, Visitor& visit)
      : beta_(static_cast<Real>(beta.value())), n_(n), opts_(opts), visit_(visit), powers_(n + 1) {
    for (std::size_t k = 0; k <= n; ++k) powers_[k] = std::pow(beta_, -static_cast<Real>(k));
    word_.digits.reserve(n);
  }

  void run() { descend(Real(0), Real(1)); }
  std::uint64_t visited() const { return visited_; }

 private:
  // Returns false when the visitor asked to stop.
  bool descend(Real left, Real t) {
    const std::size_t level = word_.digits.size();
    if (++visited_ > opts_.node_cap)
      fail(Module::beta_dynamics, ErrorCode::resource_limit,
           "cylinder enumeration visited more than " + std::to_string(opts_.node_cap) + " nodes");
    const Real length = t * powers_[level];
    if (opts_.within) {
      const auto& I = *opts_.within;
      if (left >= static_cast<Real>(I.hi) || left + length <= static_cast<Real>(I.lo)) return true;
    }
    if (level == n_) {
      CylinderNode<Real> node{word_, left, t, length, level, t >= Real(1)};
      if (opts_.full_only && !node.full) return true;
      if (opts_.within) {
        const auto& I = *opts_.within;
        if (left < static_cast<Real>(I.lo) || node.right() > static_cast<Real>(I.hi)) return true;
      }
      if constexpr (std::is_same_v<std::invoke_result_t<Visitor&, const CylinderNode<Real>&>, bool>) {
        return visit_(node);
      } else {
        visit_(node);
        return true;
      }
    }
    // Child k exists iff k / beta < t; its image is [0, min(beta t - k, 1)).
    const Real bt = beta_ * t;
    for (int k = 0;; ++k) {
      Real child_t = bt - static_cast<Real>(k);
      if (child_t <= static_cast<Real>(kVanishTolerance)) break;
      if (child_t >= Real(1) - static_cast<Real>(kFullTolerance)) child_t = Real(1);
      word_.digits.push_back(k);
      const bool go_on = descend(left + static_cast<Real>(k) * powers_[level + 1], child_t);
      word_.digits.pop_back();
      if (!go_on) return false;
    }
    return true;
  }

  Real beta_;
  std::size_t n_;
  const EnumerationOptions& opts_;
  Visitor& visit_;
  std::vector<Real> powers_;
  Word word_;
  std::uint64_t visited_ = 0;
};

}  // namespace detail

/// Visits every admissible level-n word in lexicographic order, with exact left
/// endpoint and image length from the recursion t -> min(beta t - k, 1).
/// The visitor may return bool; false stops the walk.
template <class Real = double, class Visitor>
void for_each_cylinder(const BetaParam& beta, std::size_t n, Visitor&& visit, const EnumerationOptions& opts = {}) {
  if (n == 0) fail(Module::beta_dynamics, ErrorCode::domain_error, "level must be positive");
  if (!opts.within && projected_node_count(beta, n) > static_cast<double>(opts.node_cap))
    fail(Module::beta_dynamics, ErrorCode::resource_limit,
         "ceil(beta)^n = " + std::to_string(projected_node_count(beta, n)) + " exceeds the node cap " +
             std::to_string(opts.node_cap));
  if (opts.within && !(opts.within->length() > 0.0))
    fail(Module::beta_dynamics, ErrorCode::domain_error, "restricting interval must have positive length");
  detail::CylinderWalker<Real, std::remove_reference_t<Visitor>> walker(beta, n, opts, visit);
  walker.run();
}

template <class Real = double>
std::vector<CylinderNode<Real>> enumerate_cylinders(const BetaParam& beta, std::size_t n,
                                                    const EnumerationOptions& opts = {}) {
  std::vector<CylinderNode<Real>> out;
  for_each_cylinder<Real>(beta, n, [&](const CylinderNode<Real>& node) { out.push_back(node); }, opts);
  return out;
}

/// The level-n cylinder containing x, located by descending along digits(beta, x, n).
template <class Real = double>
CylinderNode<Real> cylinder_of(const BetaParam& beta, Real x, std::size_t n) {
  const Word w = digits<Real>(beta, x, n);
  const Real b = static_cast<Real>(beta.value());
  Real t = Real(1), left = Real(0), scale = Real(1);
  for (int d : w.digits) {
    scale /= b;
    left += static_cast<Real>(d) * scale;
    t = b * t - static_cast<Real>(d);
    if (t >= Real(1) - static_cast<Real>(kFullTolerance)) t = Real(1);
  }
  return CylinderNode<Real>{w, left, t, t * scale, n, t >= Real(1)};
}

/// Constant c_beta with #(full level-n words) >= c_beta beta^n:
/// 1 for integer beta, (beta-2)/(beta-1) above 2, and prod_{i>=1} (1 - beta^-i) below 2.
/// The product stops once a factor exceeds 1 - 1e-12.
inline double full_count_constant(const BetaParam& beta) {
  const double b = beta.value();
  if (beta.is_integer()) return 1.0;
  if (b > 2.0) return (b - 2.0) / (b - 1.0);
  double prod = 1.0;
  double p = 1.0;
  for (int i = 1; i < 100000; ++i) {
    p /= b;
    const double factor = 1.0 - p;
    if (factor > 1.0 - 1e-12) break;
    prod *= factor;
  }
  return prod;
}

/// Renyi's bounds: beta^n <= #admissible <= beta^(n+1) / (beta - 1).
inline bool renyi_bounds_hold(const BetaParam& beta, std::size_t n, std::uint64_t count) {
  const double b = beta.value();
  const double c = static_cast<double>(count);
  const double lo = std::pow(b, static_cast<double>(n));
  const double hi = std::pow(b, static_cast<double>(n) + 1.0) / (b - 1.0);
  return c >= lo * (1.0 - 1e-12) && c <= hi * (1.0 + 1e-12);
}

/// The full-word lower bound appropriate to beta's range (equality for integers).
inline bool full_count_bound_holds(const BetaParam& beta, std::size_t n, std::uint64_t count) {
  const double bn = std::pow(beta.value(), static_cast<double>(n));
  if (beta.is_integer()) return static_cast<double>(count) == std::round(bn);
  return static_cast<double>(count) > full_count_constant(beta) * bn;
}

template <class Real = double>
std::uint64_t count_admissible(const BetaParam& beta, std::size_t n, std::uint64_t node_cap = kDefaultNodeCap) {
  std::uint64_t count = 0;
  EnumerationOptions opts;
  opts.node_cap = node_cap;
  for_each_cylinder<Real>(beta, n, [&](const CylinderNode<Real>&) { ++count; }, opts);
  if (!renyi_bounds_hold(beta, n, count))
    fail(Module::beta_dynamics, ErrorCode::internal_consistency,
         "admissible count " + std::to_string(count) + " violates Renyi's bounds at level " + std::to_string(n));
  return count;
}

template <class Real = double>
std::uint64_t count_full(const BetaParam& beta, std::size_t n, std::uint64_t node_cap = kDefaultNodeCap) {
  std::uint64_t count = 0;
  EnumerationOptions opts;
  opts.node_cap = node_cap;
  opts.full_only = true;
  for_each_cylinder<Real>(beta, n, [&](const CylinderNode<Real>&) { ++count; }, opts);
  if (!full_count_bound_holds(beta, n, count))
    fail(Module::beta_dynamics, ErrorCode::internal_consistency,
         "full count " + std::to_string(count) + " violates the full-word lower bound at level " + std::to_string(n));
  return count;
}

/// delta and n0 for the full-cylinder existence search; (beta n0)^(1+delta) < beta^(n0 delta) must hold.
struct FullSearchParams {
  double delta = 1.0;
  int n0 = 3;

  bool valid_for(const BetaParam& beta) const {
    if (!(delta > 0.0) || n0 < 3) return false;
    const double lb = std::log(beta.value());
    return (1.0 + delta) * std::log(beta.value() * n0) < n0 * delta * lb;
  }
  /// n0 beta^-n0, the largest interval length the search accepts.
  double max_interval_length(const BetaParam& beta) const {
    return n0 * std::pow(beta.value(), -static_cast<double>(n0));
  }
};

/// Smallest n0 >= 3 making (delta, n0) valid for beta.
inline int smallest_valid_n0(const BetaParam& beta, double delta) {
  if (!(delta > 0.0)) fail(Module::beta_dynamics, ErrorCode::domain_error, "delta must be positive");
  for (int n0 = 3; n0 < 1'000'000; ++n0) {
    if (FullSearchParams{delta, n0}.valid_for(beta)) return n0;
  }
  fail(Module::beta_dynamics, ErrorCode::domain_error, "no valid n0 below 10^6 for this beta and delta");
}

namespace detail {
inline void check_unit_subinterval(const Interval& I) {
  if (!(I.lo >= 0.0) || !(I.hi <= 1.0) || !(I.length() > 0.0))
    fail(Module::beta_dynamics, ErrorCode::domain_error, "interval must satisfy 0 <= lo < hi <= 1");
}
}  // namespace detail

/// First full cylinder inside I (smallest level, then leftmost) among levels
/// [min_level, max_level], or nothing.
template <class Real = double>
std::optional<CylinderNode<Real>> search_full_in_interval(const BetaParam& beta, const Interval& I, std::size_t min_level,
                                                          std::size_t max_level, std::uint64_t node_cap = kDefaultNodeCap) {
  detail::check_unit_subinterval(I);
  EnumerationOptions opts;
  opts.full_only = true;
  opts.within = I;
  opts.node_cap = node_cap;
  for (std::size_t m = std::max<std::size_t>(min_level, 1); m <= max_level; ++m) {
    std::optional<CylinderNode<Real>> found;
    for_each_cylinder<Real>(
        beta, m,
        [&](const CylinderNode<Real>& node) {
          found = node;
          return false;
        },
        opts);
    if (found) return found;
  }
  return std::nullopt;
}

/// A full cylinder inside I whose length beta^-m satisfies |I|^(1+delta) < beta^-m < |I|.
///
/// Requires 0 < |I| < n0 beta^-n0 and valid params; levels are scanned upward
/// across the whole admissible length window. Exhausting the window without a
/// hit is reported as an internal-consistency error, never silently widened.
template <class Real = double>
CylinderNode<Real> find_full_in_interval(const BetaParam& beta, const Interval& I, const FullSearchParams& params,
                                         std::uint64_t node_cap = kDefaultNodeCap) {
  detail::check_unit_subinterval(I);
  if (!params.valid_for(beta))
    fail(Module::beta_dynamics, ErrorCode::precondition_failed,
         "(beta n0)^(1+delta) < beta^(n0 delta) fails for delta=" + std::to_string(params.delta) +
             ", n0=" + std::to_string(params.n0));
  const double len = I.length();
  if (!(len < params.max_interval_length(beta)))
    fail(Module::beta_dynamics, ErrorCode::precondition_failed, "interval length must be below n0 beta^-n0");
  const double lb = std::log(beta.value());
  const double logI = std::log(len);
  // beta^-m < |I|  <=>  m > -log|I| / log beta ; |I|^(1+delta) < beta^-m  <=>  m < -(1+delta) log|I| / log beta
  for (auto m = static_cast<std::size_t>(std::floor(-logI / lb)) + 1;; ++m) {
    const double lm = -static_cast<double>(m) * lb;
    if (!((1.0 + params.delta) * logI < lm)) break;
    if (!(lm < logI)) continue;
    if (auto node = search_full_in_interval<Real>(beta, I, m, m, node_cap)) return *node;
  }
  fail(Module::beta_dynamics, ErrorCode::internal_consistency,
       "no full cylinder found inside [" + std::to_string(I.lo) + ", " + std::to_string(I.hi) +
           ") within the admissible level window");
}

/// c_beta |I|^(1+delta) beta^n, the guaranteed minimum number of full level-n words inside I.
inline double full_in_interval_lower_bound(const BetaParam& beta, const Interval& I, std::size_t n, double delta) {
  return full_count_constant(beta) * std::pow(I.length(), 1.0 + delta) * std::pow(beta.value(), static_cast<double>(n));
}

/// Exact number of full level-n words whose cylinder lies inside I.
///
/// Requires n >= -(1+delta) log_beta |I|. When I is also short enough for the
/// existence search (|I| < n0 beta^-n0 for the smallest valid n0), the count
/// is checked against full_in_interval_lower_bound.
template <class Real = double>
std::uint64_t count_full_in_interval(const BetaParam& beta, const Interval& I, std::size_t n, double delta,
                                     std::uint64_t node_cap = kDefaultNodeCap) {
  detail::check_unit_subinterval(I);
  if (!(delta > 0.0)) fail(Module::beta_dynamics, ErrorCode::domain_error, "delta must be positive");
  const double need = -(1.0 + delta) * std::log(I.length()) / std::log(beta.value());
  if (static_cast<double>(n) < need - 1e-12)
    fail(Module::beta_dynamics, ErrorCode::domain_error,
         "level " + std::to_string(n) + " is below -(1+delta) log_beta |I| = " + std::to_string(need));
  EnumerationOptions opts;
  opts.full_only = true;
  opts.within = I;
  opts.node_cap = node_cap;
  std::uint64_t count = 0;
  for_each_cylinder<Real>(beta, n, [&](const CylinderNode<Real>&) { ++count; }, opts);
  const FullSearchParams params{delta, smallest_valid_n0(beta, delta)};
  if (I.length() < params.max_interval_length(beta)) {
    const double bound = full_in_interval_lower_bound(beta, I, n, delta);
    if (static_cast<double>(count) < bound)
      fail(Module::beta_dynamics, ErrorCode::internal_consistency,
           "full count in interval " + std::to_string(count) + " is below c_beta |I|^(1+delta) beta^n = " +
               std::to_string(bound));
  }
  return count;
}

}  // namespace beta_targets
