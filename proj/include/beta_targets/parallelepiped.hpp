#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "beta_targets/error.hpp"
#include "beta_targets/matrix.hpp"
#include "beta_targets/scaled_real.hpp"

namespace beta_targets {

/// (beta_1, ..., beta_d), the bases of the product map; f = diag(beta_i^-1).
class BetaSystem {
 public:
  explicit BetaSystem(std::vector<double> betas) : betas_(std::move(betas)) {
    if (betas_.empty()) fail(Module::parallelepiped_geometry, ErrorCode::domain_error, "a beta system needs d >= 1");
    for (double b : betas_)
      if (!(b > 1.0) || !std::isfinite(b))
        fail(Module::parallelepiped_geometry, ErrorCode::domain_error, "every beta must be a finite real > 1");
  }
  std::size_t dim() const { return betas_.size(); }
  double beta(std::size_t i) const { return betas_[i]; }
  const std::vector<double>& betas() const { return betas_; }
  /// log2 of beta_i^-n.
  double log2_contraction(std::size_t i, double n) const { return -n * std::log2(betas_[i]); }

 private:
  std::vector<double> betas_;
};

/// origin + { sum_j x_j columns_j : x in [0,1]^d }.
struct Parallelepiped {
  std::vector<double> origin;
  Matrix columns;

  std::size_t dim() const { return origin.size(); }

  void validate() const {
    if (origin.empty() || columns.rows() != origin.size() || columns.cols() != origin.size())
      fail(Module::parallelepiped_geometry, ErrorCode::domain_error, "parallelepiped needs d columns of length d");
  }

  static Parallelepiped unit_cube(std::size_t d) { return {std::vector<double>(d, 0.0), Matrix::identity(d)}; }
};

/// Result of Gram-Schmidt in pivot order: columns_{perm[k]} = sum_j gammas_j U(j,k).
template <class T>
struct BasicOrthoFrame {
  /// perm[k] is the 0-based index of the input column processed at step k.
  std::vector<std::size_t> permutation;
  BasicMatrix<T> gammas;
  /// Upper triangular with unit diagonal.
  BasicMatrix<T> U;
  /// |gamma_k|, non-increasing.
  std::vector<T> norms;

  std::size_t dim() const { return permutation.size(); }
};

using OrthoFrame = BasicOrthoFrame<double>;

/// Degenerate when a selected residual falls below this fraction of its column's norm.
inline constexpr double kDegeneracyRatio = 1e-12;

/// Gram-Schmidt with column pivoting.
///
/// Step 1 takes the longest column; step k takes the column whose residual
/// against gamma_1..gamma_{k-1} is longest, ties going to the smallest index.
/// Coefficients are projections of the original column (classical form); for
/// d > 4 each gamma gets one re-orthogonalisation pass folded into U.
/// T may be double, long double or ScaledReal.
template <class T>
BasicOrthoFrame<T> pivoted_orthogonalize(const BasicMatrix<T>& columns) {
  using std::sqrt;
  const std::size_t d = columns.cols();
  if (d == 0 || columns.rows() != d)
    fail(Module::parallelepiped_geometry, ErrorCode::domain_error, "orthogonalisation needs a square matrix");

  BasicOrthoFrame<T> frame;
  frame.gammas = BasicMatrix<T>(d, d, T(0));
  frame.U = BasicMatrix<T>(d, d, T(0));
  frame.norms.assign(d, T(0));
  std::vector<T> sq(d, T(0));  // (gamma_j, gamma_j)
  std::vector<bool> used(d, false);
  std::vector<T> column_norm(d);
  for (std::size_t l = 0; l < d; ++l) column_norm[l] = norm<T>(columns.col(l));

  // residual[l] = columns_l - sum_{j<k} (columns_l, gamma_j)/(gamma_j, gamma_j) gamma_j
  BasicMatrix<T> residual = columns;
  BasicMatrix<T> coeff(d, d, T(0));  // coeff(j, l): projection coefficient of column l on gamma_j

  for (std::size_t k = 0; k < d; ++k) {
    std::size_t pick = d;
    T best(0);
    for (std::size_t l = 0; l < d; ++l) {
      if (used[l]) continue;
      const T r = norm<T>(residual.col(l));
      if (pick == d || r > best) {
        pick = l;
        best = r;
      }
    }
    if (!(best > T(0)) || !(best >= column_norm[pick] * T(kDegeneracyRatio)))
      fail(Module::parallelepiped_geometry, ErrorCode::degenerate_input,
           "columns are linearly dependent (residual collapsed at step " + std::to_string(k + 1) + ")");
    used[pick] = true;
    frame.permutation.push_back(pick);

    auto g = frame.gammas.col(k);
    const auto r = residual.col(pick);
    std::copy(r.begin(), r.end(), g.begin());
    for (std::size_t j = 0; j < k; ++j) frame.U(j, k) = coeff(j, pick);
    frame.U(k, k) = T(1);

    if (d > 4) {
      for (std::size_t j = 0; j < k; ++j) {
        const T c = dot<T>(std::span<const T>(g.data(), d), frame.gammas.col(j)) / sq[j];
        for (std::size_t i = 0; i < d; ++i) g[i] -= c * frame.gammas(i, j);
        frame.U(j, k) += c;
      }
    }
    sq[k] = dot<T>(std::span<const T>(g.data(), d), std::span<const T>(g.data(), d));
    frame.norms[k] = sqrt(sq[k]);

    // Advance the remaining residuals by the new direction, projecting the original column.
    for (std::size_t l = 0; l < d; ++l) {
      if (used[l]) continue;
      const T c = dot<T>(columns.col(l), frame.gammas.col(k)) / sq[k];
      coeff(k, l) = c;
      auto rl = residual.col(l);
      for (std::size_t i = 0; i < d; ++i) rl[i] -= c * frame.gammas(i, k);
    }
  }
  return frame;
}

inline OrthoFrame pivoted_orthogonalize(const Parallelepiped& P) {
  P.validate();
  return pivoted_orthogonalize<double>(P.columns);
}

/// A box with arbitrary orthonormal axes: center + sum_i y_i axes_i, |y_i| <= half_extents_i.
struct Hyperrectangle {
  std::vector<double> center;
  Matrix axes;
  std::vector<double> half_extents;

  double volume() const {
    double v = 1.0;
    for (double h : half_extents) v *= 2.0 * h;
    return v;
  }

  /// Membership with relative slack tol on each half-extent.
  bool contains(std::span<const double> x, double tol = 1e-9) const {
    const std::size_t d = center.size();
    std::vector<double> rel(d);
    for (std::size_t i = 0; i < d; ++i) rel[i] = x[i] - center[i];
    for (std::size_t a = 0; a < d; ++a) {
      const double y = dot<double>(rel, axes.col(a));
      if (std::fabs(y) > half_extents[a] * (1.0 + tol)) return false;
    }
    return true;
  }
};

/// { origin + sum_i x_i gamma_i : x in [-2^d, 2^d]^d }, which contains the source parallelepiped.
inline Hyperrectangle bounding_hyperrectangle(const OrthoFrame& frame, const std::vector<double>& origin) {
  const std::size_t d = frame.dim();
  Hyperrectangle R{origin, Matrix(d, d), std::vector<double>(d)};
  const double scale = std::ldexp(1.0, static_cast<int>(d));
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < d; ++i) R.axes(i, k) = frame.gammas(i, k) / frame.norms[k];
    R.half_extents[k] = scale * frame.norms[k];
  }
  return R;
}

/// All 2^d vertices origin + sum_{j in S} columns_j.
inline std::vector<std::vector<double>> vertices(const Parallelepiped& P) {
  const std::size_t d = P.dim();
  std::vector<std::vector<double>> out;
  out.reserve(std::size_t{1} << d);
  for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
    std::vector<double> v = P.origin;
    for (std::size_t j = 0; j < d; ++j)
      if (mask & (std::size_t{1} << j))
        for (std::size_t i = 0; i < d; ++i) v[i] += P.columns(i, j);
    out.push_back(std::move(v));
  }
  return out;
}

/// det of the column matrix by LU with partial pivoting.
inline double determinant(const Matrix& m) {
  const Eigen::Map<const Eigen::MatrixXd> view(m.data().data(), static_cast<Eigen::Index>(m.rows()),
                                               static_cast<Eigen::Index>(m.cols()));
  return view.partialPivLu().determinant();
}

inline constexpr double kVolumeTolerance = 1e-9;

/// |det(columns)|, cross-checked against prod |gamma_k| and 2^{-d(d+1)} vol(R).
inline double volume(const Parallelepiped& P) {
  P.validate();
  const double det = std::fabs(determinant(P.columns));
  const OrthoFrame frame = pivoted_orthogonalize(P);
  double gamma_product = 1.0;
  for (double g : frame.norms) gamma_product *= g;
  const std::size_t d = P.dim();
  const double box = bounding_hyperrectangle(frame, P.origin).volume() * std::ldexp(1.0, -static_cast<int>(d * (d + 1)));
  auto close = [](double a, double b) { return std::fabs(a - b) <= kVolumeTolerance * std::max(std::fabs(a), std::fabs(b)); };
  if (!close(det, gamma_product) || !close(det, box))
    fail(Module::parallelepiped_geometry, ErrorCode::internal_consistency,
         "volume identity failed: |det| = " + std::to_string(det) + ", prod|gamma| = " + std::to_string(gamma_product));
  return det;
}

/// Outcome of checking a frame against its parallelepiped.
struct FrameCheck {
  bool orthogonal = true;
  bool sorted = true;
  bool coefficients_bounded = true;  ///< every |U_ij| <= 2
  bool reconstructs = true;
  bool vertices_contained = true;
  bool volume_identity = true;
  double max_abs_coefficient = 0.0;

  bool all() const {
    return orthogonal && sorted && coefficients_bounded && reconstructs && vertices_contained && volume_identity;
  }
};

inline FrameCheck check_frame(const Parallelepiped& P, const OrthoFrame& frame, double tol = 1e-9) {
  FrameCheck c;
  const std::size_t d = P.dim();
  double scale = 0.0;
  for (std::size_t j = 0; j < d; ++j) scale = std::max(scale, norm<double>(P.columns.col(j)));
  for (std::size_t a = 0; a < d; ++a) {
    if (a > 0 && frame.norms[a] > frame.norms[a - 1]) c.sorted = false;
    for (std::size_t b = a + 1; b < d; ++b) {
      const double ip = dot<double>(frame.gammas.col(a), frame.gammas.col(b));
      if (std::fabs(ip) > tol * frame.norms[a] * frame.norms[b]) c.orthogonal = false;
    }
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) c.max_abs_coefficient = std::max(c.max_abs_coefficient, std::fabs(frame.U(i, j)));
  c.coefficients_bounded = c.max_abs_coefficient <= 2.0 + tol;
  const Matrix rebuilt = frame.gammas * frame.U;
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t i = 0; i < d; ++i)
      if (std::fabs(rebuilt(i, k) - P.columns(i, frame.permutation[k])) > tol * scale) c.reconstructs = false;
  const Hyperrectangle R = bounding_hyperrectangle(frame, P.origin);
  for (const auto& v : vertices(P))
    if (!R.contains(v, tol)) c.vertices_contained = false;
  const double det = std::fabs(determinant(P.columns));
  double gp = 1.0;
  for (double g : frame.norms) gp *= g;
  const double box = R.volume() * std::ldexp(1.0, -static_cast<int>(d * (d + 1)));
  c.volume_identity = std::fabs(det - gp) <= tol * std::max(det, gp) && std::fabs(det - box) <= tol * std::max(det, box);
  return c;
}

/// Applies f^n row-wise to a column matrix in any scalar type: row i is scaled by beta_i^-n.
template <class T>
BasicMatrix<T> scale_columns_by_f(const BetaSystem& sys, const BasicMatrix<T>& columns, double n) {
  BasicMatrix<T> out = columns;
  for (std::size_t i = 0; i < sys.dim(); ++i) {
    const T factor = from_log2<T>(sys.log2_contraction(i, n));
    for (std::size_t j = 0; j < columns.cols(); ++j) out(i, j) = out(i, j) * factor;
  }
  return out;
}

/// f^n P: every column and the origin scaled coordinate-wise by beta_i^-n.
inline Parallelepiped scale_by_f(const BetaSystem& sys, const Parallelepiped& P, std::size_t n) {
  P.validate();
  if (sys.dim() != P.dim())
    fail(Module::parallelepiped_geometry, ErrorCode::domain_error, "beta system and parallelepiped differ in dimension");
  for (std::size_t i = 0; i < sys.dim(); ++i) {
    const double l2 = sys.log2_contraction(i, static_cast<double>(n));
    if (l2 < std::log2(std::numeric_limits<double>::min()) + 64.0)
      fail(Module::parallelepiped_geometry, ErrorCode::domain_error,
           "beta_" + std::to_string(i + 1) + "^-n leaves double range; use the log-domain engine");
  }
  Parallelepiped out = P;
  out.columns = scale_columns_by_f<double>(sys, P.columns, static_cast<double>(n));
  for (std::size_t i = 0; i < sys.dim(); ++i) out.origin[i] *= std::pow(sys.beta(i), -static_cast<double>(n));
  return out;
}

/// Counter-clockwise rotation by theta.
inline Matrix rotation2d(double theta) {
  Matrix r(2, 2);
  r(0, 0) = std::cos(theta);
  r(1, 0) = std::sin(theta);
  r(0, 1) = -std::sin(theta);
  r(1, 1) = std::cos(theta);
  return r;
}

/// Rotates the spanning columns of a planar parallelepiped; the origin is left to the caller.
inline Parallelepiped rotate2d(const Parallelepiped& P, double theta) {
  P.validate();
  if (P.dim() != 2) fail(Module::parallelepiped_geometry, ErrorCode::domain_error, "rotate2d needs d = 2");
  Parallelepiped out = P;
  out.columns = rotation2d(theta) * P.columns;
  return out;
}

}  // namespace beta_targets
