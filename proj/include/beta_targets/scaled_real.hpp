#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <type_traits>

namespace beta_targets {

/// A double mantissa paired with a 64-bit binary exponent.
///
/// Values are m * 2^e with 0.5 <= |m| < 1 (or m == 0). The exponent range is
/// effectively unbounded, so quantities like 2^-1200 that arise from deep
/// scaling survive arithmetic that would underflow plain doubles. Precision is
/// that of a double mantissa.
class ScaledReal {
 public:
  constexpr ScaledReal() = default;

  ScaledReal(double v) { set(v, 0); }  // NOLINT(google-explicit-constructor)

  static ScaledReal from_parts(double mantissa, std::int64_t exponent) {
    ScaledReal r;
    r.set(mantissa, exponent);
    return r;
  }

  /// 2^log2_value, without ever materialising the (possibly unrepresentable) double.
  static ScaledReal from_log2(double log2_value) {
    if (log2_value == -std::numeric_limits<double>::infinity()) return ScaledReal{};
    const double whole = std::floor(log2_value);
    return from_parts(std::exp2(log2_value - whole), static_cast<std::int64_t>(whole));
  }

  double mantissa() const { return m_; }
  std::int64_t exponent() const { return e_; }
  bool is_zero() const { return m_ == 0.0; }

  /// log2|x|; -inf for zero.
  double log2_abs() const {
    if (m_ == 0.0) return -std::numeric_limits<double>::infinity();
    return std::log2(std::fabs(m_)) + static_cast<double>(e_);
  }

  /// Conversion to double; underflows to 0 and overflows to inf like ldexp.
  double to_double() const {
    if (m_ == 0.0) return 0.0;
    if (e_ > 2000) return std::copysign(std::numeric_limits<double>::infinity(), m_);
    if (e_ < -2000) return std::copysign(0.0, m_);
    return std::ldexp(m_, static_cast<int>(e_));
  }

  ScaledReal operator-() const { return from_parts(-m_, e_); }

  friend ScaledReal operator+(const ScaledReal& a, const ScaledReal& b) {
    if (a.m_ == 0.0) return b;
    if (b.m_ == 0.0) return a;
    const std::int64_t shift = a.e_ - b.e_;
    // 2^-60 relative is below double resolution; the smaller term vanishes.
    if (shift > 60) return a;
    if (shift < -60) return b;
    if (shift >= 0) return from_parts(a.m_ + std::ldexp(b.m_, static_cast<int>(-shift)), a.e_);
    return from_parts(std::ldexp(a.m_, static_cast<int>(shift)) + b.m_, b.e_);
  }
  friend ScaledReal operator-(const ScaledReal& a, const ScaledReal& b) { return a + (-b); }
  friend ScaledReal operator*(const ScaledReal& a, const ScaledReal& b) {
    return from_parts(a.m_ * b.m_, a.e_ + b.e_);
  }
  friend ScaledReal operator/(const ScaledReal& a, const ScaledReal& b) {
    if (b.m_ == 0.0) return ScaledReal(a.m_ / b.m_);
    return from_parts(a.m_ / b.m_, a.e_ - b.e_);
  }

  ScaledReal& operator+=(const ScaledReal& o) { return *this = *this + o; }
  ScaledReal& operator-=(const ScaledReal& o) { return *this = *this - o; }
  ScaledReal& operator*=(const ScaledReal& o) { return *this = *this * o; }
  ScaledReal& operator/=(const ScaledReal& o) { return *this = *this / o; }

  friend bool operator==(const ScaledReal& a, const ScaledReal& b) { return a.m_ == b.m_ && (a.m_ == 0.0 || a.e_ == b.e_); }
  friend bool operator<(const ScaledReal& a, const ScaledReal& b) { return compare(a, b) < 0; }
  friend bool operator>(const ScaledReal& a, const ScaledReal& b) { return compare(a, b) > 0; }
  friend bool operator<=(const ScaledReal& a, const ScaledReal& b) { return compare(a, b) <= 0; }
  friend bool operator>=(const ScaledReal& a, const ScaledReal& b) { return compare(a, b) >= 0; }

  friend ScaledReal abs(const ScaledReal& x) { return from_parts(std::fabs(x.m_), x.e_); }
  friend ScaledReal sqrt(const ScaledReal& x) {
    if (x.m_ <= 0.0) return ScaledReal(std::sqrt(x.m_));
    if (x.e_ % 2 == 0) return from_parts(std::sqrt(x.m_), x.e_ / 2);
    // odd exponent: fold one factor of two into the mantissa
    const std::int64_t e = x.e_ - 1;
    return from_parts(std::sqrt(2.0 * x.m_), e / 2);
  }

  friend std::ostream& operator<<(std::ostream& os, const ScaledReal& x) {
    return os << x.m_ << "*2^" << x.e_;
  }

 private:
  static int compare(const ScaledReal& a, const ScaledReal& b) {
    const int sa = (a.m_ > 0) - (a.m_ < 0);
    const int sb = (b.m_ > 0) - (b.m_ < 0);
    if (sa != sb) return sa < sb ? -1 : 1;
    if (sa == 0) return 0;
    int mag = 0;
    if (a.e_ != b.e_) {
      mag = a.e_ < b.e_ ? -1 : 1;
    } else {
      const double fa = std::fabs(a.m_), fb = std::fabs(b.m_);
      mag = fa < fb ? -1 : (fa > fb ? 1 : 0);
    }
    return sa > 0 ? mag : -mag;
  }

  void set(double mantissa, std::int64_t exponent) {
    if (mantissa == 0.0 || !std::isfinite(mantissa)) {
      m_ = mantissa;
      e_ = 0;
      return;
    }
    int shift = 0;
    m_ = std::frexp(mantissa, &shift);
    e_ = exponent + shift;
  }

  double m_ = 0.0;
  std::int64_t e_ = 0;
};

/// Uniform helpers so templated numerics can run on double, long double or ScaledReal.
inline double log2_abs(double x) { return std::log2(std::fabs(x)); }
inline double log2_abs(long double x) { return static_cast<double>(std::log2(std::fabs(x))); }
inline double log2_abs(const ScaledReal& x) { return x.log2_abs(); }

inline double to_double(double x) { return x; }
inline double to_double(long double x) { return static_cast<double>(x); }
inline double to_double(const ScaledReal& x) { return x.to_double(); }

template <class T>
T from_log2(double log2_value) {
  if constexpr (std::is_same_v<T, ScaledReal>) {
    return ScaledReal::from_log2(log2_value);
  } else {
    return static_cast<T>(std::exp2(static_cast<T>(log2_value)));
  }
}

}  // namespace beta_targets
