#pragma once

#include <cmath>
#include <complex>
#include <limits>

namespace ite {

/// Complex value carried as mantissa * exp(exponent).
///
/// D0 and the radial solution grow like exp((1+B)|Im k|); keeping the
/// exponent separate lets us take logarithms and phases far beyond the
/// range of a plain double. After normalization either the mantissa is
/// zero or 1 <= |mantissa| < e.
template <typename Real>
class BasicScaledComplex {
public:
  using real_type = Real;
  using complex_type = std::complex<Real>;

  /// Exponent gap beyond which the smaller addend is dropped.
  static constexpr Real kAlignLimit = 60;

  BasicScaledComplex() = default;
  BasicScaledComplex(complex_type mantissa, Real exponent = 0)  // NOLINT(implicit)
      : m_(mantissa), e_(exponent) {
    normalize();
  }
  BasicScaledComplex(Real value) : BasicScaledComplex(complex_type(value)) {}  // NOLINT

  const complex_type& mantissa() const noexcept { return m_; }
  Real exponent() const noexcept { return e_; }
  bool is_zero() const noexcept { return m_ == complex_type(0); }
  bool is_finite() const noexcept {
    return std::isfinite(m_.real()) && std::isfinite(m_.imag()) && std::isfinite(e_);
  }

  /// log|z|; -inf for zero.
  Real log_abs() const {
    if (is_zero()) return -std::numeric_limits<Real>::infinity();
    return std::log(std::abs(m_)) + e_;
  }
  Real arg() const { return std::arg(m_); }

  /// Plain complex value; may overflow to inf for large exponents.
  complex_type value() const {
    if (is_zero()) return complex_type(0);
    return m_ * std::exp(e_);
  }

  BasicScaledComplex conj() const { return raw(std::conj(m_), e_); }
  BasicScaledComplex operator-() const { return raw(-m_, e_); }

  /// Same value with the exponent shifted by `delta` (multiply by e^delta).
  BasicScaledComplex scaled_by_exp(Real delta) const {
    if (is_zero()) return {};
    return raw(m_, e_ + delta);
  }

  friend BasicScaledComplex operator*(const BasicScaledComplex& a, const BasicScaledComplex& b) {
    if (a.is_zero() || b.is_zero()) return {};
    return BasicScaledComplex(a.m_ * b.m_, a.e_ + b.e_);
  }
  friend BasicScaledComplex operator/(const BasicScaledComplex& a, const BasicScaledComplex& b) {
    if (a.is_zero()) return {};
    return BasicScaledComplex(a.m_ / b.m_, a.e_ - b.e_);
  }
  friend BasicScaledComplex operator+(const BasicScaledComplex& a, const BasicScaledComplex& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    const BasicScaledComplex& hi = a.e_ >= b.e_ ? a : b;
    const BasicScaledComplex& lo = a.e_ >= b.e_ ? b : a;
    const Real gap = hi.e_ - lo.e_;
    if (gap > kAlignLimit) return hi;
    return BasicScaledComplex(hi.m_ + lo.m_ * std::exp(-gap), hi.e_);
  }
  friend BasicScaledComplex operator-(const BasicScaledComplex& a, const BasicScaledComplex& b) {
    return a + (-b);
  }

  BasicScaledComplex& operator*=(const BasicScaledComplex& o) { return *this = *this * o; }
  BasicScaledComplex& operator+=(const BasicScaledComplex& o) { return *this = *this + o; }
  BasicScaledComplex& operator-=(const BasicScaledComplex& o) { return *this = *this - o; }

private:
  static BasicScaledComplex raw(complex_type m, Real e) {
    BasicScaledComplex z;
    z.m_ = m;
    z.e_ = e;
    return z;
  }

  void normalize() {
    const Real a = std::abs(m_);
    if (a == 0) {
      m_ = complex_type(0);
      e_ = 0;
      return;
    }
    if (!std::isfinite(a)) return;  // propagate NaN/inf so callers can detect it
    const Real shift = std::floor(std::log(a));
    if (shift != 0) {
      m_ *= std::exp(-shift);
      e_ += shift;
    }
    constexpr Real kE = Real(2.718281828459045235360287471352662);
    const Real b = std::abs(m_);
    if (b >= kE) {
      m_ /= kE;
      e_ += 1;
    } else if (b < 1) {
      m_ *= kE;
      e_ -= 1;
    }
  }

  complex_type m_{0};
  Real e_{0};
};

using ScaledComplex = BasicScaledComplex<double>;

/// |a - b| / max(|a|, |b|), evaluated without leaving scaled form.
template <typename Real>
Real relative_difference(const BasicScaledComplex<Real>& a, const BasicScaledComplex<Real>& b) {
  const Real scale = std::max(a.log_abs(), b.log_abs());
  if (!std::isfinite(scale)) return 0;  // both zero
  const BasicScaledComplex<Real> d = a - b;
  if (d.is_zero()) return 0;
  return std::exp(d.log_abs() - scale);
}

/// sin(k) with the exp(|Im k|) growth moved into the exponent.
template <typename Real>
BasicScaledComplex<Real> scaled_sin(std::complex<Real> k) {
  const Real x = k.real();
  const Real t = k.imag();
  const Real q = std::exp(-2 * std::abs(t));
  const Real sh = (t >= 0 ? 1 : -1) * (1 - q) / 2;
  const Real ch = (1 + q) / 2;
  return BasicScaledComplex<Real>(std::complex<Real>(std::sin(x) * ch, std::cos(x) * sh), std::abs(t));
}

/// cos(k) with the exp(|Im k|) growth moved into the exponent.
template <typename Real>
BasicScaledComplex<Real> scaled_cos(std::complex<Real> k) {
  const Real x = k.real();
  const Real t = k.imag();
  const Real q = std::exp(-2 * std::abs(t));
  const Real sh = (t >= 0 ? 1 : -1) * (1 - q) / 2;
  const Real ch = (1 + q) / 2;
  return BasicScaledComplex<Real>(std::complex<Real>(std::cos(x) * ch, -std::sin(x) * sh), std::abs(t));
}

/// exp(i k) in scaled form.
template <typename Real>
BasicScaledComplex<Real> scaled_exp_i(std::complex<Real> k) {
  return BasicScaledComplex<Real>(std::polar(Real(1), k.real()), -k.imag());
}

}  // namespace ite
