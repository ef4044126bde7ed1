#pragma once

// Exact scalars for machine amplitudes and probabilities.
//
// Amplitudes live in the cyclotomic field Q(zeta8) (zeta = e^{i pi/4}),
// stored as c0 + c1 zeta + c2 zeta^2 + c3 zeta^3 with zeta^4 = -1.
// Squared moduli land in the real subfield Q(sqrt2), stored as p + q sqrt2.
// Every decision (unitarity, probability thresholds, equality of
// distributions) is made on these exact values; doubles are for display.

#include <gmpxx.h>

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>

#include "qtmlab/error.hpp"

namespace qtmlab {

using BigInt = mpz_class;
using Rat = mpq_class;

inline Rat make_rat(const BigInt& num, const BigInt& den) {
  if (den == 0) throw PreconditionError("rational with zero denominator");
  Rat r(num, den);
  r.canonicalize();
  return r;
}

inline std::string to_string(const Rat& r) { return r.get_str(); }

inline std::string to_string(const BigInt& n) { return n.get_str(); }

namespace detail {

// Rejects magnitudes whose binary exponent would not fit a double.
inline double rat_to_double(const Rat& r) {
  if (r == 0) return 0.0;
  const long num_bits = static_cast<long>(mpz_sizeinbase(r.get_num_mpz_t(), 2));
  const long den_bits = static_cast<long>(mpz_sizeinbase(r.get_den_mpz_t(), 2));
  if (num_bits - den_bits > 1020) throw RangeError("value exceeds double range: " + r.get_str());
  const double d = r.get_d();
  if (!std::isfinite(d)) throw RangeError("value exceeds double range: " + r.get_str());
  return d;
}

inline int rat_sign(const Rat& r) { return sgn(r); }

}  // namespace detail

/// p + q*sqrt(2) with rational p, q.
class RealQ2 {
 public:
  RealQ2() = default;
  RealQ2(Rat p, Rat q = 0) : p_(std::move(p)), q_(std::move(q)) {}
  RealQ2(long v) : p_(v) {}  // NOLINT(google-explicit-constructor)

  static RealQ2 sqrt2() { return RealQ2(0, 1); }

  const Rat& rational_part() const { return p_; }
  const Rat& sqrt2_part() const { return q_; }

  bool is_zero() const { return p_ == 0 && q_ == 0; }

  friend RealQ2 operator+(const RealQ2& a, const RealQ2& b) { return {a.p_ + b.p_, a.q_ + b.q_}; }
  friend RealQ2 operator-(const RealQ2& a, const RealQ2& b) { return {a.p_ - b.p_, a.q_ - b.q_}; }
  friend RealQ2 operator-(const RealQ2& a) { return {-a.p_, -a.q_}; }
  friend RealQ2 operator*(const RealQ2& a, const RealQ2& b) {
    return {a.p_ * b.p_ + 2 * a.q_ * b.q_, a.p_ * b.q_ + a.q_ * b.p_};
  }
  RealQ2& operator+=(const RealQ2& b) { return *this = *this + b; }
  RealQ2& operator-=(const RealQ2& b) { return *this = *this - b; }
  RealQ2& operator*=(const RealQ2& b) { return *this = *this * b; }

  /// (p + q r2)^-1 = (p - q r2) / (p^2 - 2 q^2). Throws on zero.
  RealQ2 inverse() const {
    if (is_zero()) throw PreconditionError("division by zero in Q(sqrt2)");
    const Rat d = p_ * p_ - 2 * q_ * q_;  // nonzero since sqrt2 is irrational
    return {p_ / d, -q_ / d};
  }

  friend RealQ2 operator/(const RealQ2& a, const RealQ2& b) { return a * b.inverse(); }

  /// Exact sign of p + q*sqrt2, decided with rational arithmetic only.
  int sign() const {
    const int sp = detail::rat_sign(p_);
    const int sq = detail::rat_sign(q_);
    if (sq == 0) return sp;
    if (sp == 0 || sp == sq) return sq;
    // Opposite signs: the larger of p^2 and 2 q^2 wins; they cannot be equal.
    const Rat pp = p_ * p_;
    const Rat qq = 2 * q_ * q_;
    return pp > qq ? sp : sq;
  }

  RealQ2 abs() const { return sign() < 0 ? -*this : *this; }

  double to_double() const {
    return detail::rat_to_double(p_) + detail::rat_to_double(q_) * std::sqrt(2.0);
  }

  friend bool operator==(const RealQ2& a, const RealQ2& b) { return a.p_ == b.p_ && a.q_ == b.q_; }
  friend bool operator<(const RealQ2& a, const RealQ2& b) { return (a - b).sign() < 0; }
  friend bool operator>(const RealQ2& a, const RealQ2& b) { return b < a; }
  friend bool operator<=(const RealQ2& a, const RealQ2& b) { return !(b < a); }
  friend bool operator>=(const RealQ2& a, const RealQ2& b) { return !(a < b); }

 private:
  Rat p_{0};
  Rat q_{0};
};

inline int realq2_sign(const RealQ2& r) { return r.sign(); }

/// c0 + c1 zeta + c2 zeta^2 + c3 zeta^3, zeta = e^{i pi/4}.
class CycQ8 {
 public:
  using Coeffs = std::array<Rat, 4>;

  CycQ8() : c_{Rat(0), Rat(0), Rat(0), Rat(0)} {}
  CycQ8(Rat c0, Rat c1, Rat c2, Rat c3) : c_{std::move(c0), std::move(c1), std::move(c2), std::move(c3)} {}
  CycQ8(long v) : CycQ8(Rat(v), 0, 0, 0) {}        // NOLINT(google-explicit-constructor)
  CycQ8(const Rat& v) : CycQ8(v, 0, 0, 0) {}       // NOLINT(google-explicit-constructor)
  explicit CycQ8(const RealQ2& r) : CycQ8(r.rational_part(), r.sqrt2_part(), 0, -r.sqrt2_part()) {}

  static CycQ8 zeta() { return {0, 1, 0, 0}; }
  static CycQ8 i() { return {0, 0, 1, 0}; }
  /// sqrt2 = zeta - zeta^3.
  static CycQ8 sqrt2() { return {0, 1, 0, -1}; }
  /// 1/sqrt2 = (zeta - zeta^3) / 2.
  static CycQ8 inv_sqrt2() { return {0, Rat(1, 2), 0, Rat(-1, 2)}; }

  const Coeffs& coeffs() const { return c_; }
  const Rat& operator[](std::size_t k) const { return c_[k]; }

  bool is_zero() const { return c_[0] == 0 && c_[1] == 0 && c_[2] == 0 && c_[3] == 0; }

  friend CycQ8 operator+(const CycQ8& a, const CycQ8& b) {
    return {a.c_[0] + b.c_[0], a.c_[1] + b.c_[1], a.c_[2] + b.c_[2], a.c_[3] + b.c_[3]};
  }
  friend CycQ8 operator-(const CycQ8& a, const CycQ8& b) {
    return {a.c_[0] - b.c_[0], a.c_[1] - b.c_[1], a.c_[2] - b.c_[2], a.c_[3] - b.c_[3]};
  }
  friend CycQ8 operator-(const CycQ8& a) { return {-a.c_[0], -a.c_[1], -a.c_[2], -a.c_[3]}; }

  // Polynomial product reduced by zeta^4 = -1.
  friend CycQ8 operator*(const CycQ8& a, const CycQ8& b) {
    Coeffs r{Rat(0), Rat(0), Rat(0), Rat(0)};
    for (std::size_t i = 0; i < 4; ++i) {
      if (a.c_[i] == 0) continue;
      for (std::size_t j = 0; j < 4; ++j) {
        if (b.c_[j] == 0) continue;
        const std::size_t k = i + j;
        if (k < 4) {
          r[k] += a.c_[i] * b.c_[j];
        } else {
          r[k - 4] -= a.c_[i] * b.c_[j];
        }
      }
    }
    return {std::move(r[0]), std::move(r[1]), std::move(r[2]), std::move(r[3])};
  }

  CycQ8& operator+=(const CycQ8& b) {
    for (std::size_t k = 0; k < 4; ++k) c_[k] += b.c_[k];
    return *this;
  }
  CycQ8& operator-=(const CycQ8& b) {
    for (std::size_t k = 0; k < 4; ++k) c_[k] -= b.c_[k];
    return *this;
  }
  CycQ8& operator*=(const CycQ8& b) { return *this = *this * b; }

  /// conj(zeta) = -zeta^3, conj(zeta^2) = -zeta^2, conj(zeta^3) = -zeta.
  CycQ8 conj() const { return {c_[0], -c_[3], -c_[2], -c_[1]}; }

  /// a * conj(a), which always lies in Q(sqrt2).
  RealQ2 norm_sq() const {
    const CycQ8 r = *this * conj();
    // r is real: r2 == 0 and r3 == -r1, so r = r0 + r1 (zeta - zeta^3).
    return {r.c_[0], r.c_[1]};
  }

  CycQ8 inverse() const {
    if (is_zero()) throw PreconditionError("division by zero in Q(zeta8)");
    return conj() * CycQ8(norm_sq().inverse());
  }

  friend CycQ8 operator/(const CycQ8& a, const CycQ8& b) { return a * b.inverse(); }

  /// Lossy; display only.
  std::complex<double> to_complex() const {
    const double h = std::sqrt(0.5);
    const double c0 = detail::rat_to_double(c_[0]);
    const double c1 = detail::rat_to_double(c_[1]);
    const double c2 = detail::rat_to_double(c_[2]);
    const double c3 = detail::rat_to_double(c_[3]);
    return {c0 + (c1 - c3) * h, c2 + (c1 + c3) * h};
  }

  friend bool operator==(const CycQ8& a, const CycQ8& b) { return a.c_ == b.c_; }

 private:
  Coeffs c_;
};

inline CycQ8 cyc_add(const CycQ8& a, const CycQ8& b) { return a + b; }
inline CycQ8 cyc_mul(const CycQ8& a, const CycQ8& b) { return a * b; }
inline CycQ8 cyc_conj(const CycQ8& a) { return a.conj(); }
inline RealQ2 cyc_norm_sq(const CycQ8& a) { return a.norm_sq(); }

inline std::complex<double> to_float(const CycQ8& a) { return a.to_complex(); }
inline double to_float(const RealQ2& r) { return r.to_double(); }
inline double to_float(const Rat& r) { return detail::rat_to_double(r); }

namespace detail {

// Appends coefficient * basis in the amplitude grammar ("-1/2*r2", "i", ...).
inline void append_term(std::string& out, const Rat& coeff, const std::string& basis) {
  if (coeff == 0) return;
  const bool negative = coeff < 0;
  const Rat mag = negative ? Rat(-coeff) : coeff;
  if (out.empty()) {
    if (negative) out += '-';
  } else {
    out += negative ? '-' : '+';
  }
  if (basis.empty()) {
    out += mag.get_str();
  } else if (mag == 1) {
    out += basis;
  } else {
    out += mag.get_str();
    out += '*';
    out += basis;
  }
}

}  // namespace detail

/// Renders p + q*sqrt2 as e.g. "3-2*r2"; parses back through the amplitude grammar.
inline std::string to_string(const RealQ2& r) {
  std::string out;
  detail::append_term(out, r.rational_part(), "");
  detail::append_term(out, r.sqrt2_part(), "r2");
  return out.empty() ? "0" : out;
}

/// Renders in the basis 1, r2, i, i*r2 (e.g. "1/2*r2+1/2*i*r2" for zeta).
inline std::string to_string(const CycQ8& a) {
  // zeta = (r2 + i r2)/2, zeta^3 = (-r2 + i r2)/2
  const Rat re_r2 = (a[1] - a[3]) / 2;
  const Rat im_r2 = (a[1] + a[3]) / 2;
  std::string out;
  detail::append_term(out, a[0], "");
  detail::append_term(out, re_r2, "r2");
  detail::append_term(out, a[2], "i");
  detail::append_term(out, im_r2, "i*r2");
  return out.empty() ? "0" : out;
}

}  // namespace qtmlab
