#pragma once

#include <cstdint>
#include <string>

namespace ergocert {

/// Real number mant * 2^exp with |mant| in [0.5, 1) (or mant == 0) and a 64-bit exponent.
///
/// Used wherever a constant escapes the double range but its logarithm does not
/// (or its logarithm escapes too, see Magnitude). Exponents beyond +-2^62 throw
/// NumericOverflow.
class XReal {
 public:
  XReal() = default;
  XReal(double v);  // NOLINT(google-explicit-constructor): literals read naturally

  static XReal from_parts(double mant, std::int64_t exp);
  /// e^t; throws NumericOverflow when t / ln 2 exceeds the exponent range, returns 0 below it.
  static XReal exp(const XReal& t);

  double mantissa() const { return mant_; }
  std::int64_t exponent() const { return exp_; }
  bool is_zero() const { return mant_ == 0.0; }
  int sign() const { return mant_ > 0 ? 1 : (mant_ < 0 ? -1 : 0); }

  /// Nearest double; saturates to +-inf or 0 outside the double range.
  double to_double() const;
  /// True when the value is zero or a finite normal double.
  bool fits_double() const;
  /// ln|x|; throws on zero.
  double log_abs() const;
  /// Decimal scientific form, e.g. "1.2345e-5950"; shortest round trip when it fits a double.
  std::string to_string() const;

  XReal operator-() const { return from_parts(-mant_, exp_); }
  XReal abs() const { return from_parts(mant_ < 0 ? -mant_ : mant_, exp_); }

  friend XReal operator+(const XReal& a, const XReal& b);
  friend XReal operator-(const XReal& a, const XReal& b) { return a + (-b); }
  friend XReal operator*(const XReal& a, const XReal& b);
  friend XReal operator/(const XReal& a, const XReal& b);

  friend bool operator<(const XReal& a, const XReal& b);
  friend bool operator>(const XReal& a, const XReal& b) { return b < a; }
  friend bool operator<=(const XReal& a, const XReal& b) { return !(b < a); }
  friend bool operator>=(const XReal& a, const XReal& b) { return !(a < b); }
  friend bool operator==(const XReal& a, const XReal& b) {
    return a.mant_ == b.mant_ && a.exp_ == b.exp_;
  }

 private:
  double mant_ = 0.0;
  std::int64_t exp_ = 0;
};

/// Positive real stored through its natural logarithm (itself an XReal).
///
/// Covers values such as exp(-exp(10^5)) that appear as renewal probabilities at
/// chain level. Operations that would need the value of a number whose log does
/// not fit an XReal throw NumericOverflow.
class Magnitude {
 public:
  /// The value 1.
  Magnitude() = default;
  /// v must be finite and > 0.
  explicit Magnitude(double v);

  static Magnitude from_log(const XReal& lg);
  /// v must be > 0.
  static Magnitude from_value(const XReal& v);

  const XReal& log() const { return lg_; }
  /// Value as an XReal; throws NumericOverflow when ln(value) is beyond ~2^62 ln 2
  /// and underflows to 0 below -2^62 ln 2.
  XReal value() const;
  /// Saturating conversion (inf / 0 outside the double range).
  double to_double() const;
  bool fits_double() const;
  /// ln(value) as a double, saturating.
  double log_double() const { return lg_.to_double(); }
  std::string to_string() const;

  friend Magnitude operator*(const Magnitude& a, const Magnitude& b) {
    return from_log(a.lg_ + b.lg_);
  }
  friend Magnitude operator/(const Magnitude& a, const Magnitude& b) {
    return from_log(a.lg_ - b.lg_);
  }
  friend Magnitude operator+(const Magnitude& a, const Magnitude& b);
  /// Requires a > b.
  friend Magnitude operator-(const Magnitude& a, const Magnitude& b);

  friend bool operator<(const Magnitude& a, const Magnitude& b) { return a.lg_ < b.lg_; }
  friend bool operator>(const Magnitude& a, const Magnitude& b) { return b.lg_ < a.lg_; }
  friend bool operator<=(const Magnitude& a, const Magnitude& b) { return !(b.lg_ < a.lg_); }
  friend bool operator>=(const Magnitude& a, const Magnitude& b) { return !(a.lg_ < b.lg_); }

 private:
  XReal lg_{0.0};
};

Magnitude pow(const Magnitude& x, double t);
Magnitude pow(const Magnitude& x, const Magnitude& t);
Magnitude sqrt(const Magnitude& x);
Magnitude min(const Magnitude& a, const Magnitude& b);
Magnitude max(const Magnitude& a, const Magnitude& b);

/// e^t for a positive magnitude t.
Magnitude exp_of(const Magnitude& t);
/// e^{-t}.
Magnitude exp_neg(const Magnitude& t);
/// ln x for x > 1.
Magnitude log_of(const Magnitude& x);
/// 1 - e^{-x}, accurate for tiny x.
Magnitude one_minus_exp_neg(const Magnitude& x);
/// -ln(1 - s) for 0 < s < 1, accurate for tiny s.
Magnitude neg_log1m(const Magnitude& s);
/// Smallest integer strictly greater than x (x itself, rounded up, once x exceeds 2^52).
Magnitude floor_plus_one(const Magnitude& x);

}  // namespace ergocert
