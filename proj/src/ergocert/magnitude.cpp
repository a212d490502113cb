#include "ergocert/magnitude.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include "ergocert/error.hpp"

namespace ergocert {

namespace {

constexpr std::int64_t kMaxExp = std::int64_t{1} << 62;
constexpr double kLn2 = 0.69314718055994530942;
constexpr double kLog10Of2 = 0.30102999566398119521;
// Below this the Taylor branches of one_minus_exp_neg / neg_log1m are exact to double rounding.
constexpr double kTinyLog = -11.512925464970229;  // ln(1e-5)

void check_exponent(std::int64_t e) {
  if (e > kMaxExp || e < -kMaxExp) {
    throw NumericOverflow("extended exponent out of range (|log2| > 2^62)");
  }
}

std::string shortest(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

}  // namespace

XReal::XReal(double v) {
  if (!std::isfinite(v)) throw InvalidInput("XReal from non-finite double");
  if (v == 0.0) return;
  int k = 0;
  mant_ = std::frexp(v, &k);
  exp_ = k;
}

XReal XReal::from_parts(double mant, std::int64_t exp) {
  if (!std::isfinite(mant)) throw NumericOverflow("non-finite mantissa");
  XReal out;
  if (mant == 0.0) return out;
  int k = 0;
  out.mant_ = std::frexp(mant, &k);
  check_exponent(exp);
  out.exp_ = exp + k;
  check_exponent(out.exp_);
  return out;
}

XReal XReal::exp(const XReal& t) {
  if (t.fits_double()) {
    const double td = t.to_double();
    if (std::fabs(td) < 700.0) return XReal(std::exp(td));
  }
  const double z = (t / XReal(kLn2)).to_double();
  if (z < -static_cast<double>(kMaxExp)) return XReal();
  if (!(z < static_cast<double>(kMaxExp))) {
    throw NumericOverflow("exp argument beyond extended range: " + t.to_string());
  }
  const double k = std::floor(z);
  return from_parts(std::exp2(z - k), static_cast<std::int64_t>(k));
}

double XReal::to_double() const {
  if (mant_ == 0.0) return 0.0;
  if (exp_ > 1100) return mant_ > 0 ? std::numeric_limits<double>::infinity()
                                    : -std::numeric_limits<double>::infinity();
  if (exp_ < -1100) return 0.0;
  return std::ldexp(mant_, static_cast<int>(exp_));
}

bool XReal::fits_double() const { return mant_ == 0.0 || (exp_ <= 1024 && exp_ >= -1021); }

double XReal::log_abs() const {
  if (mant_ == 0.0) throw InvalidInput("log of zero");
  return std::log(std::fabs(mant_)) + static_cast<double>(exp_) * kLn2;
}

std::string XReal::to_string() const {
  if (fits_double()) return shortest(to_double());
  const double l10 = std::log10(std::fabs(mant_)) + static_cast<double>(exp_) * kLog10Of2;
  double d = std::floor(l10);
  double m10 = std::pow(10.0, l10 - d);
  if (m10 >= 9.9999999999999995) {
    m10 = 1.0;
    d += 1.0;
  }
  std::array<char, 96> buf{};
  std::snprintf(buf.data(), buf.size(), "%s%.15ge%+.0f", mant_ < 0 ? "-" : "", m10, d);
  return std::string(buf.data());
}

XReal operator+(const XReal& a, const XReal& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  const XReal& big = a.exp_ >= b.exp_ ? a : b;
  const XReal& small = a.exp_ >= b.exp_ ? b : a;
  const std::int64_t d = big.exp_ - small.exp_;
  if (d > 60) return big;
  return XReal::from_parts(big.mant_ + std::ldexp(small.mant_, -static_cast<int>(d)), big.exp_);
}

XReal operator*(const XReal& a, const XReal& b) {
  if (a.is_zero() || b.is_zero()) return XReal();
  return XReal::from_parts(a.mant_ * b.mant_, a.exp_ + b.exp_);
}

XReal operator/(const XReal& a, const XReal& b) {
  if (b.is_zero()) throw InvalidInput("XReal division by zero");
  if (a.is_zero()) return XReal();
  return XReal::from_parts(a.mant_ / b.mant_, a.exp_ - b.exp_);
}

bool operator<(const XReal& a, const XReal& b) {
  const int sa = a.sign();
  const int sb = b.sign();
  if (sa != sb) return sa < sb;
  if (sa == 0) return false;
  if (a.exp_ != b.exp_) return sa > 0 ? a.exp_ < b.exp_ : a.exp_ > b.exp_;
  return a.mant_ < b.mant_;
}

// ---------------------------------------------------------------------------

Magnitude::Magnitude(double v) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidInput("magnitude requires a finite positive value, got " + shortest(v));
  }
  lg_ = XReal(std::log(v));
}

Magnitude Magnitude::from_log(const XReal& lg) {
  Magnitude m;
  m.lg_ = lg;
  return m;
}

Magnitude Magnitude::from_value(const XReal& v) {
  if (v.sign() <= 0) throw InvalidInput("magnitude requires a positive value");
  return from_log(XReal(v.log_abs()));
}

XReal Magnitude::value() const { return XReal::exp(lg_); }

double Magnitude::to_double() const {
  const double l = lg_.to_double();
  if (l > 710.0) return std::numeric_limits<double>::infinity();
  if (l < -746.0) return 0.0;
  return std::exp(l);
}

bool Magnitude::fits_double() const {
  const double l = lg_.to_double();
  return l < 709.78 && l > -708.39;
}

std::string Magnitude::to_string() const {
  try {
    const XReal v = value();
    if (!v.is_zero()) return v.to_string();
  } catch (const NumericOverflow&) {
  }
  return "exp(" + lg_.to_string() + ")";
}

Magnitude operator+(const Magnitude& a, const Magnitude& b) {
  const Magnitude& hi = a.lg_ >= b.lg_ ? a : b;
  const Magnitude& lo = a.lg_ >= b.lg_ ? b : a;
  const double d = (lo.lg_ - hi.lg_).to_double();
  return Magnitude::from_log(hi.lg_ + XReal(std::log1p(std::exp(d))));
}

Magnitude operator-(const Magnitude& a, const Magnitude& b) {
  const double d = (b.lg_ - a.lg_).to_double();
  if (!(d < 0.0)) {
    throw InvalidInput("magnitude subtraction with non-positive result");
  }
  return Magnitude::from_log(a.lg_ + XReal(std::log(-std::expm1(d))));
}

Magnitude pow(const Magnitude& x, double t) { return Magnitude::from_log(x.log() * XReal(t)); }

Magnitude pow(const Magnitude& x, const Magnitude& t) {
  return Magnitude::from_log(x.log() * t.value());
}

Magnitude sqrt(const Magnitude& x) { return Magnitude::from_log(x.log() * XReal(0.5)); }

Magnitude min(const Magnitude& a, const Magnitude& b) { return b < a ? b : a; }
Magnitude max(const Magnitude& a, const Magnitude& b) { return a < b ? b : a; }

Magnitude exp_of(const Magnitude& t) { return Magnitude::from_log(t.value()); }
Magnitude exp_neg(const Magnitude& t) { return Magnitude::from_log(-t.value()); }

Magnitude log_of(const Magnitude& x) {
  if (x.log().sign() <= 0) throw InvalidInput("log_of requires an argument > 1");
  return Magnitude::from_value(x.log());
}

Magnitude one_minus_exp_neg(const Magnitude& x) {
  if (x.log() < XReal(kTinyLog)) {
    const double xd = x.to_double();
    return Magnitude::from_log(x.log() + XReal(std::log1p(-xd / 2.0 + xd * xd / 6.0)));
  }
  const double xd = x.to_double();
  return Magnitude(-std::expm1(-xd));
}

Magnitude neg_log1m(const Magnitude& s) {
  if (s.log().sign() >= 0) throw InvalidInput("neg_log1m requires 0 < s < 1");
  if (s.log() < XReal(kTinyLog)) {
    const double sd = s.to_double();
    return Magnitude::from_log(s.log() + XReal(std::log1p(sd / 2.0 + sd * sd / 3.0)));
  }
  return Magnitude(-std::log1p(-s.to_double()));
}

Magnitude floor_plus_one(const Magnitude& x) {
  const double xd = x.to_double();
  if (xd < 4503599627370496.0) return Magnitude(std::floor(xd) + 1.0);
  return Magnitude::from_log(x.log() * XReal(1.0 + std::ldexp(1.0, -50)));
}

}  // namespace ergocert
