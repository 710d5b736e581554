#pragma once

#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

namespace crnred {

// Exact rational number p/q, always reduced, q > 0.
//
// Scaling exponents are compared for equality all over the reduction and
// assumption machinery, so they must never pass through floating point.
// Arithmetic runs through 128-bit intermediates and throws on overflow of
// the reduced 64-bit result.
class Rational {
 public:
  constexpr Rational() : num_(0), den_(1) {}
  Rational(std::int64_t n) : num_(n), den_(1) {}
  Rational(std::int64_t n, std::int64_t d) { assign(n, d); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  bool isZero() const { return num_ == 0; }
  bool isInteger() const { return den_ == 1; }
  bool isPositive() const { return num_ > 0; }
  bool isNegative() const { return num_ < 0; }

  double toDouble() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  // "7", "-7", "3/2", "-3/2"
  std::string str() const {
    std::string s = std::to_string(num_);
    if (den_ != 1) s += "/" + std::to_string(den_);
    return s;
  }

  // Accepts integers ("12", "-3"), fractions ("3/2", "-7/4") and finite
  // decimals ("0.25", "-1.5"). Anything else is rejected.
  static Rational parse(std::string_view s);

  Rational operator-() const {
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
  }

  Rational operator+(const Rational& o) const {
    I128 n = I128(num_) * o.den_ + I128(o.num_) * den_;
    I128 d = I128(den_) * o.den_;
    return fromWide(n, d);
  }
  Rational operator-(const Rational& o) const { return *this + (-o); }
  Rational operator*(const Rational& o) const {
    return fromWide(I128(num_) * o.num_, I128(den_) * o.den_);
  }
  Rational operator/(const Rational& o) const {
    if (o.num_ == 0) throw std::domain_error("rational division by zero");
    return fromWide(I128(num_) * o.den_, I128(den_) * o.num_);
  }

  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  bool operator==(const Rational& o) const {
    return num_ == o.num_ && den_ == o.den_;
  }
  bool operator!=(const Rational& o) const { return !(*this == o); }
  bool operator<(const Rational& o) const {
    return I128(num_) * o.den_ < I128(o.num_) * den_;
  }
  bool operator>(const Rational& o) const { return o < *this; }
  bool operator<=(const Rational& o) const { return !(o < *this); }
  bool operator>=(const Rational& o) const { return !(*this < o); }

  // Non-negative integer exponent only; enough for stoichiometric powers.
  static Rational pow(const Rational& base, int e) {
    if (e < 0) throw std::domain_error("rational pow: negative exponent");
    Rational r(1);
    for (int i = 0; i < e; ++i) r *= base;
    return r;
  }

 private:
  using I128 = __int128;

  std::int64_t num_;
  std::int64_t den_;

  static I128 gcdWide(I128 a, I128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
      I128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  static Rational fromWide(I128 n, I128 d) {
    if (d == 0) throw std::domain_error("rational with zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    I128 g = gcdWide(n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    constexpr I128 lo = std::numeric_limits<std::int64_t>::min();
    constexpr I128 hi = std::numeric_limits<std::int64_t>::max();
    if (n < lo || n > hi || d > hi)
      throw std::overflow_error("rational overflow");
    Rational r;
    r.num_ = static_cast<std::int64_t>(n);
    r.den_ = static_cast<std::int64_t>(d);
    return r;
  }

  void assign(std::int64_t n, std::int64_t d) {
    *this = fromWide(I128(n), I128(d));
  }
};

inline Rational Rational::parse(std::string_view s) {
  auto fail = [&]() -> Rational {
    throw std::invalid_argument("not a rational number: '" + std::string(s) +
                                "'");
  };
  if (s.empty()) return fail();
  bool neg = false;
  std::size_t pos = 0;
  if (s[0] == '+' || s[0] == '-') {
    neg = s[0] == '-';
    pos = 1;
  }
  auto digits = [&](std::size_t& p) -> std::int64_t {
    if (p >= s.size() || !std::isdigit(static_cast<unsigned char>(s[p])))
      fail();
    I128 v = 0;
    while (p < s.size() && std::isdigit(static_cast<unsigned char>(s[p]))) {
      v = v * 10 + (s[p] - '0');
      if (v > std::numeric_limits<std::int64_t>::max())
        throw std::overflow_error("rational overflow");
      ++p;
    }
    return static_cast<std::int64_t>(v);
  };
  std::int64_t ip = digits(pos);
  if (pos == s.size()) {
    Rational r(ip);
    return neg ? -r : r;
  }
  if (s[pos] == '/') {
    ++pos;
    std::int64_t q = digits(pos);
    if (pos != s.size()) fail();
    if (q == 0) fail();
    Rational r(ip, q);
    return neg ? -r : r;
  }
  if (s[pos] == '.') {
    ++pos;
    std::size_t start = pos;
    std::int64_t frac = digits(pos);
    if (pos != s.size()) fail();
    std::size_t nd = pos - start;
    Rational scale(1);
    for (std::size_t i = 0; i < nd; ++i) scale *= Rational(10);
    Rational r = Rational(ip) + Rational(frac) / scale;
    return neg ? -r : r;
  }
  return fail();
}

// A rational extended with +inf / -inf, for the empty-min / empty-max
// conventions of the per-complex and per-intermediate scale summaries.
class ExtRational {
 public:
  enum class Kind { MinusInf, Finite, PlusInf };

  ExtRational() : kind_(Kind::Finite), value_() {}
  ExtRational(Rational v) : kind_(Kind::Finite), value_(v) {}
  static ExtRational plusInf() { return ExtRational(Kind::PlusInf); }
  static ExtRational minusInf() { return ExtRational(Kind::MinusInf); }

  bool isFinite() const { return kind_ == Kind::Finite; }
  bool isPlusInf() const { return kind_ == Kind::PlusInf; }
  bool isMinusInf() const { return kind_ == Kind::MinusInf; }

  const Rational& value() const {
    if (!isFinite()) throw std::domain_error("infinite ExtRational value");
    return value_;
  }

  bool operator==(const ExtRational& o) const {
    if (kind_ != o.kind_) return false;
    return kind_ != Kind::Finite || value_ == o.value_;
  }
  bool operator<(const ExtRational& o) const {
    if (kind_ == o.kind_)
      return kind_ == Kind::Finite && value_ < o.value_;
    if (kind_ == Kind::MinusInf) return true;
    if (o.kind_ == Kind::PlusInf) return true;
    return false;
  }
  bool operator>(const ExtRational& o) const { return o < *this; }
  bool operator<=(const ExtRational& o) const { return !(o < *this); }
  bool operator>=(const ExtRational& o) const { return !(*this < o); }

  std::string str() const {
    switch (kind_) {
      case Kind::PlusInf:
        return "+inf";
      case Kind::MinusInf:
        return "-inf";
      default:
        return value_.str();
    }
  }

 private:
  explicit ExtRational(Kind k) : kind_(k), value_() {}
  Kind kind_;
  Rational value_;
};

}  // namespace crnred
