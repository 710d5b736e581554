#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "crnred/rational.hpp"

namespace crnred {

// One term c * N^e with exact rational coefficient and exponent.
struct Monomial {
  Rational coeff;
  Rational exp;
};

// Finite sum of terms c_e * N^e with exact rational coefficients and
// exponents, stored keyed by exponent with no zero coefficients.
//
// Tree-weight sums only ever add positive terms, but subtraction is allowed
// so the class also serves equality testing by cross-multiplication.
class NPoly {
 public:
  NPoly() = default;

  static NPoly zero() { return NPoly(); }
  static NPoly constant(const Rational& c) { return monomial(c, Rational(0)); }
  static NPoly monomial(const Rational& c, const Rational& e) {
    NPoly p;
    if (!c.isZero()) p.terms_[e] = c;
    return p;
  }

  bool isZero() const { return terms_.empty(); }
  std::size_t termCount() const { return terms_.size(); }
  const std::map<Rational, Rational>& terms() const { return terms_; }

  Rational coeffAt(const Rational& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  bool allCoeffsPositive() const {
    for (const auto& [e, c] : terms_)
      if (!c.isPositive()) return false;
    return true;
  }

  // Term with the largest exponent.
  Monomial leading() const {
    if (terms_.empty()) throw std::domain_error("leading term of zero");
    auto it = std::prev(terms_.end());
    return {it->second, it->first};
  }

  NPoly operator+(const NPoly& o) const {
    NPoly r = *this;
    for (const auto& [e, c] : o.terms_) r.addTerm(c, e);
    return r;
  }
  NPoly operator-(const NPoly& o) const {
    NPoly r = *this;
    for (const auto& [e, c] : o.terms_) r.addTerm(-c, e);
    return r;
  }
  NPoly operator*(const NPoly& o) const {
    NPoly r;
    for (const auto& [e1, c1] : terms_)
      for (const auto& [e2, c2] : o.terms_) r.addTerm(c1 * c2, e1 + e2);
    return r;
  }

  NPoly& operator+=(const NPoly& o) { return *this = *this + o; }
  NPoly& operator*=(const NPoly& o) { return *this = *this * o; }

  NPoly scaled(const Rational& c) const {
    NPoly r;
    for (const auto& [e, co] : terms_) r.addTerm(co * c, e);
    return r;
  }

  // Multiply by N^e.
  NPoly shifted(const Rational& e) const {
    NPoly r;
    for (const auto& [eo, c] : terms_) r.terms_[eo + e] = c;
    return r;
  }

  bool operator==(const NPoly& o) const { return terms_ == o.terms_; }
  bool operator!=(const NPoly& o) const { return !(*this == o); }

  double eval(double N) const {
    double s = 0;
    for (const auto& [e, c] : terms_)
      s += c.toDouble() * std::pow(N, e.toDouble());
    return s;
  }

  // Terms in descending exponent: "4 N^3 + 3 N^2", "8", "N^-1", "3/2 N".
  std::string str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
      const Rational& e = it->first;
      const Rational& c = it->second;
      if (!first) os << " + ";
      first = false;
      bool unitCoeff = c == Rational(1) && !e.isZero();
      if (!unitCoeff) os << c.str();
      if (!e.isZero()) {
        if (!unitCoeff) os << ' ';
        os << 'N';
        if (e != Rational(1)) os << '^' << e.str();
      }
    }
    return os.str();
  }

 private:
  std::map<Rational, Rational> terms_;

  void addTerm(const Rational& c, const Rational& e) {
    if (c.isZero()) return;
    auto [it, inserted] = terms_.try_emplace(e, c);
    if (!inserted) {
      it->second += c;
      if (it->second.isZero()) terms_.erase(it);
    }
  }
};

// Ratio num/den of two polynomials in N. Denominators arising from spanning
// tree sums are nonzero with positive coefficients, so evaluation at any
// N > 0 is safe. No polynomial gcd is attempted; equality is tested by
// cross-multiplication, which is exact.
class NRational {
 public:
  NRational() : num_(NPoly::zero()), den_(NPoly::constant(Rational(1))) {}
  NRational(NPoly num, NPoly den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_.isZero()) throw std::domain_error("NRational with zero denominator");
  }
  static NRational constant(const Rational& c) {
    return NRational(NPoly::constant(c), NPoly::constant(Rational(1)));
  }

  const NPoly& num() const { return num_; }
  const NPoly& den() const { return den_; }

  bool isZero() const { return num_.isZero(); }

  bool equivalent(const NRational& o) const {
    return num_ * o.den_ == o.num_ * den_;
  }

  // The constant c with num == c * den, if one exists; this is how emitted
  // rate constants detect that the N-dependence cancels.
  std::optional<Rational> asConstant() const {
    if (num_.isZero()) return Rational(0);
    if (num_.termCount() != den_.termCount()) return std::nullopt;
    Monomial ln = num_.leading();
    Monomial ld = den_.leading();
    Rational c = ln.coeff / ld.coeff;
    if (num_ == den_.scaled(c)) return c;
    return std::nullopt;
  }

  Rational leadingExponent() const {
    return num_.leading().exp - den_.leading().exp;
  }
  Rational leadingCoeff() const {
    return num_.leading().coeff / den_.leading().coeff;
  }

  NRational operator+(const NRational& o) const {
    return NRational(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
  }
  NRational operator*(const NRational& o) const {
    return NRational(num_ * o.num_, den_ * o.den_);
  }

  double eval(double N) const { return num_.eval(N) / den_.eval(N); }

  // "(8 N^3) / (4 N^3 + 3 N^2)"; plain "<poly>" when the denominator is the
  // constant 1 or the ratio reduces to a constant.
  std::string str() const {
    if (auto c = asConstant()) return c->str();
    if (den_ == NPoly::constant(Rational(1))) return num_.str();
    return "(" + num_.str() + ") / (" + den_.str() + ")";
  }

 private:
  NPoly num_;
  NPoly den_;
};

// Leading-order scalar c * N^e with a floating coefficient: addition keeps
// the larger exponent and adds coefficients on ties, multiplication adds
// exponents. Only sound for sums of non-negative quantities, which is the
// case for the tree-weight bookkeeping it supports.
struct ScaledQuantity {
  bool zero = true;
  Rational exp;
  double coeff = 0.0;

  static ScaledQuantity make(double c, const Rational& e) {
    ScaledQuantity q;
    if (c != 0.0) {
      q.zero = false;
      q.coeff = c;
      q.exp = e;
    }
    return q;
  }

  ScaledQuantity operator+(const ScaledQuantity& o) const {
    if (zero) return o;
    if (o.zero) return *this;
    if (exp == o.exp) return make(coeff + o.coeff, exp);
    return exp > o.exp ? *this : o;
  }
  ScaledQuantity operator*(const ScaledQuantity& o) const {
    if (zero || o.zero) return ScaledQuantity{};
    return make(coeff * o.coeff, exp + o.exp);
  }

  double eval(double N) const {
    return zero ? 0.0 : coeff * std::pow(N, exp.toDouble());
  }
};

}  // namespace crnred
