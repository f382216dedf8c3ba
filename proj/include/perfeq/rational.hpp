#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>

#include "perfeq/error.hpp"

namespace perfeq {

/// Exact rational in lowest terms. Thin value wrapper over mpq_class.
class Rational {
 public:
  Rational() = default;
  Rational(long n) : q_(n) {}  // NOLINT
  Rational(long n, long d) {
    if (d == 0) throw InvalidArgument("zero denominator");
    q_ = mpq_class(n, d);
    q_.canonicalize();
  }
  explicit Rational(mpq_class q) : q_(std::move(q)) { q_.canonicalize(); }
  Rational(const mpz_class& n, const mpz_class& d) {
    if (d == 0) throw InvalidArgument("zero denominator");
    q_ = mpq_class(n, d);
    q_.canonicalize();
  }

  /// Accepts "p", "-p", "p/q".
  static Rational parse(std::string_view s) {
    auto fail = [&] { throw ParseError("bad rational '" + std::string(s) + "'"); };
    if (s.empty()) fail();
    auto slash = s.find('/');
    auto digits = [&](std::string_view t, bool sign) {
      std::size_t i = 0;
      if (sign && !t.empty() && (t[0] == '-' || t[0] == '+')) ++i;
      if (i == t.size()) return false;
      for (; i < t.size(); ++i)
        if (t[i] < '0' || t[i] > '9') return false;
      return true;
    };
    std::string_view num = s.substr(0, slash);
    if (!digits(num, true)) fail();
    std::string n(num[0] == '+' ? num.substr(1) : num);
    if (slash == std::string_view::npos) return Rational(mpz_class(n), mpz_class(1));
    std::string_view den = s.substr(slash + 1);
    if (!digits(den, false)) fail();
    mpz_class d{std::string(den)};
    if (d == 0) fail();
    return Rational(mpz_class(n), d);
  }

  mpz_class num() const { return q_.get_num(); }
  mpz_class den() const { return q_.get_den(); }
  const mpq_class& raw() const { return q_; }
  int sign() const { return sgn(q_); }
  bool is_zero() const { return sgn(q_) == 0; }
  double to_double() const { return q_.get_d(); }
  std::string str() const { return q_.get_str(); }

  Rational abs() const { return Rational(mpq_class(::abs(q_))); }
  Rational pow(std::uint64_t e) const {
    mpz_class n, d;
    mpz_pow_ui(n.get_mpz_t(), q_.get_num_mpz_t(), e);
    mpz_pow_ui(d.get_mpz_t(), q_.get_den_mpz_t(), e);
    return Rational(n, d);
  }

  Rational& operator+=(const Rational& o) { q_ += o.q_; return *this; }
  Rational& operator-=(const Rational& o) { q_ -= o.q_; return *this; }
  Rational& operator*=(const Rational& o) { q_ *= o.q_; return *this; }
  Rational& operator/=(const Rational& o) {
    if (o.is_zero()) throw InvalidArgument("division by zero");
    q_ /= o.q_;
    return *this;
  }
  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
  Rational operator-() const { return Rational(mpq_class(-q_)); }

  friend bool operator==(const Rational& a, const Rational& b) { return a.q_ == b.q_; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    int c = cmp(a.q_, b.q_);
    return c < 0 ? std::strong_ordering::less
                 : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
  }
  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

 private:
  mpq_class q_;
};

inline Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

/// Closed interval [lower, upper] around an exact quantity.
struct Bracket {
  Rational lower;
  Rational upper;
  bool exact() const { return lower == upper; }
  Rational width() const { return upper - lower; }
  bool contains(const Rational& x) const { return lower <= x && x <= upper; }
};

inline Bracket operator+(const Bracket& a, const Bracket& b) {
  return {a.lower + b.lower, a.upper + b.upper};
}

/// Multiply a bracket by a scalar, flipping ends for negative scalars.
inline Bracket scale(const Bracket& b, const Rational& s) {
  if (s.sign() >= 0) return {b.lower * s, b.upper * s};
  return {b.upper * s, b.lower * s};
}

}  // namespace perfeq
