#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>
#include <vector>

#include "cumulants/polynomial.hpp"

namespace cumulants {

/// Exact ratio of integer polynomials in m, always held in canonical form:
/// no common polynomial factor, no common integer content, and a denominator
/// with positive leading coefficient. Zero is 0/1.
class RationalFn {
 public:
  RationalFn() : den_(1) {}
  RationalFn(long constant) : num_(constant), den_(1) {}  // NOLINT(google-explicit-constructor)
  explicit RationalFn(const Polynomial& numerator);
  RationalFn(Polynomial numerator, Polynomial denominator);
  explicit RationalFn(const mpq_class& constant);

  static RationalFn m() { return RationalFn(Polynomial::m()); }

  [[nodiscard]] const Polynomial& numerator() const { return num_; }
  [[nodiscard]] const Polynomial& denominator() const { return den_; }
  [[nodiscard]] bool is_zero() const { return num_.is_zero(); }
  [[nodiscard]] bool is_constant() const { return num_.degree() <= 0 && den_.degree() == 0; }

  /// Exact value at a positive integer sample size; throws std::domain_error
  /// naming the pole when the denominator vanishes there.
  [[nodiscard]] mpq_class evaluate(long m) const;
  [[nodiscard]] double to_double(long m) const { return evaluate(m).get_d(); }

  /// Positive integer roots of the denominator, ascending.
  [[nodiscard]] std::vector<long> positive_integer_poles() const;
  /// True when the limit m -> infinity is finite.
  [[nodiscard]] bool bounded_at_infinity() const { return num_.degree() <= den_.degree(); }
  /// lim m -> infinity; requires bounded_at_infinity().
  [[nodiscard]] mpq_class limit_at_infinity() const;

  RationalFn& operator+=(const RationalFn& rhs);
  RationalFn& operator-=(const RationalFn& rhs);
  RationalFn& operator*=(const RationalFn& rhs);
  RationalFn& operator/=(const RationalFn& rhs);

  friend RationalFn operator+(RationalFn a, const RationalFn& b) { return a += b; }
  friend RationalFn operator-(RationalFn a, const RationalFn& b) { return a -= b; }
  friend RationalFn operator*(RationalFn a, const RationalFn& b) { return a *= b; }
  friend RationalFn operator/(RationalFn a, const RationalFn& b) { return a /= b; }
  friend RationalFn operator-(const RationalFn& a);

  /// Canonical forms make structural equality decidable; this is the same
  /// answer as cross-multiplication.
  friend bool operator==(const RationalFn& a, const RationalFn& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }

  /// Expanded form, e.g. "(m^2)/(m^2 - 3m + 2)".
  [[nodiscard]] std::string to_string() const;
  /// Denominator split into linear factors with integer roots where
  /// possible, e.g. "m^2/((m - 1)(m - 2))".
  [[nodiscard]] std::string to_pretty_string() const;

 private:
  void normalize();
  Polynomial num_;
  Polynomial den_;
};

/// Parses expressions such as "m^2/((m-1)(m-2))", "-3(m-1)/(m+1)" or "6".
/// Supports + - * / ^ (non-negative integer exponents), parentheses,
/// integer literals, the symbol m and implicit multiplication.
RationalFn parse_rational(std::string_view text);

}  // namespace cumulants
