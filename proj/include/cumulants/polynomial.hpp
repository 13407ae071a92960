#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

namespace cumulants {

/// Univariate polynomial in the sample size m with arbitrary-precision
/// integer coefficients, stored densely by ascending power.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<mpz_class> coefficients);
  Polynomial(long constant);  // NOLINT(google-explicit-constructor)

  /// The indeterminate m.
  static Polynomial m();
  /// m (m-1) ... (m-n+1); the empty product for n = 0.
  static Polynomial falling_factorial(int n);

  [[nodiscard]] int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  [[nodiscard]] bool is_zero() const { return coeffs_.empty(); }
  [[nodiscard]] const std::vector<mpz_class>& coefficients() const { return coeffs_; }
  [[nodiscard]] mpz_class coefficient(int power) const;
  [[nodiscard]] const mpz_class& leading() const;

  /// gcd of all coefficients (non-negative); 0 for the zero polynomial.
  [[nodiscard]] mpz_class content() const;

  /// p(m - shift).
  [[nodiscard]] Polynomial shifted(long shift) const;
  [[nodiscard]] mpq_class evaluate(const mpq_class& at) const;

  Polynomial& operator+=(const Polynomial& rhs);
  Polynomial& operator-=(const Polynomial& rhs);
  Polynomial& operator*=(const Polynomial& rhs);
  Polynomial& operator*=(const mpz_class& factor);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, const Polynomial& b) { return a *= b; }
  friend Polynomial operator*(Polynomial a, const mpz_class& b) { return a *= b; }
  friend Polynomial operator-(Polynomial a) { return a *= mpz_class(-1); }
  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.coeffs_ == b.coeffs_; }

  /// Divides every coefficient by `divisor`, which must divide all of them.
  [[nodiscard]] Polynomial divided_exactly(const mpz_class& divisor) const;

  [[nodiscard]] std::string to_string(const std::string& variable = "m") const;

 private:
  void trim();
  std::vector<mpz_class> coeffs_;
};

/// Primitive gcd with positive leading coefficient; gcd(0, 0) = 0.
Polynomial gcd(const Polynomial& a, const Polynomial& b);

/// a / b over the integers; throws std::domain_error when b does not divide a.
Polynomial divide_exactly(const Polynomial& a, const Polynomial& b);

}  // namespace cumulants
