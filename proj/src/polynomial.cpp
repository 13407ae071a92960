#include "cumulants/polynomial.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace cumulants {
namespace {

using QPoly = std::vector<mpq_class>;

void trim(QPoly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

QPoly to_rational(const Polynomial& p) {
  QPoly out;
  out.reserve(p.coefficients().size());
  for (const auto& c : p.coefficients()) out.emplace_back(c);
  return out;
}

// Remainder of a / b over Q.
QPoly remainder(QPoly a, const QPoly& b) {
  const auto db = b.size() - 1;
  while (a.size() >= b.size()) {
    const mpq_class factor = a.back() / b.back();
    const auto shift = a.size() - 1 - db;
    for (std::size_t i = 0; i <= db; ++i) a[shift + i] -= factor * b[i];
    a.pop_back();
    trim(a);
  }
  return a;
}

// Clears denominators and removes content; leading coefficient positive.
Polynomial primitive(const QPoly& p) {
  if (p.empty()) return {};
  mpz_class lcm_den = 1;
  for (const auto& c : p) mpz_lcm(lcm_den.get_mpz_t(), lcm_den.get_mpz_t(), c.get_den_mpz_t());
  std::vector<mpz_class> ints;
  ints.reserve(p.size());
  for (const auto& c : p) {
    mpq_class scaled = c * lcm_den;
    ints.push_back(scaled.get_num());
  }
  Polynomial result(std::move(ints));
  mpz_class content = result.content();
  if (result.leading() < 0) content = -content;
  return result.divided_exactly(content);
}

}  // namespace

Polynomial::Polynomial(std::vector<mpz_class> coefficients) : coeffs_(std::move(coefficients)) { trim(); }

Polynomial::Polynomial(long constant) {
  if (constant != 0) coeffs_.emplace_back(constant);
}

Polynomial Polynomial::m() { return Polynomial(std::vector<mpz_class>{0, 1}); }

Polynomial Polynomial::falling_factorial(int n) {
  Polynomial result(1);
  for (int i = 0; i < n; ++i) result *= Polynomial(std::vector<mpz_class>{-i, 1});
  return result;
}

mpz_class Polynomial::coefficient(int power) const {
  if (power < 0 || power > degree()) return 0;
  return coeffs_[static_cast<std::size_t>(power)];
}

const mpz_class& Polynomial::leading() const {
  if (coeffs_.empty()) throw std::domain_error("leading coefficient of the zero polynomial");
  return coeffs_.back();
}

mpz_class Polynomial::content() const {
  mpz_class g = 0;
  for (const auto& c : coeffs_) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
  return g;
}

Polynomial Polynomial::shifted(long shift) const {
  if (shift == 0 || coeffs_.empty()) return *this;
  // Horner in the substituted variable (m - shift).
  const Polynomial step(std::vector<mpz_class>{-shift, 1});
  Polynomial result;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
    result *= step;
    result += Polynomial(std::vector<mpz_class>{*it});
  }
  return result;
}

mpq_class Polynomial::evaluate(const mpq_class& at) const {
  mpq_class acc = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * at + *it;
  return acc;
}

Polynomial& Polynomial::operator+=(const Polynomial& rhs) {
  if (rhs.coeffs_.size() > coeffs_.size()) coeffs_.resize(rhs.coeffs_.size(), 0);
  for (std::size_t i = 0; i < rhs.coeffs_.size(); ++i) coeffs_[i] += rhs.coeffs_[i];
  trim();
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& rhs) {
  if (rhs.coeffs_.size() > coeffs_.size()) coeffs_.resize(rhs.coeffs_.size(), 0);
  for (std::size_t i = 0; i < rhs.coeffs_.size(); ++i) coeffs_[i] -= rhs.coeffs_[i];
  trim();
  return *this;
}

Polynomial& Polynomial::operator*=(const Polynomial& rhs) {
  if (coeffs_.empty() || rhs.coeffs_.empty()) {
    coeffs_.clear();
    return *this;
  }
  std::vector<mpz_class> out(coeffs_.size() + rhs.coeffs_.size() - 1, 0);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    if (coeffs_[i] == 0) continue;
    for (std::size_t j = 0; j < rhs.coeffs_.size(); ++j) out[i + j] += coeffs_[i] * rhs.coeffs_[j];
  }
  coeffs_ = std::move(out);
  trim();
  return *this;
}

Polynomial& Polynomial::operator*=(const mpz_class& factor) {
  if (factor == 0) {
    coeffs_.clear();
    return *this;
  }
  for (auto& c : coeffs_) c *= factor;
  return *this;
}

Polynomial Polynomial::divided_exactly(const mpz_class& divisor) const {
  if (divisor == 0) throw std::domain_error("polynomial division by zero integer");
  std::vector<mpz_class> out = coeffs_;
  for (auto& c : out) {
    if (!mpz_divisible_p(c.get_mpz_t(), divisor.get_mpz_t()))
      throw std::domain_error("integer does not divide polynomial content");
    mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), divisor.get_mpz_t());
  }
  return Polynomial(std::move(out));
}

std::string Polynomial::to_string(const std::string& variable) const {
  if (coeffs_.empty()) return "0";
  std::ostringstream out;
  bool first = true;
  for (int power = degree(); power >= 0; --power) {
    mpz_class c = coeffs_[static_cast<std::size_t>(power)];
    if (c == 0) continue;
    const bool negative = c < 0;
    if (negative) c = -c;
    if (first) {
      if (negative) out << '-';
    } else {
      out << (negative ? " - " : " + ");
    }
    first = false;
    if (power == 0 || c != 1) out << c.get_str();
    if (power >= 1) out << variable;
    if (power >= 2) out << '^' << power;
  }
  return out.str();
}

void Polynomial::trim() {
  while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

Polynomial gcd(const Polynomial& a, const Polynomial& b) {
  QPoly x = to_rational(a);
  QPoly y = to_rational(b);
  while (!y.empty()) {
    QPoly r = remainder(std::move(x), y);
    x = std::move(y);
    y = std::move(r);
  }
  return primitive(x);
}

Polynomial divide_exactly(const Polynomial& a, const Polynomial& b) {
  if (b.is_zero()) throw std::domain_error("polynomial division by zero");
  if (a.is_zero()) return {};
  if (a.degree() < b.degree()) throw std::domain_error("polynomial division is not exact");
  std::vector<mpz_class> rem = a.coefficients();
  std::vector<mpz_class> quot(static_cast<std::size_t>(a.degree() - b.degree() + 1), 0);
  const auto& bc = b.coefficients();
  const auto db = static_cast<std::size_t>(b.degree());
  for (std::size_t k = quot.size(); k-- > 0;) {
    mpz_class& top = rem[k + db];
    if (!mpz_divisible_p(top.get_mpz_t(), b.leading().get_mpz_t()))
      throw std::domain_error("polynomial division is not exact");
    mpz_class q;
    mpz_divexact(q.get_mpz_t(), top.get_mpz_t(), b.leading().get_mpz_t());
    quot[k] = q;
    for (std::size_t i = 0; i <= db; ++i) rem[k + i] -= q * bc[i];
  }
  for (const auto& c : rem)
    if (c != 0) throw std::domain_error("polynomial division is not exact");
  return Polynomial(std::move(quot));
}

}  // namespace cumulants
