#include "cumulants/rational_fn.hpp"

#include <cctype>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace cumulants {

RationalFn::RationalFn(const Polynomial& numerator) : num_(numerator), den_(1) { normalize(); }

RationalFn::RationalFn(Polynomial numerator, Polynomial denominator)
    : num_(std::move(numerator)), den_(std::move(denominator)) {
  if (den_.is_zero()) throw std::domain_error("rational function with zero denominator");
  normalize();
}

RationalFn::RationalFn(const mpq_class& constant)
    : num_(Polynomial(std::vector<mpz_class>{constant.get_num()})),
      den_(Polynomial(std::vector<mpz_class>{constant.get_den()})) {
  normalize();
}

void RationalFn::normalize() {
  if (num_.is_zero()) {
    den_ = Polynomial(1);
    return;
  }
  if (den_.degree() > 0) {
    const Polynomial g = gcd(num_, den_);
    if (g.degree() > 0) {
      num_ = divide_exactly(num_, g);
      den_ = divide_exactly(den_, g);
    }
  }
  mpz_class c;
  mpz_gcd(c.get_mpz_t(), num_.content().get_mpz_t(), den_.content().get_mpz_t());
  if (den_.leading() < 0) c = -c;
  if (c != 1) {
    num_ = num_.divided_exactly(c);
    den_ = den_.divided_exactly(c);
  }
}

mpq_class RationalFn::evaluate(long m) const {
  const mpq_class at(m);
  const mpq_class d = den_.evaluate(at);
  if (d == 0)
    throw std::domain_error("pole at m = " + std::to_string(m) + " in " + to_pretty_string());
  mpq_class result = num_.evaluate(at) / d;
  result.canonicalize();
  return result;
}

std::vector<long> RationalFn::positive_integer_poles() const {
  std::vector<long> poles;
  if (den_.degree() <= 0) return poles;
  // Integer roots divide the lowest non-zero coefficient; m = 0 is excluded.
  std::size_t low = 0;
  const auto& c = den_.coefficients();
  while (c[low] == 0) ++low;
  mpz_class bound = abs(c[low]);
  if (!bound.fits_slong_p()) throw std::overflow_error("denominator constant too large for pole search");
  const long limit = bound.get_si();
  for (long r = 1; r <= limit; ++r) {
    if (limit % r != 0) continue;
    if (den_.evaluate(mpq_class(r)) == 0) poles.push_back(r);
  }
  return poles;
}

mpq_class RationalFn::limit_at_infinity() const {
  if (!bounded_at_infinity()) throw std::domain_error("rational function diverges as m grows");
  if (num_.degree() < den_.degree()) return 0;
  mpq_class r(num_.leading(), den_.leading());
  r.canonicalize();
  return r;
}

RationalFn& RationalFn::operator+=(const RationalFn& rhs) {
  if (rhs.is_zero()) return *this;
  if (den_ == rhs.den_) {
    num_ += rhs.num_;
  } else {
    num_ = num_ * rhs.den_ + rhs.num_ * den_;
    den_ *= rhs.den_;
  }
  normalize();
  return *this;
}

RationalFn& RationalFn::operator-=(const RationalFn& rhs) { return *this += -rhs; }

RationalFn& RationalFn::operator*=(const RationalFn& rhs) {
  if (is_zero()) return *this;
  if (rhs.is_zero()) return *this = RationalFn();
  num_ *= rhs.num_;
  den_ *= rhs.den_;
  normalize();
  return *this;
}

RationalFn& RationalFn::operator/=(const RationalFn& rhs) {
  if (rhs.is_zero()) throw std::domain_error("division by the zero rational function");
  if (is_zero()) return *this;
  num_ *= rhs.den_;
  den_ *= rhs.num_;
  normalize();
  return *this;
}

RationalFn operator-(const RationalFn& a) {
  RationalFn r = a;
  r.num_ *= mpz_class(-1);
  return r;
}

namespace {

bool is_single_term(const Polynomial& p) {
  int nonzero = 0;
  for (const auto& c : p.coefficients())
    if (c != 0) ++nonzero;
  return nonzero <= 1;
}

std::string wrap(const Polynomial& p) {
  const std::string s = p.to_string();
  return is_single_term(p) && p.leading() > 0 ? s : "(" + s + ")";
}

struct Factored {
  std::string text;
  int pieces = 0;  // multiplicative pieces, counting a non-unit integer prefix
};

// Splits p into integer content, powers of m and of (m - r) for small integer
// roots r, and a remainder without such roots.
Factored factored(const Polynomial& p) {
  if (p.degree() <= 0) return {p.to_string(), 1};
  Polynomial rest = p;
  mpz_class content = rest.content();
  if (rest.leading() < 0) content = -content;
  rest = rest.divided_exactly(content);

  std::ostringstream factors;
  int count = 0;
  int m_power = 0;
  while (rest.degree() > 0 && rest.coefficient(0) == 0) {
    rest = divide_exactly(rest, Polynomial::m());
    ++m_power;
  }
  if (m_power > 0) {
    factors << 'm';
    if (m_power > 1) factors << '^' << m_power;
    ++count;
  }
  for (long r = -32; r <= 32 && rest.degree() > 0; ++r) {
    if (r == 0) continue;
    const Polynomial linear(std::vector<mpz_class>{-r, 1});
    int power = 0;
    while (rest.degree() > 0 && rest.evaluate(mpq_class(r)) == 0) {
      rest = divide_exactly(rest, linear);
      ++power;
    }
    if (power == 0) continue;
    factors << '(' << linear.to_string() << ')';
    if (power > 1) factors << '^' << power;
    ++count;
  }
  if (rest.degree() > 0) {
    factors << '(' << rest.to_string() << ')';
    ++count;
  } else {
    content *= rest.leading();
  }
  std::string prefix;
  if (content == -1) {
    prefix = "-";
  } else if (content != 1) {
    prefix = content.get_str();
    ++count;
  }
  return {prefix + factors.str(), count};
}

}  // namespace

std::string RationalFn::to_string() const {
  if (den_ == Polynomial(1)) return num_.to_string();
  return wrap(num_) + "/" + wrap(den_);
}

std::string RationalFn::to_pretty_string() const {
  const Factored n = factored(num_);
  if (den_ == Polynomial(1)) return n.text;
  const Factored d = factored(den_);
  return n.text + "/" + (d.pieces > 1 ? "(" + d.text + ")" : d.text);
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  RationalFn parse() {
    RationalFn value = expression();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected character");
    return value;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("cannot parse rational function '" + std::string(text_) + "': " + what +
                                " at offset " + std::to_string(pos_));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  char peek() {
    skip_space();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  RationalFn expression() {
    RationalFn value;
    bool first = true;
    for (;;) {
      char c = peek();
      int sign = 1;
      if (c == '+' || c == '-') {
        sign = c == '-' ? -1 : 1;
        ++pos_;
      } else if (!first) {
        break;
      }
      RationalFn t = term();
      value += sign < 0 ? -t : t;
      first = false;
    }
    return value;
  }

  RationalFn term() {
    RationalFn value = power();
    for (;;) {
      const char c = peek();
      if (c == '*') {
        ++pos_;
        value *= power();
      } else if (c == '/') {
        ++pos_;
        value /= power();
      } else if (c == '(' || c == 'm' || std::isdigit(static_cast<unsigned char>(c))) {
        value *= power();
      } else {
        break;
      }
    }
    return value;
  }

  RationalFn power() {
    RationalFn base = primary();
    if (peek() == '^') {
      ++pos_;
      skip_space();
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("expected exponent");
      const int exponent = std::stoi(std::string(text_.substr(start, pos_ - start)));
      RationalFn result(1);
      for (int i = 0; i < exponent; ++i) result *= base;
      return result;
    }
    return base;
  }

  RationalFn primary() {
    const char c = peek();
    if (c == '(') {
      ++pos_;
      RationalFn inner = expression();
      if (peek() != ')') fail("expected ')'");
      ++pos_;
      return inner;
    }
    if (c == 'm') {
      ++pos_;
      return RationalFn::m();
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      return RationalFn(Polynomial(std::vector<mpz_class>{mpz_class(std::string(text_.substr(start, pos_ - start)))}));
    }
    fail("expected operand");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

RationalFn parse_rational(std::string_view text) { return Parser(text).parse(); }

}  // namespace cumulants
