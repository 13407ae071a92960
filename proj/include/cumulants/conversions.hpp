#pragma once

#include <gmpxx.h>

#include <span>
#include <stdexcept>
#include <vector>

#include "cumulants/products.hpp"

namespace cumulants {

using MomentExpr = LinearCombination<MomentTag, mpq_class>;
using CumulantExpr = LinearCombination<CumulantTag, mpq_class>;

inline constexpr int kMaxConversionOrder = 8;

/// Joint cumulant C_N(labels) as a polynomial in joint moments, from the
/// recursion C_N = M_N - sum_nu sum_{|I|=nu} (nu/N) C_nu(I) M_{N-nu}(rest).
/// `labels` may repeat (C(x,x,y)); 1 <= N <= 8, else std::out_of_range.
const MomentExpr& cumulants_from_moments(const Block& labels);

/// Joint moment M_N(labels) as a polynomial in joint cumulants, from the
/// companion recursion M_N = C_N + sum_nu sum_{|I|=nu} (nu/N) C_nu(I) M_{N-nu}(rest).
const CumulantExpr& moments_from_cumulants(const Block& labels);

/// Rewrites every moment factor of an expression through
/// moments_from_cumulants. Coefficients are scaled by the (integer)
/// conversion coefficients.
template <class Coeff>
LinearCombination<CumulantTag, Coeff> to_cumulants(const LinearCombination<MomentTag, Coeff>& expr);

/// Inverse rewrite through cumulants_from_moments.
template <class Coeff>
LinearCombination<MomentTag, Coeff> to_moments(const LinearCombination<CumulantTag, Coeff>& expr);

/// Finite-support distribution of a d-dimensional vector with exact rational
/// support points and probabilities.
class FiniteDistribution {
 public:
  /// Probabilities must be non-negative and sum to exactly 1; all points must
  /// share one dimension. Throws std::invalid_argument otherwise.
  FiniteDistribution(std::vector<std::vector<mpq_class>> points, std::vector<mpq_class> probabilities);

  [[nodiscard]] int dimension() const { return dimension_; }
  [[nodiscard]] std::size_t support_size() const { return points_.size(); }
  [[nodiscard]] const std::vector<std::vector<mpq_class>>& points() const { return points_; }
  [[nodiscard]] const std::vector<mpq_class>& probabilities() const { return probs_; }

  /// <x_{c1} x_{c2} ...> for the given coordinate indices.
  [[nodiscard]] mpq_class moment(std::span<const int> coordinates) const;

  /// Distribution of X + Y for independent X ~ *this, Y ~ other.
  [[nodiscard]] FiniteDistribution independent_sum(const FiniteDistribution& other) const;
  /// Distribution of (X, Y) for independent X ~ *this, Y ~ other.
  [[nodiscard]] FiniteDistribution independent_join(const FiniteDistribution& other) const;
  /// Applies x_c -> scale * x_c + shift to one coordinate.
  [[nodiscard]] FiniteDistribution affine(int coordinate, const mpq_class& scale, const mpq_class& shift) const;

 private:
  std::vector<std::vector<mpq_class>> points_;
  std::vector<mpq_class> probs_;
  int dimension_ = 0;
};

/// Exact joint cumulant of the coordinates `slots` (repeats allowed).
/// Throws std::out_of_range when a slot exceeds the dimension or |slots| > 8.
mpq_class exact_cumulant(const FiniteDistribution& dist, std::span<const int> slots);

/// Evaluates a moment expression whose labels are coordinate indices.
mpq_class evaluate_moments(const MomentExpr& expr, const FiniteDistribution& dist);

/// Univariate cumulants C_1..C_N from raw moments M_1..M_N via
/// C_N = M_N - sum_{nu=1}^{N-1} binom(N-1, nu-1) C_nu M_{N-nu}.
std::vector<mpq_class> smith_univariate_cumulants(std::span<const mpq_class> moments);

// ---------------------------------------------------------------------------

namespace detail {
inline Polynomial scale_coefficient(const Polynomial& c, const mpq_class& f) {
  if (f.get_den() != 1) throw std::logic_error("non-integer conversion coefficient on a polynomial");
  return c * f.get_num();
}
inline RationalFn scale_coefficient(const RationalFn& c, const mpq_class& f) { return c * RationalFn(f); }
inline mpq_class scale_coefficient(const mpq_class& c, const mpq_class& f) { return c * f; }

template <class FromTag, class ToTag, class Coeff, class Expand>
LinearCombination<ToTag, Coeff> rewrite_factors(const LinearCombination<FromTag, Coeff>& expr, Expand expand) {
  using Out = LinearCombination<ToTag, Coeff>;
  using Rational = LinearCombination<ToTag, mpq_class>;
  Out result;
  for (const auto& [product, coeff] : expr.terms()) {
    Rational expanded = Rational::single(Product<ToTag>(), mpq_class(1));
    for (const auto& block : product.blocks()) expanded = expanded * expand(block);
    for (const auto& [k, f] : expanded.terms()) result.add(k, scale_coefficient(coeff, f));
  }
  return result;
}
}  // namespace detail

template <class Coeff>
LinearCombination<CumulantTag, Coeff> to_cumulants(const LinearCombination<MomentTag, Coeff>& expr) {
  return detail::rewrite_factors<MomentTag, CumulantTag>(
      expr, [](const Block& b) -> const CumulantExpr& { return moments_from_cumulants(b); });
}

template <class Coeff>
LinearCombination<MomentTag, Coeff> to_moments(const LinearCombination<CumulantTag, Coeff>& expr) {
  return detail::rewrite_factors<CumulantTag, MomentTag>(
      expr, [](const Block& b) -> const MomentExpr& { return cumulants_from_moments(b); });
}

}  // namespace cumulants
