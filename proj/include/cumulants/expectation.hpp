#pragma once

#include <string>
#include <vector>

#include "cumulants/products.hpp"

namespace cumulants {

/// Moment expansion of an expected mean-product with coefficients in m.
using ExpectedMoments = LinearCombination<MomentTag, RationalFn>;
/// Same expansion scaled by m^N (N = number of mean factors); the scaled
/// coefficients are integer polynomials.
using ScaledMoments = LinearCombination<MomentTag, Polynomial>;

inline constexpr std::size_t kMaxMeanProductSlots = 8;

/// m^N <mean(p_1) ... mean(p_N)> over m i.i.d. samples, where each p_j is the
/// product of the labels in block j. Built from the helper recursion
///   H(p_1..p_N; m) = sum_{I subset of 2..N} m <p_1 prod_I p_i> H(rest; m-1),
/// with H() = 1. Memoized; safe for concurrent use.
const ScaledMoments& mean_product_numerator(const MeanProductTerm& term);

/// <mean(p_1) ... mean(p_N)> as moment products with rational-in-m
/// coefficients. Coefficients sum to 1. Throws std::out_of_range above 8 slots.
ExpectedMoments expand_mean_product(const MeanProductTerm& term);

/// Matrix linking expected mean-products (rows) to moment products (columns)
/// for one assignment of labels to slots. Rows and columns both run over the
/// distinct label-partitions of the slots in canonical order, which makes the
/// matrix lower-triangular.
struct MultiplicityMatrix {
  std::vector<MeanProductTerm> rows;
  std::vector<MomentProduct> columns;
  std::vector<std::vector<RationalFn>> entries;

  [[nodiscard]] std::size_t size() const { return rows.size(); }
  [[nodiscard]] int column_of(const MomentProduct& p) const;
  /// Product of the diagonal entries.
  [[nodiscard]] RationalFn determinant() const;
};

/// Matrix for `slot_labels` (one label per slot, repeats identify slots).
MultiplicityMatrix multiplicity_matrix(const std::vector<Label>& slot_labels);

/// Distinct-label matrix of the given order (2, 3 or 4): A2, A3, A4.
MultiplicityMatrix build_multiplicity_matrix(int order);

/// Matrix with slots identified by label; e.g. {0,0,0} collapses order 3 to
/// the 3x3 single-variable matrix.
MultiplicityMatrix reduced_matrix(const std::vector<Label>& slot_labels);

/// Solves r A = gamma for the row vector r by back substitution.
std::vector<RationalFn> solve_left(const MultiplicityMatrix& a, const std::vector<RationalFn>& gamma);

}  // namespace cumulants
