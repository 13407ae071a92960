#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cumulants/conversions.hpp"
#include "cumulants/expectation.hpp"

namespace cumulants {

/// Statements about the sampled process, by variable name. A name ending in
/// '*' is the complex conjugate of the name without it; other conjugate
/// pairs can be declared explicitly.
struct ConditionSet {
  std::vector<std::string> zero_mean;
  std::vector<std::pair<std::string, std::string>> zero_cov;
  std::vector<std::pair<std::string, std::string>> conjugate_pairs;

  friend bool operator==(const ConditionSet&, const ConditionSet&) = default;
};

/// Conditions closed under conjugation and resolved against a label table.
/// zero_mean(a) implies zero_mean(a*); zero_cov(a, b) implies
/// zero_cov(a*, b*).
class ResolvedConditions {
 public:
  /// Builds the label table from `names` (first appearance order), adds the
  /// conjugate partner of every complex name, and closes the conditions.
  /// Throws std::invalid_argument for names outside the table and for
  /// zero_cov(u, conj(u)), a variance that cannot vanish.
  ResolvedConditions(const std::vector<std::string>& names, const ConditionSet& conditions);

  [[nodiscard]] const std::vector<std::string>& names() const { return names_; }
  [[nodiscard]] Label label(const std::string& name) const;
  [[nodiscard]] Label conjugate(Label l) const { return conj_[static_cast<std::size_t>(l)]; }
  [[nodiscard]] bool is_complex(Label l) const { return conjugate(l) != l; }
  [[nodiscard]] bool any_complex() const;
  [[nodiscard]] bool zero_mean(Label l) const { return zero_mean_.contains(l); }
  [[nodiscard]] bool zero_cov(Label a, Label b) const { return zero_cov_.contains(std::minmax(a, b)); }

  /// True when the joint cumulant of `block` vanishes by assumption.
  [[nodiscard]] bool cumulant_vanishes(const Block& block) const;
  /// Applies the conditions to a moment product: pair moments of
  /// uncorrelated variables split into mean products, and products holding
  /// the mean of a zero-mean variable vanish (std::nullopt).
  [[nodiscard]] std::optional<MomentProduct> simplify(const MomentProduct& p) const;

 private:
  std::vector<std::string> names_;
  std::vector<Label> conj_;
  std::set<Label> zero_mean_;
  std::set<std::pair<Label, Label>> zero_cov_;
};

using EstimatorTerms = LinearCombination<MeanTag, RationalFn>;
using SymbolicCumulants = LinearCombination<CumulantTag, RationalFn>;
using SymbolicMoments = LinearCombination<MomentTag, RationalFn>;

/// Unbiased estimator of C_n(slots): a linear combination of sample-mean
/// products with coefficients rational in m.
struct EstimatorSpec {
  std::string name;
  std::vector<std::string> labels;
  std::vector<Label> slots;
  ConditionSet conditions;
  EstimatorTerms terms;
  long min_m = 1;

  [[nodiscard]] int order() const { return static_cast<int>(slots.size()); }
  [[nodiscard]] std::vector<std::string> slot_names() const;
  [[nodiscard]] ResolvedConditions resolved() const;
  /// e.g. "m/(m - 1) mean(xy) - m/(m - 1) mean(x) mean(y)".
  [[nodiscard]] std::string formula() const;

  friend bool operator==(const EstimatorSpec&, const EstimatorSpec&) = default;
};

/// Smallest sample count at which every coefficient is finite: one past the
/// largest positive integer pole, and at least 1.
long minimum_sample_count(const EstimatorTerms& terms);

/// Assembles a spec from term coefficients over the given slot names,
/// computing min_m. Labels in `terms` index the resolved label table.
EstimatorSpec make_spec(std::string name, const std::vector<std::string>& slot_names, const ConditionSet& conditions,
                        EstimatorTerms terms);

/// gamma^T A^{-1} mu for the target C_n(slot_names) under `conditions`.
/// The order is the number of slots (2 to 4).
EstimatorSpec derive_estimator(const std::vector<std::string>& slot_names, const ConditionSet& conditions = {},
                               std::string name = "");

struct UnbiasednessReport {
  SymbolicCumulants expectation;  ///< <c> in cumulants, vanishing ones dropped
  SymbolicCumulants residual;     ///< <c> - C_n(slots)
  [[nodiscard]] bool unbiased() const { return residual.is_zero_expr(); }
};

UnbiasednessReport verify_unbiased(const EstimatorSpec& spec);

/// m V(c) (or m Cov(c, d*) for two specs) as a combination of cumulant
/// products over `labels`.
struct VarianceExpr {
  std::vector<std::string> labels;
  SymbolicCumulants scaled;

  /// Every coefficient stays finite as m grows, i.e. V(c) = O(1/m).
  [[nodiscard]] bool consistent() const;
  /// Value when no cumulant factors remain; throws std::logic_error otherwise.
  [[nodiscard]] RationalFn constant() const;
  [[nodiscard]] std::string to_string() const;
};

inline constexpr std::size_t kMaxVarianceSlots = 8;

/// m (<c c*> - <c><c*>). Throws std::out_of_range beyond 8 squared slots.
VarianceExpr symbolic_variance(const EstimatorSpec& spec);
/// m (<c d*> - <c><d*>), labels matched by name; conditions are combined.
VarianceExpr symbolic_covariance(const EstimatorSpec& c, const EstimatorSpec& d);

/// Cumulant values keyed by their (sorted) label-name list, e.g. {"x","x"}.
using CumulantValues = std::map<std::vector<std::string>, RationalFn>;

/// Drops every product holding a cumulant of order three or higher, then
/// replaces the cumulants listed in `values` by their values.
VarianceExpr gaussian_restriction(const VarianceExpr& v, const CumulantValues& values = {});

/// Standard reference process for Gauss optimization: zero means, unit
/// variances and vanishing cross-covariances for the given labels.
CumulantValues unit_gaussian_reference(const std::vector<std::string>& labels);

/// Minimizes the Gaussian variance over every unbiased estimator with the
/// same mean-product structure. Free directions are the gamma components
/// killed by the conditions. Real variables only (std::invalid_argument for
/// conjugates). A degenerate quadratic form yields the minimal-norm
/// minimizer. `reference` defaults to unit_gaussian_reference.
EstimatorSpec gauss_optimize(const std::vector<std::string>& slot_names, const ConditionSet& conditions,
                             std::string name = "", std::optional<CumulantValues> reference = std::nullopt);

/// Gaussian m V of alpha c3b + (1 - alpha) c3c for one zero-mean variable, as
/// a multiple of C2(x,x)^3.
VarianceExpr superposition_variance(const RationalFn& alpha);
/// The alpha minimizing superposition_variance.
RationalFn superposition_argmin();

/// Structured text (JSON) form of a spec; integers are decimal strings so the
/// round trip is exact.
std::string serialize_spec(const EstimatorSpec& spec);
EstimatorSpec parse_spec(const std::string& text);

}  // namespace cumulants
