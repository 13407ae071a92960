#pragma once

#include <complex>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cumulants/derivation.hpp"
#include "cumulants/errors.hpp"

namespace cumulants {

/// One named column of samples. Real columns leave `im` empty.
struct Column {
  std::string name;
  std::vector<double> re;
  std::vector<double> im;

  [[nodiscard]] bool is_complex() const { return !im.empty(); }
};

/// m samples of d variables. Construction validates shape and finiteness and
/// throws DataError naming the offending row and column.
class SampleBatch {
 public:
  explicit SampleBatch(std::vector<Column> columns);
  /// Convenience for real data: one vector per column.
  SampleBatch(const std::vector<std::string>& names, const std::vector<std::vector<double>>& columns);

  [[nodiscard]] long rows() const { return rows_; }
  [[nodiscard]] std::size_t width() const { return columns_.size(); }
  [[nodiscard]] const std::vector<Column>& columns() const { return columns_; }
  [[nodiscard]] const Column& column(std::string_view name) const;
  [[nodiscard]] bool has_column(std::string_view name) const;
  [[nodiscard]] bool any_complex() const;

 private:
  std::vector<Column> columns_;
  long rows_ = 0;
};

/// Variable name of a spec (without '*') -> column name. Unlisted variables
/// bind to the column of the same name.
using Binding = std::map<std::string, std::string>;

/// Value of the estimator on one batch. Starred variables read the complex
/// conjugate of their base column. Every distinct mean is accumulated in one
/// pass with compensated summation; coefficients are evaluated exactly at m
/// and rounded once. Throws DataError when m < spec.min_m and
/// std::invalid_argument when a variable has no column.
std::complex<double> evaluate(const EstimatorSpec& spec, const SampleBatch& batch, const Binding& binding = {});

/// Complex-variable registry estimators on explicit a and b columns
/// (c3cd, c4ca, c4cb, c4cc).
std::complex<double> evaluate_complex(std::string_view name, std::span<const std::complex<double>> a,
                                      std::span<const std::complex<double>> b);

/// Warnings for zero-mean assumptions the batch visibly contradicts:
/// |sample mean| > 4 sample std / sqrt(m). Never an error; the conditions
/// describe the process, not the batch.
std::vector<std::string> condition_warnings(const EstimatorSpec& spec, const SampleBatch& batch,
                                            const Binding& binding = {});

// ---------------------------------------------------------------------------
// Registry

struct RegistryEntry {
  std::string name;            ///< c2a, c3cgo, c4cb, ...
  std::string row;             ///< condition row letter(s): a, b, ..., ca
  std::vector<std::string> slots;
  ConditionSet conditions;
  bool gauss_optimized = false;
  std::string flags;           ///< property flags: G, nG, V, V*
  std::string summary;

  [[nodiscard]] const EstimatorSpec& spec() const;
  /// m V(c) in cumulants, computed on first use.
  [[nodiscard]] const VarianceExpr& variance() const;
};

const std::vector<RegistryEntry>& registry();
/// Throws UnsupportedEstimatorError for unknown names.
const RegistryEntry& registry_entry(std::string_view name);

struct Selection {
  const RegistryEntry* entry = nullptr;
  /// Registry variable -> requested variable.
  Binding renaming;
};

/// Most reduced registry estimator for C_n(slot_names) whose conditions are
/// all implied by `conditions`, matching the slot pattern up to renaming.
/// With prefer_gauss_optimal the Go variant wins when one exists. Throws
/// UnsupportedEstimatorError when no entry fits.
Selection select_estimator(const std::vector<std::string>& slot_names, const ConditionSet& conditions,
                           bool prefer_gauss_optimal = false);

/// A registry estimator applied to named columns, written "c3c" (variables
/// bound to columns of the same name) or "c3a(x,x,z)" (one column per slot,
/// so repeated columns merge variables). "c4cb(a,a*,a,a*)" evaluates the
/// estimator with b = a.
struct EstimatorRef {
  std::string text;
  const RegistryEntry* entry = nullptr;
  Binding binding;
};

/// Throws UnsupportedEstimatorError for unknown names and
/// std::invalid_argument for a malformed or inconsistent slot list.
EstimatorRef parse_estimator_ref(std::string_view text);

// ---------------------------------------------------------------------------
// Variance and repeated estimates

/// Cumulant values keyed by sorted variable names, e.g. {"x","x"} -> C2(x,x).
using NumericCumulants = std::map<std::vector<std::string>, double>;

struct PlugInVariance {
  double scaled;    ///< m V(c)
  double variance;  ///< V(c)
};

/// Evaluates the registry variance formula of `name` at the given cumulants
/// and sample count. With `gaussian` set, products holding cumulants of order
/// three or higher are dropped first. Throws std::invalid_argument listing
/// every missing cumulant.
PlugInVariance plug_in_variance(std::string_view name, const NumericCumulants& values, long m, bool gaussian = false);
PlugInVariance plug_in_variance(const VarianceExpr& v, const NumericCumulants& values, long m, bool gaussian = false);

/// Moment-based estimate of a joint cumulant: sample moments combined over
/// set partitions. Biased but consistent; meant for plug-in variances. Column
/// names may end in '*' for the conjugate.
std::complex<double> sample_cumulant(const SampleBatch& batch, const std::vector<std::string>& columns);

/// plug_in_variance with every cumulant estimated from the batch by
/// sample_cumulant, labels mapped to columns through `binding`.
PlugInVariance plug_in_variance_from_data(const VarianceExpr& v, const SampleBatch& batch, const Binding& binding,
                                          long m);

struct EstimateResult {
  std::complex<double> value;
  std::string estimator_name;
  long m = 0;
  long batches = 1;
  std::optional<double> empirical_variance;  ///< scatter of the per-batch estimates
  std::optional<double> plug_in_variance;    ///< V(c) from a variance formula
  std::optional<double> standard_error;
};

/// Mean of per-batch estimates. With two or more batches the standard error
/// is sqrt(empirical variance / M); for a single batch it comes from
/// `plug_in` (V(c)) when supplied. Throws DataError for mixed batch sizes.
EstimateResult multi_batch_estimate(const EstimatorSpec& spec, std::span<const SampleBatch> batches,
                                    const Binding& binding = {}, std::optional<double> plug_in = std::nullopt);

}  // namespace cumulants
