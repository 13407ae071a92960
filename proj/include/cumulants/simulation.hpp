#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cumulants/estimators.hpp"

namespace cumulants {

/// xoshiro256** seeded through splitmix64. Stream k of seed s is an
/// independent generator, so repeat k of an experiment draws the same
/// numbers whichever thread runs it.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal by Box-Muller; the second variate is cached.
  double normal();
  /// Inversion for lambda <= 50, transformed rejection (PTRS) above.
  long poisson(double lambda);

 private:
  std::uint64_t s_[4];
  std::optional<double> spare_;
};

enum class ProcessKind { gaussian, quasi_poisson, independent_product, finite, complex_gaussian };

/// An i.i.d. random process producing `dimension` columns per draw.
///  - gaussian: independent normal columns with `mean` and `variance`.
///  - quasi_poisson: x = (h - lambda) / sqrt(lambda), h ~ Poisson(lambda);
///    zero mean, unit variance, C_n = lambda^(1 - n/2).
///  - independent_product: the columns of `components`, drawn independently.
///  - finite: joint draws from `points` with `probabilities`.
///  - complex_gaussian: circular complex normal columns with mean `mean`
///    and E|a - <a>|^2 = `variance`.
struct ProcessSpec {
  ProcessKind kind = ProcessKind::gaussian;
  int dimension = 1;
  double mean = 0;
  double variance = 1;
  double lambda = 25;
  std::vector<ProcessSpec> components;
  std::vector<std::vector<double>> points;
  std::vector<double> probabilities;
  /// Column names; defaults to x, y, z, w (a, b, ... for complex data) and
  /// x1, x2, ... beyond four.
  std::vector<std::string> names;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument for invalid parameters.
  void validate() const;
  [[nodiscard]] int width() const;
  [[nodiscard]] std::vector<std::string> column_names() const;

  static ProcessSpec unit_gaussian(int dimension = 1, std::uint64_t seed = 0);
  static ProcessSpec quasi_poisson_process(double lambda, std::uint64_t seed = 0);
};

std::string to_string(ProcessKind kind);
/// Accepts the names printed by to_string plus "poisson".
ProcessKind parse_process_kind(std::string_view text);

/// m draws from stream `stream` of the process seed.
SampleBatch sample(const ProcessSpec& proc, long m, std::uint64_t stream = 0);

/// Population joint cumulant of the given columns ('*' marks a conjugate).
/// std::nullopt when the process does not determine it in closed form.
std::optional<std::complex<double>> population_cumulant(const ProcessSpec& proc,
                                                        const std::vector<std::string>& columns);

struct EstimatorSummary {
  std::string estimator;
  std::vector<std::complex<double>> estimates;
  std::complex<double> mean;
  double variance = 0;         ///< empirical, (M - 1) denominator
  double scaled_variance = 0;  ///< m times the above
  double mean_standard_error = 0;
  /// sqrt(2 / (M - 1)) V: standard error of the variance for a near-Gaussian
  /// scatter.
  double variance_standard_error = 0;
  std::optional<std::complex<double>> target;  ///< population cumulant
  std::optional<double> theory_scaled_variance;  ///< m V(c) at the population cumulants
};

struct ExperimentReport {
  ProcessSpec process;
  long m = 0;
  long repeats = 0;
  std::vector<EstimatorSummary> estimators;

  [[nodiscard]] const EstimatorSummary& at(std::string_view estimator) const;
};

struct ExperimentOptions {
  /// 0 uses the hardware concurrency.
  unsigned threads = 0;
  /// Stream index of repeat 0; repeat k uses first_stream + k.
  std::uint64_t first_stream = 0;
  /// Compute the theory overlay from the registry variance formulas.
  bool theory = true;
};

/// M independent batches of m draws, every estimator evaluated on each.
/// The result depends only on the arguments, not on the thread count.
ExperimentReport run_experiment(const ProcessSpec& proc, const std::vector<EstimatorRef>& estimators, long m,
                                long repeats, const ExperimentOptions& options = {});

struct ScanPoint {
  long m = 0;
  double variance = 0;
  double scaled_variance = 0;
  double variance_standard_error = 0;
  std::optional<double> theory_scaled_variance;
};

/// Scaled empirical variance of one estimator across an ascending m grid.
/// Each grid point draws fresh streams.
std::vector<ScanPoint> consistency_scan(const ProcessSpec& proc, const EstimatorRef& estimator,
                                        const std::vector<long>& grid, long repeats,
                                        const ExperimentOptions& options = {});

}  // namespace cumulants
