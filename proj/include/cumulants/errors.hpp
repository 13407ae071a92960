#pragma once

#include <stdexcept>
#include <string>

namespace cumulants {

/// Sample data that cannot be used: non-finite cells, ragged columns, too
/// few rows for an estimator.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The estimator registry has no formula for the requested cumulant and
/// conditions. The symbolic engine (derive_estimator) can still build one.
class UnsupportedEstimatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cumulants
