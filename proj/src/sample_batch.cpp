#include <algorithm>
#include <cmath>
#include <set>

#include "cumulants/estimators.hpp"

namespace cumulants {

SampleBatch::SampleBatch(std::vector<Column> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw DataError("sample batch has no columns");
  rows_ = static_cast<long>(columns_.front().re.size());
  if (rows_ < 1) throw DataError("sample batch has no rows");
  std::set<std::string> seen;
  for (const auto& c : columns_) {
    if (c.name.empty()) throw DataError("column without a name");
    if (!seen.insert(c.name).second) throw DataError("duplicate column '" + c.name + "'");
    if (static_cast<long>(c.re.size()) != rows_ || (c.is_complex() && static_cast<long>(c.im.size()) != rows_))
      throw DataError("column '" + c.name + "' has " + std::to_string(c.re.size()) + " rows, expected " +
                      std::to_string(rows_));
    for (long i = 0; i < rows_; ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (!std::isfinite(c.re[k]) || (c.is_complex() && !std::isfinite(c.im[k])))
        throw DataError("non-finite value in row " + std::to_string(i + 1) + ", column '" + c.name + "'");
    }
  }
}

SampleBatch::SampleBatch(const std::vector<std::string>& names, const std::vector<std::vector<double>>& columns)
    : SampleBatch([&] {
        if (names.size() != columns.size()) throw DataError("column names and data differ in count");
        std::vector<Column> cols;
        for (std::size_t i = 0; i < names.size(); ++i) cols.push_back({names[i], columns[i], {}});
        return cols;
      }()) {}

const Column& SampleBatch::column(std::string_view name) const {
  for (const auto& c : columns_)
    if (c.name == name) return c;
  throw std::invalid_argument("no column named '" + std::string(name) + "'");
}

bool SampleBatch::has_column(std::string_view name) const {
  return std::any_of(columns_.begin(), columns_.end(), [&](const Column& c) { return c.name == name; });
}

bool SampleBatch::any_complex() const {
  return std::any_of(columns_.begin(), columns_.end(), [](const Column& c) { return c.is_complex(); });
}

}  // namespace cumulants
