#include <cmath>

#include "cumulants/partitions.hpp"

#include "cumulants/estimators.hpp"

namespace cumulants {

PlugInVariance plug_in_variance(const VarianceExpr& v, const NumericCumulants& values, long m, bool gaussian) {
  if (m < 1) throw std::invalid_argument("sample count must be positive");
  double scaled = 0;
  std::vector<std::string> missing;
  for (const auto& [product, coeff] : v.scaled.terms()) {
    if (gaussian && std::any_of(product.blocks().begin(), product.blocks().end(),
                                [](const Block& b) { return b.size() >= 3; }))
      continue;
    double term = coeff.to_double(m);
    for (const auto& b : product.blocks()) {
      std::vector<std::string> key;
      for (Label l : b) key.push_back(v.labels[static_cast<std::size_t>(l)]);
      std::sort(key.begin(), key.end());
      const auto it = values.find(key);
      if (it == values.end()) {
        const std::string name = format_cumulant_product(CumulantProduct({b}), v.labels);
        if (std::find(missing.begin(), missing.end(), name) == missing.end()) missing.push_back(name);
        continue;
      }
      term *= it->second;
    }
    scaled += term;
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& n : missing) list += (list.empty() ? "" : ", ") + n;
    throw std::invalid_argument("missing cumulant values: " + list);
  }
  return {scaled, scaled / static_cast<double>(m)};
}

PlugInVariance plug_in_variance(std::string_view name, const NumericCumulants& values, long m, bool gaussian) {
  return plug_in_variance(registry_entry(name).variance(), values, m, gaussian);
}

std::complex<double> sample_cumulant(const SampleBatch& batch, const std::vector<std::string>& columns) {
  const std::size_t n = columns.size();
  if (n == 0 || n > 16) throw std::invalid_argument("cumulant order must be between 1 and 16");
  std::vector<const Column*> cols;
  std::vector<bool> conj;
  for (const auto& c : columns) {
    const bool star = c.size() > 1 && c.back() == '*';
    cols.push_back(&batch.column(star ? c.substr(0, c.size() - 1) : c));
    conj.push_back(star);
  }
  const auto rows = static_cast<std::size_t>(batch.rows());
  const auto value = [&](std::size_t slot, std::size_t r) {
    const Column& c = *cols[slot];
    const double im = c.is_complex() ? c.im[r] : 0.0;
    return std::complex<double>(c.re[r], conj[slot] ? -im : im);
  };
  // Sample moment of every nonempty subset of slots, indexed by bit mask.
  std::vector<std::complex<double>> moment(std::size_t{1} << n);
  for (std::size_t mask = 1; mask < moment.size(); ++mask) {
    std::complex<double> acc = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      std::complex<double> p = 1;
      for (std::size_t s = 0; s < n; ++s)
        if (mask & (std::size_t{1} << s)) p *= value(s, r);
      acc += p;
    }
    moment[mask] = acc / static_cast<double>(rows);
  }
  std::complex<double> total = 0;
  for (const auto& partition : set_partitions(static_cast<int>(n))) {
    const std::size_t k = partition.blocks().size();
    double factor = (k % 2 == 1) ? 1.0 : -1.0;
    for (std::size_t i = 2; i < k; ++i) factor *= static_cast<double>(i);
    std::complex<double> term = factor;
    for (const auto& block : partition.blocks()) {
      std::size_t mask = 0;
      for (int s : block) mask |= std::size_t{1} << s;
      term *= moment[mask];
    }
    total += term;
  }
  return total;
}

PlugInVariance plug_in_variance_from_data(const VarianceExpr& v, const SampleBatch& batch, const Binding& binding,
                                          long m) {
  NumericCumulants values;
  for (const auto& [product, coeff] : v.scaled.terms())
    for (const auto& b : product.blocks()) {
      std::vector<std::string> key, columns;
      for (Label l : b) {
        const std::string& name = v.labels[static_cast<std::size_t>(l)];
        key.push_back(name);
        const bool star = name.size() > 1 && name.back() == '*';
        const std::string base = star ? name.substr(0, name.size() - 1) : name;
        const auto it = binding.find(base);
        columns.push_back((it == binding.end() ? base : it->second) + (star ? "*" : ""));
      }
      std::sort(key.begin(), key.end());
      if (!values.contains(key)) values[key] = sample_cumulant(batch, columns).real();
    }
  return plug_in_variance(v, values, m);
}

EstimateResult multi_batch_estimate(const EstimatorSpec& spec, std::span<const SampleBatch> batches,
                                    const Binding& binding, std::optional<double> plug_in) {
  if (batches.empty()) throw DataError("no sample batches");
  const long m = batches.front().rows();
  std::vector<std::complex<double>> values;
  for (const auto& b : batches) {
    if (b.rows() != m) throw DataError("batches differ in size (" + std::to_string(m) + " vs " +
                                       std::to_string(b.rows()) + ")");
    values.push_back(evaluate(spec, b, binding));
  }
  EstimateResult r;
  r.estimator_name = spec.name;
  r.m = m;
  r.batches = static_cast<long>(values.size());
  for (const auto& v : values) r.value += v;
  r.value /= static_cast<double>(values.size());
  r.plug_in_variance = plug_in;
  if (values.size() >= 2) {
    double ss = 0;
    for (const auto& v : values) ss += std::norm(v - r.value);
    r.empirical_variance = ss / static_cast<double>(values.size() - 1);
    r.standard_error = std::sqrt(*r.empirical_variance / static_cast<double>(values.size()));
  } else if (plug_in) {
    r.standard_error = std::sqrt(*plug_in);
  }
  return r;
}

}  // namespace cumulants
