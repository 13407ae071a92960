#include <cmath>
#include <map>

#include "cumulants/estimators.hpp"

namespace cumulants {
namespace {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    comp_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
    sum_ = t;
  }
  [[nodiscard]] double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0;
  double comp_ = 0;
};

struct BoundLabel {
  const Column* column;
  bool conjugate;
};

std::vector<BoundLabel> bind_labels(const EstimatorSpec& spec, const SampleBatch& batch, const Binding& binding) {
  std::map<std::string, std::string> explicit_conj;
  for (const auto& [u, v] : spec.conditions.conjugate_pairs) explicit_conj[v] = u;
  std::vector<BoundLabel> out;
  for (const auto& name : spec.labels) {
    std::string base = name;
    bool conj = false;
    if (auto it = explicit_conj.find(name); it != explicit_conj.end()) {
      base = it->second;
      conj = true;
    } else if (name.size() > 1 && name.back() == '*') {
      base = name.substr(0, name.size() - 1);
      conj = true;
    }
    const auto it = binding.find(base);
    const std::string& column = it == binding.end() ? base : it->second;
    if (!batch.has_column(column))
      throw std::invalid_argument("variable '" + base + "' of " + (spec.name.empty() ? "the estimator" : spec.name) +
                                  " has no column '" + column + "'");
    out.push_back({&batch.column(column), conj});
  }
  return out;
}

void check_size(const EstimatorSpec& spec, long m) {
  if (m < spec.min_m)
    throw DataError((spec.name.empty() ? std::string("estimator") : spec.name) + " needs at least m = " +
                    std::to_string(spec.min_m) + " samples, got " + std::to_string(m));
}

}  // namespace

std::complex<double> evaluate(const EstimatorSpec& spec, const SampleBatch& batch, const Binding& binding) {
  const long m = batch.rows();
  check_size(spec, m);
  const auto bound = bind_labels(spec, batch, binding);

  std::map<Block, std::size_t> index;
  std::vector<const Block*> blocks;
  for (const auto& [term, coeff] : spec.terms.terms())
    for (const auto& b : term.blocks())
      if (index.try_emplace(b, blocks.size()).second) blocks.push_back(&index.find(b)->first);

  bool complex = false;
  for (const auto& [term, coeff] : spec.terms.terms())
    for (const auto& b : term.blocks())
      for (Label l : b) complex = complex || bound[static_cast<std::size_t>(l)].column->is_complex();

  std::vector<std::complex<double>> means(blocks.size());
  if (!complex) {
    std::vector<CompensatedSum> acc(blocks.size());
    for (long i = 0; i < m; ++i) {
      const auto r = static_cast<std::size_t>(i);
      for (std::size_t k = 0; k < blocks.size(); ++k) {
        double p = 1;
        for (Label l : *blocks[k]) p *= bound[static_cast<std::size_t>(l)].column->re[r];
        acc[k].add(p);
      }
    }
    for (std::size_t k = 0; k < blocks.size(); ++k) means[k] = acc[k].value() / static_cast<double>(m);
  } else {
    std::vector<CompensatedSum> re(blocks.size()), im(blocks.size());
    for (long i = 0; i < m; ++i) {
      const auto r = static_cast<std::size_t>(i);
      for (std::size_t k = 0; k < blocks.size(); ++k) {
        std::complex<double> p = 1;
        for (Label l : *blocks[k]) {
          const auto& b = bound[static_cast<std::size_t>(l)];
          const double imag = b.column->is_complex() ? b.column->im[r] : 0.0;
          p *= std::complex<double>(b.column->re[r], b.conjugate ? -imag : imag);
        }
        re[k].add(p.real());
        im[k].add(p.imag());
      }
    }
    for (std::size_t k = 0; k < blocks.size(); ++k)
      means[k] = std::complex<double>(re[k].value(), im[k].value()) / static_cast<double>(m);
  }

  std::complex<double> value = 0;
  for (const auto& [term, coeff] : spec.terms.terms()) {
    std::complex<double> product = coeff.to_double(m);
    for (const auto& b : term.blocks()) product *= means[index.at(b)];
    value += product;
  }
  return value;
}

std::complex<double> evaluate_complex(std::string_view name, std::span<const std::complex<double>> a,
                                      std::span<const std::complex<double>> b) {
  if (name != "c3cd" && name != "c4ca" && name != "c4cb" && name != "c4cc")
    throw UnsupportedEstimatorError("'" + std::string(name) + "' is not a two-variable complex estimator");
  if (a.size() != b.size()) throw DataError("columns a and b differ in length");
  Column ca{"a", {}, {}}, cb{"b", {}, {}};
  for (const auto& v : a) {
    ca.re.push_back(v.real());
    ca.im.push_back(v.imag());
  }
  for (const auto& v : b) {
    cb.re.push_back(v.real());
    cb.im.push_back(v.imag());
  }
  return evaluate(registry_entry(name).spec(), SampleBatch({ca, cb}));
}

std::vector<std::string> condition_warnings(const EstimatorSpec& spec, const SampleBatch& batch,
                                            const Binding& binding) {
  std::vector<std::string> out;
  const auto bound = bind_labels(spec, batch, binding);
  const ResolvedConditions rc = spec.resolved();
  const double m = static_cast<double>(batch.rows());
  if (batch.rows() < 2) return out;
  for (std::size_t l = 0; l < spec.labels.size(); ++l) {
    if (!rc.zero_mean(static_cast<Label>(l)) || bound[l].conjugate) continue;
    const Column& c = *bound[l].column;
    std::complex<double> mean = 0;
    for (std::size_t i = 0; i < c.re.size(); ++i) mean += std::complex<double>(c.re[i], c.is_complex() ? c.im[i] : 0);
    mean /= m;
    double ss = 0;
    for (std::size_t i = 0; i < c.re.size(); ++i)
      ss += std::norm(std::complex<double>(c.re[i], c.is_complex() ? c.im[i] : 0) - mean);
    const double sd = std::sqrt(ss / (m - 1));
    if (std::abs(mean) > 4 * sd / std::sqrt(m))
      out.push_back("column '" + c.name + "' is assumed zero-mean but its sample mean " + std::to_string(std::abs(mean)) +
                    " exceeds 4 standard errors (" + std::to_string(4 * sd / std::sqrt(m)) + ")");
  }
  return out;
}

}  // namespace cumulants
