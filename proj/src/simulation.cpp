#include "cumulants/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "cumulants/conversions.hpp"

namespace cumulants {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::string base_of(const std::string& n) { return n.size() > 1 && n.back() == '*' ? n.substr(0, n.size() - 1) : n; }
bool starred(const std::string& n) { return n.size() > 1 && n.back() == '*'; }

// A process without components, placed at a column offset.
struct Leaf {
  const ProcessSpec* spec;
  int offset;
};

void collect_leaves(const ProcessSpec& p, int& offset, std::vector<Leaf>& out) {
  if (p.kind == ProcessKind::independent_product) {
    for (const auto& c : p.components) collect_leaves(c, offset, out);
    return;
  }
  out.push_back({&p, offset});
  offset += p.width();
}

std::vector<Leaf> leaves_of(const ProcessSpec& p) {
  std::vector<Leaf> out;
  int offset = 0;
  collect_leaves(p, offset, out);
  return out;
}

double finite_cumulative_draw(const ProcessSpec& p, double u, std::size_t& index) {
  double acc = 0;
  for (index = 0; index + 1 < p.probabilities.size(); ++index) {
    acc += p.probabilities[index];
    if (u < acc) break;
  }
  return acc;
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t k = stream;
  std::uint64_t x = seed ^ splitmix64(k);
  for (auto& s : s_) s = splitmix64(x);
}

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  return r * std::cos(theta);
}

long Rng::poisson(double lambda) {
  if (lambda <= 50) {
    double p = std::exp(-lambda);
    double cumulative = p;
    const double u = uniform();
    long k = 0;
    while (u > cumulative && p > 0) {
      ++k;
      p *= lambda / static_cast<double>(k);
      cumulative += p;
    }
    return k;
  }
  // Hoermann's PTRS.
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2);
  while (true) {
    const double u = uniform() - 0.5;
    const double v = uniform();
    const double us = 0.5 - std::abs(u);
    const auto k = static_cast<long>(std::floor((2 * a / us + b) * u + lambda + 0.43));
    if (us >= 0.07 && v <= vr) return k;
    if (k < 0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -lambda + static_cast<double>(k) * loglam - std::lgamma(static_cast<double>(k) + 1))
      return k;
  }
}

void ProcessSpec::validate() const {
  switch (kind) {
    case ProcessKind::gaussian:
    case ProcessKind::complex_gaussian:
      if (!(variance > 0)) throw std::invalid_argument("gaussian process needs variance > 0");
      if (!std::isfinite(mean)) throw std::invalid_argument("gaussian process needs a finite mean");
      if (dimension < 1) throw std::invalid_argument("dimension must be at least 1");
      break;
    case ProcessKind::quasi_poisson:
      if (!(lambda > 0) || !std::isfinite(lambda)) throw std::invalid_argument("quasi_poisson needs lambda > 0");
      if (dimension < 1) throw std::invalid_argument("dimension must be at least 1");
      break;
    case ProcessKind::independent_product:
      if (components.empty()) throw std::invalid_argument("independent_product needs components");
      for (const auto& c : components) c.validate();
      break;
    case ProcessKind::finite: {
      if (points.empty() || points.size() != probabilities.size())
        throw std::invalid_argument("finite process needs one probability per point");
      double total = 0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].size() != points.front().size() || points[i].empty())
          throw std::invalid_argument("finite process points must share one nonzero dimension");
        if (!(probabilities[i] >= 0)) throw std::invalid_argument("negative probability");
        total += probabilities[i];
      }
      if (std::abs(total - 1) > 1e-12) throw std::invalid_argument("probabilities must sum to 1");
      break;
    }
  }
  if (!names.empty() && static_cast<int>(names.size()) != width())
    throw std::invalid_argument("expected " + std::to_string(width()) + " column names");
}

int ProcessSpec::width() const {
  switch (kind) {
    case ProcessKind::independent_product: {
      int w = 0;
      for (const auto& c : components) w += c.width();
      return w;
    }
    case ProcessKind::finite:
      return points.empty() ? 0 : static_cast<int>(points.front().size());
    default:
      return dimension;
  }
}

std::vector<std::string> ProcessSpec::column_names() const {
  if (!names.empty()) return names;
  const int w = width();
  const bool complex = kind == ProcessKind::complex_gaussian;
  std::vector<std::string> out;
  if (w <= 4) {
    static const char* real_names[] = {"x", "y", "z", "w"};
    static const char* complex_names[] = {"a", "b", "c", "d"};
    for (int i = 0; i < w; ++i) out.emplace_back(complex ? complex_names[i] : real_names[i]);
  } else {
    for (int i = 0; i < w; ++i) out.push_back((complex ? "a" : "x") + std::to_string(i + 1));
  }
  return out;
}

ProcessSpec ProcessSpec::unit_gaussian(int dimension, std::uint64_t seed) {
  ProcessSpec p;
  p.dimension = dimension;
  p.seed = seed;
  return p;
}

ProcessSpec ProcessSpec::quasi_poisson_process(double lambda, std::uint64_t seed) {
  ProcessSpec p;
  p.kind = ProcessKind::quasi_poisson;
  p.lambda = lambda;
  p.seed = seed;
  return p;
}

std::string to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::gaussian: return "gaussian";
    case ProcessKind::quasi_poisson: return "quasi_poisson";
    case ProcessKind::independent_product: return "independent_product";
    case ProcessKind::finite: return "finite";
    case ProcessKind::complex_gaussian: return "complex_gaussian";
  }
  return "unknown";
}

ProcessKind parse_process_kind(std::string_view text) {
  if (text == "gaussian") return ProcessKind::gaussian;
  if (text == "quasi_poisson" || text == "poisson") return ProcessKind::quasi_poisson;
  if (text == "independent_product") return ProcessKind::independent_product;
  if (text == "finite") return ProcessKind::finite;
  if (text == "complex_gaussian") return ProcessKind::complex_gaussian;
  throw std::invalid_argument("unknown process kind '" + std::string(text) + "'");
}

SampleBatch sample(const ProcessSpec& proc, long m, std::uint64_t stream) {
  proc.validate();
  if (m < 1) throw std::invalid_argument("sample count must be positive");
  const auto leaves = leaves_of(proc);
  const auto names = proc.column_names();
  std::vector<Column> columns(names.size());
  for (std::size_t c = 0; c < names.size(); ++c) columns[c].name = names[c];
  for (const auto& leaf : leaves)
    for (int j = 0; j < leaf.spec->width(); ++j) {
      auto& col = columns[static_cast<std::size_t>(leaf.offset + j)];
      col.re.resize(static_cast<std::size_t>(m));
      if (leaf.spec->kind == ProcessKind::complex_gaussian) col.im.resize(static_cast<std::size_t>(m));
    }

  Rng rng(proc.seed, stream);
  for (long i = 0; i < m; ++i) {
    const auto r = static_cast<std::size_t>(i);
    for (const auto& leaf : leaves) {
      const ProcessSpec& p = *leaf.spec;
      const auto col = [&](int j) -> Column& { return columns[static_cast<std::size_t>(leaf.offset + j)]; };
      switch (p.kind) {
        case ProcessKind::gaussian: {
          const double sd = std::sqrt(p.variance);
          for (int j = 0; j < p.dimension; ++j) col(j).re[r] = p.mean + sd * rng.normal();
          break;
        }
        case ProcessKind::quasi_poisson: {
          const double scale = 1.0 / std::sqrt(p.lambda);
          for (int j = 0; j < p.dimension; ++j)
            col(j).re[r] = scale * (static_cast<double>(rng.poisson(p.lambda)) - p.lambda);
          break;
        }
        case ProcessKind::complex_gaussian: {
          const double sd = std::sqrt(p.variance / 2);
          for (int j = 0; j < p.dimension; ++j) {
            col(j).re[r] = p.mean + sd * rng.normal();
            col(j).im[r] = sd * rng.normal();
          }
          break;
        }
        case ProcessKind::finite: {
          std::size_t index = 0;
          finite_cumulative_draw(p, rng.uniform(), index);
          for (int j = 0; j < p.width(); ++j) col(j).re[r] = p.points[index][static_cast<std::size_t>(j)];
          break;
        }
        case ProcessKind::independent_product:
          break;
      }
    }
  }
  return SampleBatch(std::move(columns));
}

std::optional<std::complex<double>> population_cumulant(const ProcessSpec& proc,
                                                        const std::vector<std::string>& columns) {
  if (columns.empty()) throw std::invalid_argument("empty cumulant");
  const auto names = proc.column_names();
  const auto leaves = leaves_of(proc);
  struct Slot {
    const Leaf* leaf;
    int local;
    bool conj;
  };
  std::vector<Slot> slots;
  for (const auto& c : columns) {
    const auto it = std::find(names.begin(), names.end(), base_of(c));
    if (it == names.end()) throw std::invalid_argument("process has no column '" + base_of(c) + "'");
    const int index = static_cast<int>(it - names.begin());
    const Leaf* leaf = nullptr;
    for (const auto& l : leaves)
      if (index >= l.offset && index < l.offset + l.spec->width()) leaf = &l;
    slots.push_back({leaf, index - leaf->offset, starred(c)});
  }
  const std::size_t n = slots.size();
  const ProcessSpec& p = *slots.front().leaf->spec;
  const bool same_leaf = std::all_of(slots.begin(), slots.end(), [&](const Slot& s) { return s.leaf == slots.front().leaf; });
  const bool same_column = same_leaf && std::all_of(slots.begin(), slots.end(), [&](const Slot& s) {
                             return s.local == slots.front().local;
                           });
  if (!same_leaf) return std::complex<double>(0);
  if (p.kind == ProcessKind::finite) {
    std::vector<std::vector<mpq_class>> pts;
    std::vector<mpq_class> probs;
    mpq_class total = 0;
    for (std::size_t i = 0; i < p.points.size(); ++i) {
      std::vector<mpq_class> row;
      for (double v : p.points[i]) row.emplace_back(v);
      pts.push_back(std::move(row));
      probs.emplace_back(p.probabilities[i]);
      total += probs.back();
    }
    for (auto& q : probs) q /= total;
    std::vector<int> coords;
    for (const auto& s : slots) coords.push_back(s.local);
    return std::complex<double>(exact_cumulant(FiniteDistribution(std::move(pts), std::move(probs)), coords).get_d());
  }
  if (!same_column) return std::complex<double>(0);
  switch (p.kind) {
    case ProcessKind::gaussian:
      if (n == 1) return std::complex<double>(p.mean);
      return std::complex<double>(n == 2 ? p.variance : 0.0);
    case ProcessKind::quasi_poisson:
      if (n == 1) return std::complex<double>(0);
      return std::complex<double>(std::pow(p.lambda, 1.0 - static_cast<double>(n) / 2));
    case ProcessKind::complex_gaussian:
      if (n == 1) return std::complex<double>(p.mean);
      if (n == 2 && slots[0].conj != slots[1].conj) return std::complex<double>(p.variance);
      return std::complex<double>(0);
    default:
      return std::nullopt;
  }
}

const EstimatorSummary& ExperimentReport::at(std::string_view estimator) const {
  for (const auto& e : estimators)
    if (e.estimator == estimator) return e;
  throw std::out_of_range("no estimator '" + std::string(estimator) + "' in the report");
}

namespace {

std::string bound_column(const std::string& label, const Binding& binding) {
  const std::string b = base_of(label);
  const auto it = binding.find(b);
  const std::string column = it == binding.end() ? b : it->second;
  return starred(label) ? column + "*" : column;
}

std::optional<std::complex<double>> mapped_cumulant(const ProcessSpec& proc, const std::vector<std::string>& labels,
                                                    const Binding& binding) {
  std::vector<std::string> columns;
  for (const auto& l : labels) columns.push_back(bound_column(l, binding));
  return population_cumulant(proc, columns);
}

// True when the process satisfies the estimator's conditions, so its
// variance formula applies.
bool conditions_hold(const ProcessSpec& proc, const EstimatorRef& ref) {
  const auto near_zero = [](const std::optional<std::complex<double>>& v) { return v && std::abs(*v) < 1e-12; };
  for (const auto& z : ref.entry->conditions.zero_mean)
    if (!near_zero(mapped_cumulant(proc, {z}, ref.binding))) return false;
  for (const auto& [u, v] : ref.entry->conditions.zero_cov) {
    if (!near_zero(mapped_cumulant(proc, {u, v}, ref.binding))) return false;
    if (!near_zero(mapped_cumulant(proc, {starred(u) ? base_of(u) : u + "*", starred(v) ? base_of(v) : v + "*"},
                                   ref.binding)))
      return false;
  }
  return true;
}

std::optional<double> theory_scaled(const ProcessSpec& proc, const EstimatorRef& ref, long m) {
  if (!conditions_hold(proc, ref)) return std::nullopt;
  const VarianceExpr& v = ref.entry->variance();
  NumericCumulants values;
  for (const auto& [product, coeff] : v.scaled.terms())
    for (const auto& block : product.blocks()) {
      std::vector<std::string> key;
      for (Label l : block) key.push_back(v.labels[static_cast<std::size_t>(l)]);
      const auto value = mapped_cumulant(proc, key, ref.binding);
      if (!value || std::abs(value->imag()) > 1e-12) return std::nullopt;
      std::sort(key.begin(), key.end());
      values[key] = value->real();
    }
  return plug_in_variance(v, values, m).scaled;
}

}  // namespace

ExperimentReport run_experiment(const ProcessSpec& proc, const std::vector<EstimatorRef>& estimators, long m,
                                long repeats, const ExperimentOptions& options) {
  proc.validate();
  if (estimators.empty()) throw std::invalid_argument("no estimators");
  if (repeats < 1) throw std::invalid_argument("repeat count must be positive");
  for (const auto& e : estimators)
    if (m < e.entry->spec().min_m)
      throw DataError(e.text + " needs at least m = " + std::to_string(e.entry->spec().min_m) + " samples, got " +
                      std::to_string(m));

  const std::size_t count = estimators.size();
  std::vector<std::vector<std::complex<double>>> values(count, std::vector<std::complex<double>>(
                                                                   static_cast<std::size_t>(repeats)));
  std::atomic<long> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto work = [&] {
    try {
      for (long k = next++; k < repeats; k = next++) {
        const SampleBatch batch = sample(proc, m, options.first_stream + static_cast<std::uint64_t>(k));
        for (std::size_t e = 0; e < count; ++e)
          values[e][static_cast<std::size_t>(k)] = evaluate(estimators[e].entry->spec(), batch, estimators[e].binding);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = repeats;
    }
  };
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<long>(threads, repeats));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentReport report{proc, m, repeats, {}};
  const auto M = static_cast<double>(repeats);
  for (std::size_t e = 0; e < count; ++e) {
    EstimatorSummary s;
    s.estimator = estimators[e].text;
    s.estimates = std::move(values[e]);
    for (const auto& v : s.estimates) s.mean += v;
    s.mean /= M;
    if (repeats >= 2) {
      double ss = 0;
      for (const auto& v : s.estimates) ss += std::norm(v - s.mean);
      s.variance = ss / (M - 1);
      s.variance_standard_error = s.variance * std::sqrt(2.0 / (M - 1));
    }
    s.scaled_variance = static_cast<double>(m) * s.variance;
    s.mean_standard_error = std::sqrt(s.variance / M);
    s.target = mapped_cumulant(proc, estimators[e].entry->slots, estimators[e].binding);
    if (options.theory) s.theory_scaled_variance = theory_scaled(proc, estimators[e], m);
    report.estimators.push_back(std::move(s));
  }
  return report;
}

std::vector<ScanPoint> consistency_scan(const ProcessSpec& proc, const EstimatorRef& estimator,
                                        const std::vector<long>& grid, long repeats,
                                        const ExperimentOptions& options) {
  if (!std::is_sorted(grid.begin(), grid.end())) throw std::invalid_argument("m grid must be ascending");
  std::vector<ScanPoint> out;
  ExperimentOptions o = options;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    o.first_stream = options.first_stream + g * static_cast<std::uint64_t>(repeats);
    const ExperimentReport r = run_experiment(proc, {estimator}, grid[g], repeats, o);
    const EstimatorSummary& s = r.estimators.front();
    out.push_back({grid[g], s.variance, s.scaled_variance, s.variance_standard_error, s.theory_scaled_variance});
  }
  return out;
}

}  // namespace cumulants
