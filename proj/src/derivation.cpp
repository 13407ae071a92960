#include "cumulants/derivation.hpp"

#include <algorithm>
#include <sstream>

namespace cumulants {
namespace {

std::string strip_star(const std::string& name) { return name.substr(0, name.size() - 1); }
bool starred(const std::string& name) { return name.size() > 1 && name.back() == '*'; }

void push_unique(std::vector<std::string>& v, const std::string& s) {
  if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

bool leading_negative(const RationalFn& r) { return !r.is_zero() && r.numerator().leading() < 0; }

// Gaussian elimination over the rational-function field. Free unknowns are
// set to zero; std::nullopt when the system is inconsistent.
std::optional<std::vector<RationalFn>> solve_linear(std::vector<std::vector<RationalFn>> a, std::vector<RationalFn> b,
                                                    std::size_t* rank_out = nullptr) {
  const std::size_t rows = a.size();
  const std::size_t cols = rows ? a.front().size() : 0;
  std::vector<std::size_t> pivot_col;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && a[p][c].is_zero()) ++p;
    if (p == rows) continue;
    std::swap(a[p], a[r]);
    std::swap(b[p], b[r]);
    const RationalFn inv = RationalFn(1) / a[r][c];
    for (auto& e : a[r]) e *= inv;
    b[r] *= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || a[i][c].is_zero()) continue;
      const RationalFn f = a[i][c];
      for (std::size_t j = c; j < cols; ++j)
        if (!a[r][j].is_zero()) a[i][j] -= f * a[r][j];
      b[i] -= f * b[r];
    }
    pivot_col.push_back(c);
    ++r;
  }
  if (rank_out) *rank_out = r;
  for (std::size_t i = r; i < rows; ++i)
    if (!b[i].is_zero()) return std::nullopt;
  std::vector<RationalFn> x(cols);
  for (std::size_t i = 0; i < r; ++i) x[pivot_col[i]] = b[i];
  return x;
}

std::vector<RationalFn> gamma_for(const MultiplicityMatrix& a, const MomentExpr& target,
                                  const ResolvedConditions& rc) {
  std::vector<RationalFn> gamma(a.size());
  for (const auto& [product, coeff] : target.terms()) {
    const auto simplified = rc.simplify(product);
    if (!simplified) continue;
    const int j = a.column_of(*simplified);
    if (j < 0) throw std::logic_error("target moment product outside the matrix columns");
    gamma[static_cast<std::size_t>(j)] += RationalFn(coeff);
  }
  return gamma;
}

EstimatorTerms terms_from(const MultiplicityMatrix& a, const std::vector<RationalFn>& gamma) {
  const auto r = solve_left(a, gamma);
  EstimatorTerms terms;
  for (std::size_t j = 0; j < r.size(); ++j) terms.add(a.rows[j], r[j]);
  return terms;
}

std::vector<Label> slot_labels(const ResolvedConditions& rc, const std::vector<std::string>& slot_names) {
  std::vector<Label> out;
  for (const auto& n : slot_names) out.push_back(rc.label(n));
  return out;
}

MeanProductTerm relabel(const MeanProductTerm& t, const std::vector<Label>& map) {
  std::vector<Block> blocks;
  for (const auto& b : t.blocks()) {
    Block nb;
    for (Label l : b) nb.push_back(map[static_cast<std::size_t>(l)]);
    blocks.push_back(make_block(std::move(nb)));
  }
  return MeanProductTerm(std::move(blocks));
}

SymbolicMoments expected_moments(const EstimatorTerms& terms) {
  SymbolicMoments out;
  for (const auto& [term, coeff] : terms.terms()) {
    const ExpectedMoments e = expand_mean_product(term);
    for (const auto& [p, c] : e.terms()) out.add(p, c * coeff);
  }
  return out;
}

SymbolicCumulants drop_vanishing(const SymbolicCumulants& e, const ResolvedConditions& rc) {
  return e.filtered([&](const CumulantProduct& p) {
    return std::none_of(p.blocks().begin(), p.blocks().end(), [&](const Block& b) { return rc.cumulant_vanishes(b); });
  });
}

std::string format_coefficient_term(const RationalFn& c, const std::string& body, bool first) {
  std::string out;
  RationalFn mag = c;
  if (leading_negative(c)) {
    out += first ? "-" : " - ";
    mag = -c;
  } else if (!first) {
    out += " + ";
  }
  if (mag == RationalFn(1)) return out + (body.empty() ? "1" : body);
  out += mag.to_pretty_string();
  if (!body.empty()) out += " " + body;
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

ResolvedConditions::ResolvedConditions(const std::vector<std::string>& names, const ConditionSet& conditions) {
  for (const auto& n : names) {
    if (n.empty()) throw std::invalid_argument("empty variable name");
    push_unique(names_, n);
  }
  for (const auto& [u, v] : conditions.conjugate_pairs) {
    const bool known = std::find(names_.begin(), names_.end(), u) != names_.end() ||
                       std::find(names_.begin(), names_.end(), v) != names_.end();
    if (!known) throw std::invalid_argument("conjugate pair (" + u + ", " + v + ") names no variable in use");
    push_unique(names_, u);
    push_unique(names_, v);
  }
  // A condition may name the conjugate of a variable in use, e.g. C2(a, b*)
  // for an estimator over a, a*, b.
  auto admit = [&](const std::string& n) {
    if (starred(n) && std::find(names_.begin(), names_.end(), strip_star(n)) != names_.end()) push_unique(names_, n);
  };
  for (const auto& n : conditions.zero_mean) admit(n);
  for (const auto& [u, v] : conditions.zero_cov) {
    admit(u);
    admit(v);
  }
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (starred(names_[i])) push_unique(names_, strip_star(names_[i]));

  conj_.resize(names_.size());
  for (std::size_t i = 0; i < names_.size(); ++i) conj_[i] = static_cast<Label>(i);
  auto pair_up = [&](Label a, Label b) {
    conj_[static_cast<std::size_t>(a)] = b;
    conj_[static_cast<std::size_t>(b)] = a;
  };
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (starred(names_[i])) pair_up(static_cast<Label>(i), label(strip_star(names_[i])));
  for (const auto& [u, v] : conditions.conjugate_pairs) pair_up(label(u), label(v));

  for (const auto& n : conditions.zero_mean) {
    const Label l = label(n);
    zero_mean_.insert(l);
    zero_mean_.insert(conjugate(l));
  }
  for (const auto& [u, v] : conditions.zero_cov) {
    const Label a = label(u), b = label(v);
    if (b == conjugate(a))
      throw std::invalid_argument("C2(" + u + "," + v + ") is a variance and cannot be declared zero");
    zero_cov_.insert(std::minmax(a, b));
    zero_cov_.insert(std::minmax(conjugate(a), conjugate(b)));
  }
}

Label ResolvedConditions::label(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw std::invalid_argument("condition references unknown variable '" + name + "'");
  return static_cast<Label>(it - names_.begin());
}

bool ResolvedConditions::any_complex() const {
  for (std::size_t i = 0; i < conj_.size(); ++i)
    if (conj_[i] != static_cast<Label>(i)) return true;
  return false;
}

bool ResolvedConditions::cumulant_vanishes(const Block& block) const {
  if (block.size() == 1) return zero_mean(block[0]);
  if (block.size() == 2) return zero_cov(block[0], block[1]);
  return false;
}

std::optional<MomentProduct> ResolvedConditions::simplify(const MomentProduct& p) const {
  std::vector<Block> blocks;
  for (const auto& b : p.blocks()) {
    if (b.size() == 2 && zero_cov(b[0], b[1])) {
      blocks.push_back({b[0]});
      blocks.push_back({b[1]});
    } else {
      blocks.push_back(b);
    }
  }
  for (const auto& b : blocks)
    if (b.size() == 1 && zero_mean(b[0])) return std::nullopt;
  return MomentProduct(std::move(blocks));
}

// ---------------------------------------------------------------------------

std::vector<std::string> EstimatorSpec::slot_names() const {
  std::vector<std::string> out;
  for (Label l : slots) out.push_back(labels[static_cast<std::size_t>(l)]);
  return out;
}

ResolvedConditions EstimatorSpec::resolved() const { return {labels, conditions}; }

std::string EstimatorSpec::formula() const {
  std::string out;
  bool first = true;
  for (const auto& [term, coeff] : terms.terms()) {
    out += format_coefficient_term(coeff, format_mean_product(term, labels), first);
    first = false;
  }
  return first ? "0" : out;
}

long minimum_sample_count(const EstimatorTerms& terms) {
  long min_m = 1;
  for (const auto& [term, coeff] : terms.terms())
    for (long pole : coeff.positive_integer_poles()) min_m = std::max(min_m, pole + 1);
  return min_m;
}

EstimatorSpec make_spec(std::string name, const std::vector<std::string>& slot_names, const ConditionSet& conditions,
                        EstimatorTerms terms) {
  const ResolvedConditions rc(slot_names, conditions);
  EstimatorSpec spec;
  spec.name = std::move(name);
  spec.labels = rc.names();
  spec.slots = slot_labels(rc, slot_names);
  spec.conditions = conditions;
  spec.min_m = minimum_sample_count(terms);
  spec.terms = std::move(terms);
  return spec;
}

EstimatorSpec derive_estimator(const std::vector<std::string>& slot_names, const ConditionSet& conditions,
                               std::string name) {
  if (slot_names.size() < 2 || slot_names.size() > 4)
    throw std::out_of_range("estimators are derived for orders 2 to 4");
  const ResolvedConditions rc(slot_names, conditions);
  const auto slots = slot_labels(rc, slot_names);
  const auto a = multiplicity_matrix(slots);
  const auto gamma = gamma_for(a, cumulants_from_moments(slots), rc);
  return make_spec(std::move(name), slot_names, conditions, terms_from(a, gamma));
}

UnbiasednessReport verify_unbiased(const EstimatorSpec& spec) {
  const ResolvedConditions rc = spec.resolved();
  UnbiasednessReport report;
  report.expectation = drop_vanishing(to_cumulants(expected_moments(spec.terms)), rc);
  SymbolicCumulants target;
  if (!rc.cumulant_vanishes(make_block(spec.slots))) target.add(CumulantProduct({spec.slots}), RationalFn(1));
  report.residual = report.expectation;
  report.residual -= target;
  return report;
}

// ---------------------------------------------------------------------------

bool VarianceExpr::consistent() const {
  return std::all_of(scaled.terms().begin(), scaled.terms().end(),
                     [](const auto& t) { return t.second.bounded_at_infinity(); });
}

RationalFn VarianceExpr::constant() const {
  if (scaled.is_zero_expr()) return 0;
  if (scaled.size() != 1 || !scaled.terms().begin()->first.empty())
    throw std::logic_error("variance still depends on cumulants: " + to_string());
  return scaled.terms().begin()->second;
}

std::string VarianceExpr::to_string() const {
  std::string out;
  bool first = true;
  for (const auto& [product, coeff] : scaled.terms()) {
    out += format_coefficient_term(coeff, product.empty() ? "" : format_cumulant_product(product, labels), first);
    first = false;
  }
  return first ? "0" : out;
}

VarianceExpr symbolic_covariance(const EstimatorSpec& c, const EstimatorSpec& d) {
  std::vector<std::string> names = c.labels;
  for (const auto& n : d.labels) push_unique(names, n);
  ConditionSet merged = c.conditions;
  merged.zero_mean.insert(merged.zero_mean.end(), d.conditions.zero_mean.begin(), d.conditions.zero_mean.end());
  merged.zero_cov.insert(merged.zero_cov.end(), d.conditions.zero_cov.begin(), d.conditions.zero_cov.end());
  merged.conjugate_pairs.insert(merged.conjugate_pairs.end(), d.conditions.conjugate_pairs.begin(),
                                d.conditions.conjugate_pairs.end());
  const ResolvedConditions rc(names, merged);

  std::size_t c_slots = 0, d_slots = 0;
  for (const auto& [t, coeff] : c.terms.terms()) c_slots = std::max(c_slots, t.slot_count());
  for (const auto& [t, coeff] : d.terms.terms()) d_slots = std::max(d_slots, t.slot_count());
  if (c_slots + d_slots > kMaxVarianceSlots)
    throw std::out_of_range("variance needs " + std::to_string(c_slots + d_slots) + " slots; the limit is " +
                            std::to_string(kMaxVarianceSlots));

  // d's labels re-indexed into the merged table, then conjugated.
  std::vector<Label> d_conj;
  for (const auto& n : d.labels) d_conj.push_back(rc.conjugate(rc.label(n)));
  EstimatorTerms d_bar;
  for (const auto& [t, coeff] : d.terms.terms()) d_bar.add(relabel(t, d_conj), coeff);

  SymbolicMoments second;
  for (const auto& [tc, cc] : c.terms.terms())
    for (const auto& [td, cd] : d_bar.terms()) {
      const RationalFn weight = cc * cd;
      const ExpectedMoments e = expand_mean_product(tc.times(td));
      for (const auto& [p, coeff] : e.terms()) second.add(p, coeff * weight);
    }
  second -= expected_moments(c.terms) * expected_moments(d_bar);

  const SymbolicMoments reduced = second.filtered([&](const MomentProduct& p) {
    return std::none_of(p.blocks().begin(), p.blocks().end(),
                        [&](const Block& b) { return b.size() == 1 && rc.zero_mean(b[0]); });
  });
  SymbolicCumulants scaled = drop_vanishing(to_cumulants(reduced), rc);
  scaled *= RationalFn::m();
  return {rc.names(), std::move(scaled)};
}

VarianceExpr symbolic_variance(const EstimatorSpec& spec) { return symbolic_covariance(spec, spec); }

VarianceExpr gaussian_restriction(const VarianceExpr& v, const CumulantValues& values) {
  VarianceExpr out{v.labels, {}};
  for (const auto& [product, coeff] : v.scaled.terms()) {
    if (std::any_of(product.blocks().begin(), product.blocks().end(), [](const Block& b) { return b.size() >= 3; }))
      continue;
    RationalFn c = coeff;
    std::vector<Block> kept;
    for (const auto& b : product.blocks()) {
      std::vector<std::string> key;
      for (Label l : b) key.push_back(v.labels[static_cast<std::size_t>(l)]);
      std::sort(key.begin(), key.end());
      auto it = values.find(key);
      if (it == values.end()) {
        kept.push_back(b);
      } else {
        c *= it->second;
      }
    }
    out.scaled.add(CumulantProduct(std::move(kept)), c);
  }
  return out;
}

CumulantValues unit_gaussian_reference(const std::vector<std::string>& labels) {
  CumulantValues values;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    values[{labels[i]}] = 0;
    values[{labels[i], labels[i]}] = 1;
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      std::vector<std::string> key{labels[i], labels[j]};
      std::sort(key.begin(), key.end());
      values[key] = 0;
    }
  }
  return values;
}

EstimatorSpec gauss_optimize(const std::vector<std::string>& slot_names, const ConditionSet& conditions,
                             std::string name, std::optional<CumulantValues> reference) {
  if (slot_names.size() < 2 || slot_names.size() > 4)
    throw std::out_of_range("estimators are derived for orders 2 to 4");
  const ResolvedConditions rc(slot_names, conditions);
  if (rc.any_complex()) throw std::invalid_argument("Gauss optimization is implemented for real variables only");
  const auto slots = slot_labels(rc, slot_names);
  const auto a = multiplicity_matrix(slots);
  const auto gamma0 = gamma_for(a, cumulants_from_moments(slots), rc);

  // Directions along which gamma can move without changing <c>.
  std::vector<std::vector<RationalFn>> directions;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const auto simplified = rc.simplify(a.columns[j]);
    std::vector<RationalFn> d(a.size());
    d[j] = 1;
    if (simplified && *simplified == a.columns[j]) continue;
    if (simplified) d[static_cast<std::size_t>(a.column_of(*simplified))] = -1;
    directions.push_back(std::move(d));
  }
  if (directions.empty()) return derive_estimator(slot_names, conditions, std::move(name));

  const CumulantValues ref = reference ? *reference : unit_gaussian_reference(rc.names());
  std::vector<EstimatorSpec> parts;
  parts.push_back(make_spec("", slot_names, conditions, terms_from(a, gamma0)));
  for (const auto& d : directions) parts.push_back(make_spec("", slot_names, conditions, terms_from(a, d)));
  auto cov = [&](std::size_t i, std::size_t j) {
    return gaussian_restriction(symbolic_covariance(parts[i], parts[j]), ref).constant();
  };

  const std::size_t k = directions.size();
  std::vector<std::vector<RationalFn>> h(k, std::vector<RationalFn>(k));
  std::vector<RationalFn> rhs(k);
  for (std::size_t i = 0; i < k; ++i) {
    rhs[i] = -cov(0, i + 1);
    for (std::size_t j = i; j < k; ++j) h[i][j] = h[j][i] = cov(i + 1, j + 1);
  }
  std::size_t rank = 0;
  auto alpha = solve_linear(h, rhs, &rank);
  if (alpha && rank < k) {
    // Minimal-norm minimizer: alpha = H y with H^2 y = -b.
    std::vector<std::vector<RationalFn>> h2(k, std::vector<RationalFn>(k));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        for (std::size_t l = 0; l < k; ++l) h2[i][j] += h[i][l] * h[l][j];
    const auto y = solve_linear(h2, rhs);
    std::vector<RationalFn> minimal(k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t l = 0; l < k; ++l) minimal[i] += h[i][l] * (*y)[l];
    alpha = minimal;
  }
  if (!alpha) throw std::logic_error("Gaussian variance is unbounded below along a free direction");

  std::vector<RationalFn> gamma = gamma0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (!directions[i][j].is_zero()) gamma[j] += (*alpha)[i] * directions[i][j];
  return make_spec(std::move(name), slot_names, conditions, terms_from(a, gamma));
}

namespace {
struct SuperpositionParts {
  RationalFn vb, vc, cov;
};

const SuperpositionParts& superposition_parts() {
  static const SuperpositionParts parts = [] {
    ConditionSet zero_mean;
    zero_mean.zero_mean = {"x"};
    const auto full = derive_estimator({"x", "x", "x"});
    const auto reduced = derive_estimator({"x", "x", "x"}, zero_mean);
    const auto ref = unit_gaussian_reference({"x"});
    auto g = [&](const EstimatorSpec& u, const EstimatorSpec& v) {
      return gaussian_restriction(symbolic_covariance(u, v), ref).constant();
    };
    return SuperpositionParts{g(full, full), g(reduced, reduced), g(full, reduced)};
  }();
  return parts;
}
}  // namespace

VarianceExpr superposition_variance(const RationalFn& alpha) {
  const auto& p = superposition_parts();
  const RationalFn beta = RationalFn(1) - alpha;
  const RationalFn value = alpha * alpha * p.vb + RationalFn(2) * alpha * beta * p.cov + beta * beta * p.vc;
  VarianceExpr out{{"x"}, {}};
  out.scaled.add(CumulantProduct({{0, 0}, {0, 0}, {0, 0}}), value);
  return out;
}

RationalFn superposition_argmin() {
  const auto& p = superposition_parts();
  return (p.vc - p.cov) / (p.vb - RationalFn(2) * p.cov + p.vc);
}

}  // namespace cumulants
