#include <algorithm>
#include <mutex>
#include <numeric>
#include <set>

#include "cumulants/estimators.hpp"

namespace cumulants {
namespace {

struct Formula {
  const char* prefactor;
  const char* body;
};

struct Row {
  RegistryEntry entry;
  std::vector<Formula> formula;
};

ConditionSet zm(std::vector<std::string> names, std::vector<std::pair<std::string, std::string>> cov = {}) {
  ConditionSet c;
  c.zero_mean = std::move(names);
  c.zero_cov = std::move(cov);
  return c;
}

const std::vector<std::pair<std::string, std::string>> kAllPairs3 = {{"x", "y"}, {"x", "z"}, {"y", "z"}};
const std::vector<std::pair<std::string, std::string>> kAllPairs4 = {{"x", "y"}, {"x", "z"}, {"x", "w"},
                                                                     {"y", "z"}, {"y", "w"}, {"z", "w"}};
const std::vector<std::string> kXYZW = {"x", "y", "z", "w"};
const std::vector<std::string> kComplex4 = {"a", "a*", "b", "b*"};

std::vector<Row> build_rows() {
  const char* k3 = "m^2/((m-1)(m-2))";
  const char* k4 = "m^2/((m-1)(m-2)(m-3))";
  return {
      {{"c2a", "a", {"x", "y"}, {}, false, "GV", "full covariance estimator"},
       {{"m/(m-1)", "mean(xy) - mean(x) mean(y)"}}},
      {{"c2b", "b", {"x", "x"}, {}, false, "GV", "k-statistic k2, sample variance with Bessel correction"},
       {{"m/(m-1)", "mean(x^2) - mean(x)^2"}}},
      {{"c2c", "c", {"x", "x"}, zm({"x"}), false, "GV", "variance of a zero-mean variable"}, {{"1", "mean(x^2)"}}},
      {{"c2d", "d", {"x", "y"}, zm({"x", "y"}), false, "GV", "covariance of zero-mean variables"}, {{"1", "mean(xy)"}}},
      {{"c2e", "e", {"x", "y"}, zm({"x"}), false, "GV", "covariance when one variable is zero-mean"},
       {{"1", "mean(xy)"}}},

      {{"c3a", "a", {"x", "y", "z"}, {}, false, "GV", "full third-order estimator"},
       {{k3, "mean(xyz) - mean(xy) mean(z) - mean(xz) mean(y) - mean(yz) mean(x) + 2 mean(x) mean(y) mean(z)"}}},
      {{"c3b", "b", {"x", "x", "x"}, {}, false, "GV", "k-statistic k3"},
       {{k3, "mean(x^3) - 3 mean(x^2) mean(x) + 2 mean(x)^3"}}},
      {{"c3c", "c", {"x", "x", "x"}, zm({"x"}), false, "nG V", "third moment of a zero-mean variable"},
       {{"1", "mean(x^3)"}}},
      {{"c3cgo", "c", {"x", "x", "x"}, zm({"x"}), true, "GV*", "Gauss-optimal third cumulant of a zero-mean variable"},
       {{"1/(m+1)", "(m+4) mean(x^3) - 3m mean(x^2) mean(x)"}}},
      {{"c3d", "d", {"x", "y", "z"}, zm({"x", "y", "z"}), false, "GV", "third moment of zero-mean variables"},
       {{"1", "mean(xyz)"}}},
      {{"c3e", "e", {"x", "y", "z"}, zm({"x"}), false, "GV*", "x zero-mean"},
       {{"1/(m-1)", "(m+1) mean(xyz) - m mean(xy) mean(z) - m mean(xz) mean(y)"}}},
      {{"c3f", "f", {"x", "y", "z"}, zm({"x", "y"}), false, "GV*", "x and y zero-mean"},
       {{"m/(m-1)", "mean(xyz) - mean(xy) mean(z)"}}},
      {{"c3h", "h", {"x", "x", "z"}, zm({"x", "z"}), false, "nG V", "C3(x,x,z) of zero-mean variables"},
       {{"1", "mean(x^2z)"}}},
      {{"c3hgo", "h", {"x", "x", "z"}, zm({"x", "z"}), true, "GV*", "Gauss-optimal C3(x,x,z) of zero-mean variables"},
       {{"1/(m+1)", "(m+2) mean(x^2z) - m mean(x^2) mean(z)"}}},
      {{"c3i", "i", {"x", "y", "z"}, zm({}, {{"x", "y"}}), false, "", "x and y uncorrelated"},
       {{"m/(m-2)", "mean(xyz) - mean(xz) mean(y) - mean(yz) mean(x)"},
        {"m/((m-1)(m-2))", "m mean(x) mean(y) mean(z) - mean(xy) mean(z)"}}},
      {{"c3j", "j", {"x", "y", "z"}, zm({"x", "y", "z"}, kAllPairs3), false, "",
        "zero-mean, pairwise uncorrelated variables"},
       {{"1", "mean(xyz)"}}},
      {{"c3cd", "cd", {"a", "a*", "b"}, zm({"a"}, {{"a", "b"}, {"a", "b*"}}), false, "GV*",
        "C3(a,a*,b) with a zero-mean and uncorrelated with b"},
       {{"m/(m-1)", "mean(aa*b) - mean(aa*) mean(b)"}}},

      {{"c4a", "a", kXYZW, {}, false, "G", "full fourth-order estimator"},
       {{k4, "(m+1) mean(xyzw)"},
        {k4, "-(m+1) mean(xyz) mean(w) - (m+1) mean(xyw) mean(z) - (m+1) mean(xzw) mean(y) - (m+1) mean(yzw) mean(x)"},
        {k4, "-(m-1) mean(xy) mean(zw) - (m-1) mean(xz) mean(yw) - (m-1) mean(xw) mean(yz)"},
        {k4,
         "2m mean(xy) mean(z) mean(w) + 2m mean(xz) mean(y) mean(w) + 2m mean(xw) mean(y) mean(z)"
         " + 2m mean(yz) mean(x) mean(w) + 2m mean(yw) mean(x) mean(z) + 2m mean(zw) mean(x) mean(y)"},
        {k4, "-6m mean(x) mean(y) mean(z) mean(w)"}}},
      {{"c4b", "b", {"x", "x", "x", "x"}, {}, false, "GV", "k-statistic k4"},
       {{k4,
         "(m+1) mean(x^4) - 4(m+1) mean(x^3) mean(x) - 3(m-1) mean(x^2)^2 + 12m mean(x^2) mean(x)^2 - 6m mean(x)^4"}}},
      {{"c4c", "c", {"x", "x", "x", "x"}, zm({"x"}), false, "GV", "fourth cumulant of a zero-mean variable"},
       {{"1/(m-1)", "(m+2) mean(x^4) - 3m mean(x^2)^2"}}},
      {{"c4d", "d", kXYZW, zm(kXYZW), false, "", "zero-mean variables"},
       {{"1/(m-1)", "(m+2) mean(xyzw) - m mean(xy) mean(zw) - m mean(xz) mean(yw) - m mean(xw) mean(yz)"}}},
      {{"c4e", "e", kXYZW, zm({"x"}), false, "", "x zero-mean"},
       {{"1/((m-1)(m-2))", "(m+1)(m+2) mean(xyzw)"},
        {"-m/((m-1)(m-2))", "(m+2) mean(xyz) mean(w) + (m+2) mean(xyw) mean(z) + (m+2) mean(xzw) mean(y)"},
        {"-m/((m-1)(m-2))", "m mean(xy) mean(zw) + m mean(xz) mean(yw) + m mean(xw) mean(yz)"},
        {"-m/((m-1)(m-2))", "-2m mean(xy) mean(z) mean(w) - 2m mean(xz) mean(y) mean(w) - 2m mean(xw) mean(y) mean(z)"}}},
      {{"c4f", "f", kXYZW, zm({"x", "y"}), false, "", "x and y zero-mean"},
       {{"1/((m-1)(m-2))", "(m^2+2m-4) mean(xyzw)"},
        {"-m/((m-1)(m-2))", "m mean(xyz) mean(w) + m mean(xyw) mean(z) + m mean(xy) mean(zw)"},
        {"-m/((m-1)(m-2))", "(m-2) mean(xz) mean(yw) + (m-2) mean(xw) mean(yz) - 2m mean(xy) mean(z) mean(w)"}}},
      {{"c4g", "g", kXYZW, zm({"x", "y", "z"}), false, "", "x, y and z zero-mean"},
       {{"1/(m-1)",
         "(m+3) mean(xyzw) - m mean(xyz) mean(w) - m mean(xy) mean(zw) - m mean(xz) mean(yw) - m mean(xw) mean(yz)"}}},
      {{"c4j", "j", kXYZW, zm(kXYZW, kAllPairs4), false, "", "zero-mean, pairwise uncorrelated variables"},
       {{"1", "mean(xyzw)"}}},
      {{"c4ca", "ca", kComplex4, zm({"a", "b"}, {{"a", "b"}, {"a", "b*"}}), false, "V",
        "C4(a,a*,b,b*), zero means, a uncorrelated with b and b*"},
       {{"m/(m-1)", "mean(aa*bb*) - mean(aa*) mean(bb*)"}}},
      {{"c4cb", "cb", kComplex4, zm({"a", "b"}, {{"a", "b"}}), false, "V*",
        "C4(a,a*,b,b*), zero means, C2(a,b) = 0 but C2(a,b*) free"},
       {{"1/(m-1)", "(m+1) mean(aa*bb*) - m mean(aa*) mean(bb*) - m mean(ab*) mean(a*b)"}}},
      {{"c4cc", "cc", kComplex4, zm({"b"}, {{"a", "b"}, {"a", "b*"}}), false, "",
        "C4(a,a*,b,b*), b zero-mean, a uncorrelated with b and b*"},
       {{"m^2/((m-1)(m-2))",
         "mean(aa*bb*) - mean(a*bb*) mean(a) - mean(abb*) mean(a*) - mean(aa*) mean(bb*) + 2 mean(bb*) mean(a) mean(a*)"}}},
  };
}

class Store {
 public:
  Store() {
    for (auto& [entry, formula] : build_rows()) {
      const ResolvedConditions rc(entry.slots, entry.conditions);
      EstimatorTerms terms;
      for (const auto& f : formula) {
        auto part = parse_mean_expr(f.body, rc.names());
        part *= parse_rational(f.prefactor);
        terms += part;
      }
      specs.emplace(entry.name, make_spec(entry.name, entry.slots, entry.conditions, std::move(terms)));
      entries.push_back(std::move(entry));
    }
  }

  std::vector<RegistryEntry> entries;
  std::map<std::string, EstimatorSpec> specs;
  std::mutex mutex;
  std::map<std::string, VarianceExpr> variances;
};

Store& store() {
  static Store s;
  return s;
}

// Closed conditions of a slot list as name-level facts.
struct Facts {
  std::set<std::string> zero_mean;
  std::set<std::pair<std::string, std::string>> zero_cov;
  [[nodiscard]] std::size_t weight() const { return zero_mean.size() + zero_cov.size(); }
};

Facts facts_of(const std::vector<std::string>& slots, const ConditionSet& conditions) {
  const ResolvedConditions rc(slots, conditions);
  Facts f;
  const auto& names = rc.names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (rc.zero_mean(static_cast<Label>(i))) f.zero_mean.insert(names[i]);
    for (std::size_t j = i + 1; j < names.size(); ++j)
      if (rc.zero_cov(static_cast<Label>(i), static_cast<Label>(j))) f.zero_cov.insert(std::minmax(names[i], names[j]));
  }
  return f;
}

std::string base_of(const std::string& n) { return n.size() > 1 && n.back() == '*' ? n.substr(0, n.size() - 1) : n; }

std::vector<std::string> bases(const std::vector<std::string>& slots) {
  std::vector<std::string> out;
  for (const auto& s : slots)
    if (std::find(out.begin(), out.end(), base_of(s)) == out.end()) out.push_back(base_of(s));
  return out;
}

std::string rename(const std::string& n, const Binding& map) {
  const std::string b = base_of(n);
  const std::string& to = map.at(b);
  return b == n ? to : to + "*";
}

std::string describe(const std::vector<std::string>& slots, const ConditionSet& c) {
  std::string out = "C" + std::to_string(slots.size()) + "(";
  for (std::size_t i = 0; i < slots.size(); ++i) out += (i ? "," : "") + slots[i];
  out += ")";
  for (const auto& z : c.zero_mean) out += ", <" + z + "> = 0";
  for (const auto& [u, v] : c.zero_cov) out += ", C2(" + u + "," + v + ") = 0";
  return out;
}

}  // namespace

const std::vector<RegistryEntry>& registry() { return store().entries; }

const RegistryEntry& registry_entry(std::string_view name) {
  for (const auto& e : registry())
    if (e.name == name) return e;
  throw UnsupportedEstimatorError("unknown estimator '" + std::string(name) + "' (see --list)");
}

const EstimatorSpec& RegistryEntry::spec() const { return store().specs.at(name); }

const VarianceExpr& RegistryEntry::variance() const {
  Store& s = store();
  {
    std::lock_guard lock(s.mutex);
    if (auto it = s.variances.find(name); it != s.variances.end()) return it->second;
  }
  VarianceExpr v = symbolic_variance(spec());
  std::lock_guard lock(s.mutex);
  return s.variances.try_emplace(name, std::move(v)).first->second;
}

Selection select_estimator(const std::vector<std::string>& slot_names, const ConditionSet& conditions,
                           bool prefer_gauss_optimal) {
  const Facts want = facts_of(slot_names, conditions);
  std::vector<std::string> sorted_slots = slot_names;
  std::sort(sorted_slots.begin(), sorted_slots.end());
  const auto query_bases = bases(slot_names);

  Selection best;
  std::size_t best_weight = 0;
  for (const auto& entry : registry()) {
    if (entry.slots.size() != slot_names.size()) continue;
    const auto entry_bases = bases(entry.slots);
    if (entry_bases.size() != query_bases.size()) continue;
    const Facts have = facts_of(entry.slots, entry.conditions);
    std::vector<std::size_t> perm(query_bases.size());
    std::iota(perm.begin(), perm.end(), 0);
    do {
      Binding map;
      for (std::size_t i = 0; i < perm.size(); ++i) map[entry_bases[i]] = query_bases[perm[i]];
      std::vector<std::string> mapped;
      for (const auto& s : entry.slots) mapped.push_back(rename(s, map));
      std::sort(mapped.begin(), mapped.end());
      if (mapped != sorted_slots) continue;
      const bool implied =
          std::all_of(have.zero_mean.begin(), have.zero_mean.end(),
                      [&](const std::string& n) { return want.zero_mean.contains(rename(n, map)); }) &&
          std::all_of(have.zero_cov.begin(), have.zero_cov.end(), [&](const auto& p) {
            return want.zero_cov.contains(std::minmax(rename(p.first, map), rename(p.second, map)));
          });
      if (!implied) continue;
      const std::size_t w = have.weight();
      const bool better = !best.entry || w > best_weight ||
                          (w == best_weight && entry.gauss_optimized == prefer_gauss_optimal &&
                           best.entry->gauss_optimized != prefer_gauss_optimal);
      if (better) {
        best.entry = &entry;
        best.renaming = map;
        best_weight = w;
      }
      break;
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  if (!best.entry)
    throw UnsupportedEstimatorError("no registry estimator for " + describe(slot_names, conditions) +
                                    "; derive one with the symbolic engine (derive)");
  return best;
}

EstimatorRef parse_estimator_ref(std::string_view text) {
  const auto open = text.find('(');
  EstimatorRef ref;
  ref.text = std::string(text);
  ref.entry = &registry_entry(text.substr(0, open));
  if (open == std::string_view::npos) return ref;
  if (text.back() != ')') throw std::invalid_argument("expected ')' at the end of '" + ref.text + "'");
  std::vector<std::string> columns;
  std::string current;
  for (char c : text.substr(open + 1, text.size() - open - 2)) {
    if (c == ',') {
      columns.push_back(current);
      current.clear();
    } else if (c != ' ') {
      current += c;
    }
  }
  columns.push_back(current);
  const auto& slots = ref.entry->slots;
  if (columns.size() != slots.size())
    throw std::invalid_argument("'" + ref.text + "' lists " + std::to_string(columns.size()) + " columns for " +
                                std::to_string(slots.size()) + " slots");
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const bool starred = base_of(slots[i]) != slots[i];
    if (starred != (base_of(columns[i]) != columns[i]) || base_of(columns[i]).empty())
      throw std::invalid_argument("slot " + std::to_string(i + 1) + " of '" + ref.text + "' must be written like '" +
                                  slots[i] + "'");
    const auto [it, fresh] = ref.binding.try_emplace(base_of(slots[i]), base_of(columns[i]));
    if (!fresh && it->second != base_of(columns[i]))
      throw std::invalid_argument("'" + ref.text + "' binds " + it->first + " to both " + it->second + " and " +
                                  base_of(columns[i]));
  }
  return ref;
}

}  // namespace cumulants
