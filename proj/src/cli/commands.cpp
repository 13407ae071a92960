#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <regex>
#include <variant>

#include "cumulants/cli.hpp"
#include "cumulants/simulation.hpp"

namespace cumulants::cli {
namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Output records

using Value = std::variant<std::monostate, std::string, double, long long, bool>;

class Record {
 public:
  explicit Record(std::string type) : type_(std::move(type)) {}

  Record& set(std::string key, Value v) {
    fields_.emplace_back(std::move(key), std::move(v));
    return *this;
  }
  Record& set(std::string key, const std::string& v) { return set(std::move(key), Value(v)); }
  Record& set(std::string key, const char* v) { return set(std::move(key), Value(std::string(v))); }
  Record& set(std::string key, double v) { return set(std::move(key), Value(v)); }
  Record& set(std::string key, bool v) { return set(std::move(key), Value(v)); }
  Record& set(std::string key, long v) { return set(std::move(key), Value(static_cast<long long>(v))); }
  Record& set(std::string key, std::optional<double> v) { return set(std::move(key), v ? Value(*v) : Value()); }

  [[nodiscard]] const std::string& type() const { return type_; }
  [[nodiscard]] const std::vector<std::pair<std::string, Value>>& fields() const { return fields_; }

 private:
  std::string type_;
  std::vector<std::pair<std::string, Value>> fields_;
};

enum class Format { human, record, csv };

std::string format_double(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string json_text(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) return "null";
        else if constexpr (std::is_same_v<T, std::string>) return nlohmann::json(x).dump();
        else if constexpr (std::is_same_v<T, double>) return std::isfinite(x) ? format_double(x, 17) : "null";
        else if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
        else return std::to_string(x);
      },
      v);
}

std::string plain_text(const Value& v, int digits) {
  return std::visit(
      [&](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) return "";
        else if constexpr (std::is_same_v<T, std::string>) return x;
        else if constexpr (std::is_same_v<T, double>) return format_double(x, digits);
        else if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
        else return std::to_string(x);
      },
      v);
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

bool same_shape(const Record& a, const Record& b) {
  if (a.type() != b.type() || a.fields().size() != b.fields().size()) return false;
  for (std::size_t i = 0; i < a.fields().size(); ++i)
    if (a.fields()[i].first != b.fields()[i].first) return false;
  return true;
}

void write_csv(const std::vector<Record>& group, std::ostream& out) {
  for (std::size_t i = 0; i < group.front().fields().size(); ++i) out << (i ? "," : "") << csv_cell(group.front().fields()[i].first);
  out << '\n';
  for (const auto& r : group) {
    for (std::size_t i = 0; i < r.fields().size(); ++i) out << (i ? "," : "") << csv_cell(plain_text(r.fields()[i].second, 17));
    out << '\n';
  }
}

void write_human(const std::vector<Record>& group, std::ostream& out) {
  if (group.size() == 1) {
    std::size_t width = 0;
    for (const auto& [k, v] : group.front().fields()) width = std::max(width, k.size());
    for (const auto& [k, v] : group.front().fields())
      out << k << std::string(width - k.size() + 2, ' ') << plain_text(v, 10) << '\n';
    return;
  }
  const auto& keys = group.front().fields();
  std::vector<std::size_t> widths;
  for (const auto& [k, v] : keys) widths.push_back(k.size());
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : group) {
    auto& row = rows.emplace_back();
    for (std::size_t i = 0; i < r.fields().size(); ++i) {
      row.push_back(plain_text(r.fields()[i].second, 8));
      widths[i] = std::max(widths[i], row.back().size());
    }
  }
  const auto line = [&](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      s += cells[i];
      if (i + 1 < cells.size()) s += std::string(widths[i] - cells[i].size() + 2, ' ');
    }
    out << s << '\n';
  };
  std::vector<std::string> header;
  for (const auto& [k, v] : keys) header.push_back(k);
  line(header);
  for (const auto& row : rows) line(row);
}

void emit(const std::vector<Record>& records, Format format, std::ostream& out) {
  if (format == Format::record) {
    for (const auto& r : records) {
      out << "{\"record\":" << nlohmann::json(r.type()).dump();
      for (const auto& [k, v] : r.fields()) out << ',' << nlohmann::json(k).dump() << ':' << json_text(v);
      out << "}\n";
    }
    return;
  }
  for (std::size_t start = 0; start < records.size();) {
    std::size_t end = start + 1;
    while (end < records.size() && same_shape(records[start], records[end])) ++end;
    const std::vector<Record> group(records.begin() + static_cast<long>(start), records.begin() + static_cast<long>(end));
    if (start > 0) out << '\n';
    if (format == Format::csv) write_csv(group, out);
    else write_human(group, out);
    start = end;
  }
}

// ---------------------------------------------------------------------------
// Argument helpers

std::pair<std::string, std::string> split_pair(const std::string& text, char sep, const char* what) {
  const auto pos = text.find(sep);
  if (pos == std::string::npos || pos == 0 || pos + 1 == text.size())
    throw UsageError(std::string("expected ") + what + ", got '" + text + "'");
  return {text.substr(0, pos), text.substr(pos + 1)};
}

ConditionSet conditions_from(const std::vector<std::string>& zero_mean, const std::vector<std::string>& uncorrelated,
                             const std::vector<std::string>& conjugates) {
  ConditionSet c;
  c.zero_mean = zero_mean;
  for (const auto& u : uncorrelated) c.zero_cov.push_back(split_pair(u, ':', "u:v"));
  for (const auto& u : conjugates) c.conjugate_pairs.push_back(split_pair(u, ':', "u:v"));
  return c;
}

Binding binding_from(const std::vector<std::string>& items) {
  Binding b;
  for (const auto& item : items) {
    const auto [var, column] = split_pair(item, '=', "var=column");
    b[var] = column;
  }
  return b;
}

std::string follow(const std::string& name, const Binding& b) {
  const auto it = b.find(name);
  return it == b.end() ? name : it->second;
}

std::string base_of(const std::string& n) { return n.size() > 1 && n.back() == '*' ? n.substr(0, n.size() - 1) : n; }

std::string cumulant_text(const std::vector<std::string>& slots, const Binding& b) {
  std::string s = "C" + std::to_string(slots.size()) + "(";
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const std::string base = base_of(slots[i]);
    s += (i ? "," : "") + follow(base, b) + (base == slots[i] ? "" : "*");
  }
  return s + ")";
}

std::string conditions_text(const ConditionSet& c, const Binding& b) {
  std::string s;
  const auto add = [&](const std::string& t) { s += (s.empty() ? "" : ", ") + t; };
  for (const auto& z : c.zero_mean) add("<" + follow(z, b) + "> = 0");
  for (const auto& [u, v] : c.zero_cov) add(cumulant_text({u, v}, b) + " = 0");
  for (const auto& [u, v] : c.conjugate_pairs) add(follow(v, b) + " = " + follow(u, b) + "*");
  return s.empty() ? "none" : s;
}

// Splits at commas outside parentheses.
std::vector<std::string> split_top_level(const std::string& text) {
  std::vector<std::string> out;
  std::string current;
  int depth = 0;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty()) out.push_back(current);
  return out;
}

std::uint64_t default_seed() {
  const char* env = std::getenv("CUMULANTS_SEED");
  if (!env || !*env) return 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0') throw UsageError(std::string("CUMULANTS_SEED is not an unsigned integer: '") + env + "'");
  return v;
}

Format parse_format(const std::string& f) {
  if (f == "human") return Format::human;
  if (f == "record") return Format::record;
  if (f == "csv") return Format::csv;
  throw UsageError("unknown format '" + f + "'");
}

std::vector<SampleBatch> split_batches(const SampleBatch& data, long k) {
  if (k < 1) throw UsageError("--batches must be positive");
  const long per = data.rows() / k;
  if (per < 1) throw DataError("cannot split " + std::to_string(data.rows()) + " rows into " + std::to_string(k) + " batches");
  std::vector<SampleBatch> out;
  for (long b = 0; b < k; ++b) {
    std::vector<Column> cols;
    for (const auto& c : data.columns()) {
      Column part{c.name, {}, {}};
      part.re.assign(c.re.begin() + b * per, c.re.begin() + (b + 1) * per);
      if (c.is_complex()) part.im.assign(c.im.begin() + b * per, c.im.begin() + (b + 1) * per);
      cols.push_back(std::move(part));
    }
    out.emplace_back(std::move(cols));
  }
  return out;
}

// Cumulant values given as "C2(x,x)=1"; keys are sorted column names.
NumericCumulants parse_cumulant_values(const std::vector<std::string>& items) {
  static const std::regex pattern(R"(\s*C(\d+)\(([^)]*)\)\s*=\s*(\S+)\s*)");
  NumericCumulants out;
  for (const auto& item : items) {
    std::smatch match;
    if (!std::regex_match(item, match, pattern)) throw UsageError("expected Cn(u,...)=value, got '" + item + "'");
    std::vector<std::string> names;
    std::string current;
    for (char c : match[2].str()) {
      if (c == ',') {
        names.push_back(current);
        current.clear();
      } else if (c != ' ') {
        current += c;
      }
    }
    names.push_back(current);
    if (std::to_string(names.size()) != match[1].str())
      throw UsageError("'" + item + "' lists " + std::to_string(names.size()) + " variables");
    std::sort(names.begin(), names.end());
    char* end = nullptr;
    const std::string number = match[3].str();
    const double v = std::strtod(number.c_str(), &end);
    if (*end != '\0' || !std::isfinite(v)) throw UsageError("bad value in '" + item + "'");
    out[names] = v;
  }
  return out;
}

// Re-keys user cumulants (in column names) by the variance's own labels.
NumericCumulants rekey(const VarianceExpr& v, const Binding& binding, const NumericCumulants& given, bool gaussian) {
  NumericCumulants out;
  for (const auto& [product, coeff] : v.scaled.terms())
    for (const auto& block : product.blocks()) {
      if (gaussian && block.size() >= 3) continue;
      std::vector<std::string> labels, columns;
      for (Label l : block) {
        const std::string& name = v.labels[static_cast<std::size_t>(l)];
        labels.push_back(name);
        const std::string base = base_of(name);
        columns.push_back(follow(base, binding) + (base == name ? "" : "*"));
      }
      std::sort(labels.begin(), labels.end());
      std::sort(columns.begin(), columns.end());
      if (const auto it = given.find(columns); it != given.end()) out[labels] = it->second;
    }
  return out;
}

std::string missing_message(const std::string& text, const VarianceExpr& v, const Binding& binding) {
  // plug_in_variance reports labels; translate them back to column names.
  std::string out = text;
  for (const auto& label : v.labels) {
    const std::string base = base_of(label);
    const std::string to = follow(base, binding) + (base == label ? "" : "*");
    if (to == label) continue;
    for (std::size_t pos = 0; (pos = out.find(label, pos)) != std::string::npos;) {
      const bool left_ok = pos == 0 || out[pos - 1] == '(' || out[pos - 1] == ',';
      const std::size_t after = pos + label.size();
      const bool right_ok = after < out.size() && (out[after] == ',' || out[after] == ')');
      if (left_ok && right_ok) {
        out.replace(pos, label.size(), to);
        pos += to.size();
      } else {
        pos = after;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands

struct EstimateArgs {
  std::string input;
  std::string delimiter = ",";
  std::string estimator;
  std::string cumulant;
  std::vector<std::string> vars, zero_mean, uncorrelated, conjugates, bind;
  bool gauss_optimal = false;
  bool derive_missing = false;
  bool plug_in_se = false;
  long batches = 1;
};

std::vector<Record> run_estimate(const EstimateArgs& a) {
  if (a.delimiter.size() != 1) throw UsageError("--delimiter must be a single character");
  const Binding bind = binding_from(a.bind);
  const ConditionSet conditions = conditions_from(a.zero_mean, a.uncorrelated, a.conjugates);

  const EstimatorSpec* spec = nullptr;
  std::optional<EstimatorSpec> derived;
  const RegistryEntry* entry = nullptr;
  Binding binding;  // spec variable -> column
  std::string name;
  if (!a.estimator.empty()) {
    if (!a.vars.empty() || !a.cumulant.empty()) throw UsageError("give either --estimator or --vars, not both");
    if (!a.zero_mean.empty() || !a.uncorrelated.empty() || !a.conjugates.empty() || a.gauss_optimal)
      throw UsageError("conditions select an estimator; a named estimator carries its own");
    const EstimatorRef ref = parse_estimator_ref(a.estimator);
    entry = ref.entry;
    for (const auto& slot : entry->slots) {
      const std::string v = base_of(slot);
      binding[v] = follow(follow(v, ref.binding), bind);
    }
    name = ref.text;
  } else {
    if (a.vars.empty()) throw UsageError("estimate needs --estimator or --vars");
    if (!a.cumulant.empty() && a.cumulant != "c" + std::to_string(a.vars.size()) &&
        a.cumulant != "C" + std::to_string(a.vars.size()))
      throw UsageError("--cumulant " + a.cumulant + " does not match " + std::to_string(a.vars.size()) + " variables");
    try {
      const Selection s = select_estimator(a.vars, conditions, a.gauss_optimal);
      entry = s.entry;
      for (const auto& [v, requested] : s.renaming) binding[v] = follow(requested, bind);
      name = entry->name;
    } catch (const UnsupportedEstimatorError&) {
      if (!a.derive_missing) throw;
      derived = a.gauss_optimal ? gauss_optimize(a.vars, conditions, "derived")
                                : derive_estimator(a.vars, conditions, "derived");
      for (const auto& v : a.vars) binding[base_of(v)] = follow(base_of(v), bind);
      name = "derived";
    }
  }
  spec = entry ? &entry->spec() : &*derived;

  const SampleBatch data = ingest_file(a.input, a.delimiter.front());
  const std::vector<SampleBatch> batches = a.batches == 1 ? std::vector<SampleBatch>{data} : split_batches(data, a.batches);
  const long m = batches.front().rows();

  std::optional<double> plug_in;
  if (a.plug_in_se) {
    const VarianceExpr owned = entry ? VarianceExpr{} : symbolic_variance(*spec);
    const VarianceExpr& v = entry ? entry->variance() : owned;
    plug_in = plug_in_variance_from_data(v, data, binding, m).variance / static_cast<double>(batches.size());
  }
  const EstimateResult r = multi_batch_estimate(*spec, batches, binding, plug_in);

  std::vector<Record> out;
  for (const auto& w : condition_warnings(*spec, data, binding)) out.push_back(std::move(Record("warning").set("message", w)));
  Record rec("estimate");
  rec.set("estimator", name)
      .set("cumulant", cumulant_text(spec->slot_names(), binding))
      .set("conditions", conditions_text(spec->conditions, binding))
      .set("formula", spec->formula())
      .set("m", m)
      .set("min_m", spec->min_m)
      .set("batches", r.batches)
      .set("value_re", r.value.real())
      .set("value_im", r.value.imag())
      .set("standard_error", r.standard_error)
      .set("se_method", r.empirical_variance ? Value(std::string("empirical")) : plug_in ? Value(std::string("plug-in")) : Value());
  if (plug_in) rec.set("plug_in_standard_error", std::sqrt(std::max(*plug_in, 0.0)));
  out.push_back(std::move(rec));
  return out;
}

struct DeriveArgs {
  int order = 0;
  std::vector<std::string> vars, zero_mean, uncorrelated, conjugates;
  bool gauss_optimal = false;
  bool variance = false;
  bool gaussian = false;
  bool spec = false;
};

std::vector<Record> run_derive(const DeriveArgs& a) {
  if (a.vars.empty()) throw UsageError("derive needs --vars");
  if (a.order != 0 && a.order != static_cast<int>(a.vars.size()))
    throw UsageError("--order " + std::to_string(a.order) + " does not match " + std::to_string(a.vars.size()) +
                     " variables");
  const ConditionSet conditions = conditions_from(a.zero_mean, a.uncorrelated, a.conjugates);
  const EstimatorSpec spec = a.gauss_optimal ? gauss_optimize(a.vars, conditions) : derive_estimator(a.vars, conditions);
  Record rec("derive");
  rec.set("cumulant", cumulant_text(spec.slot_names(), {}))
      .set("conditions", conditions_text(conditions, {}))
      .set("gauss_optimal", a.gauss_optimal)
      .set("formula", spec.formula())
      .set("min_m", spec.min_m)
      .set("unbiased", verify_unbiased(spec).unbiased());
  if (a.variance || a.gaussian) {
    const VarianceExpr v = symbolic_variance(spec);
    if (a.variance) rec.set("scaled_variance", v.to_string());
    if (a.gaussian) rec.set("gaussian_scaled_variance", gaussian_restriction(v).to_string());
  }
  if (a.spec) rec.set("spec", serialize_spec(spec));
  return {rec};
}

struct VarianceArgs {
  std::string estimator;
  long m = 0;
  std::vector<std::string> cumulants;
  bool gaussian = false;
  bool symbolic = false;
};

std::vector<Record> run_variance(const VarianceArgs& a) {
  const EstimatorRef ref = parse_estimator_ref(a.estimator);
  const VarianceExpr& v = ref.entry->variance();
  Record rec("variance");
  rec.set("estimator", ref.text).set("m", a.m).set("gaussian", a.gaussian);
  if (a.symbolic) rec.set("scaled_variance_formula", missing_message(v.to_string(), v, ref.binding));
  if (!a.cumulants.empty() || !a.symbolic) {
    const NumericCumulants values = rekey(v, ref.binding, parse_cumulant_values(a.cumulants), a.gaussian);
    try {
      const PlugInVariance p = plug_in_variance(v, values, a.m, a.gaussian);
      rec.set("scaled_variance", p.scaled).set("variance", p.variance).set("standard_error", std::sqrt(std::max(p.variance, 0.0)));
    } catch (const std::invalid_argument& e) {
      throw UsageError(missing_message(e.what(), v, ref.binding));
    }
  }
  return {rec};
}

struct SimulateArgs {
  std::string process;
  double lambda = 25;
  double mean = 0;
  double variance = 1;
  int dimension = 1;
  long m = 0;
  long repeats = 0;
  std::string estimators;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  long scatter = 150;
  std::vector<long> scan;
  std::string plot_data;
  bool no_theory = false;
};

std::vector<Record> run_simulate(const SimulateArgs& a) {
  ProcessSpec proc;
  proc.kind = parse_process_kind(a.process);
  if (proc.kind == ProcessKind::independent_product || proc.kind == ProcessKind::finite)
    throw UsageError("process '" + a.process + "' is available from the library API only");
  proc.lambda = a.lambda;
  proc.mean = a.mean;
  proc.variance = a.variance;
  proc.dimension = a.dimension;
  proc.seed = a.seed ? *a.seed : default_seed();
  proc.validate();

  std::vector<EstimatorRef> refs;
  for (const auto& text : split_top_level(a.estimators)) refs.push_back(parse_estimator_ref(text));
  if (refs.empty()) throw UsageError("--estimators is empty");
  ExperimentOptions options;
  options.threads = a.threads;
  options.theory = !a.no_theory;

  std::vector<Record> out;
  Record run("run");
  run.set("process", to_string(proc.kind));
  if (proc.kind == ProcessKind::quasi_poisson) run.set("lambda", proc.lambda);
  else run.set("mean", proc.mean).set("variance", proc.variance);
  run.set("dimension", static_cast<long>(proc.dimension)).set("repeats", a.repeats).set("seed", std::to_string(proc.seed));
  if (a.scan.empty()) run.set("m", a.m);
  out.push_back(std::move(run));

  std::vector<Record> plot;
  if (!a.scan.empty()) {
    for (std::size_t e = 0; e < refs.size(); ++e) {
      ExperimentOptions o = options;
      // Each estimator gets its own block of streams.
      o.first_stream = e * a.scan.size() * static_cast<std::uint64_t>(a.repeats);
      for (const auto& p : consistency_scan(proc, refs[e], a.scan, a.repeats, o)) {
        Record r("scan");
        r.set("estimator", refs[e].text)
            .set("m", p.m)
            .set("variance", p.variance)
            .set("scaled_variance", p.scaled_variance)
            .set("scaled_variance_se", static_cast<double>(p.m) * p.variance_standard_error)
            .set("theory_scaled_variance", p.theory_scaled_variance);
        plot.push_back(r);
        out.push_back(std::move(r));
      }
    }
  } else {
    if (a.m < 1 || a.repeats < 1) throw UsageError("--m and --repeats must be positive");
    const ExperimentReport report = run_experiment(proc, refs, a.m, a.repeats, options);
    const bool complex = proc.kind == ProcessKind::complex_gaussian;
    const long points = a.scatter < 0 ? a.repeats : std::min(a.scatter, a.repeats);
    for (long k = 0; k < points; ++k) {
      Record r("repeat");
      r.set("repeat", k);
      for (const auto& s : report.estimators) {
        const auto v = s.estimates[static_cast<std::size_t>(k)];
        if (complex) r.set(s.estimator + "_re", v.real()).set(s.estimator + "_im", v.imag());
        else r.set(s.estimator, v.real());
      }
      plot.push_back(r);
      out.push_back(std::move(r));
    }
    for (const auto& s : report.estimators) {
      Record r("summary");
      r.set("estimator", s.estimator)
          .set("mean_re", s.mean.real())
          .set("mean_im", s.mean.imag())
          .set("mean_se", s.mean_standard_error)
          .set("target_re", s.target ? std::optional<double>(s.target->real()) : std::nullopt)
          .set("variance", s.variance)
          .set("variance_se", s.variance_standard_error)
          .set("scaled_variance", s.scaled_variance)
          .set("theory_scaled_variance", s.theory_scaled_variance);
      out.push_back(std::move(r));
    }
    for (std::size_t e = 1; e < report.estimators.size(); ++e) {
      const auto& first = report.estimators.front();
      const auto& other = report.estimators[e];
      Record r("ratio");
      r.set("numerator", first.estimator)
          .set("denominator", other.estimator)
          .set("variance_ratio", other.variance > 0 ? std::optional<double>(first.variance / other.variance) : std::nullopt);
      out.push_back(std::move(r));
    }
  }
  if (!a.plot_data.empty()) {
    std::ofstream file(a.plot_data);
    if (!file) throw DataError("cannot write '" + a.plot_data + "'");
    emit(plot, Format::csv, file);
  }
  return out;
}

std::vector<Record> run_list() {
  std::vector<Record> out;
  for (const auto& e : registry()) {
    Record r("estimator");
    r.set("name", e.name)
        .set("cumulant", cumulant_text(e.slots, {}))
        .set("conditions", conditions_text(e.conditions, {}))
        .set("min_m", e.spec().min_m)
        .set("gauss_optimal", e.gauss_optimized)
        .set("flags", e.flags)
        .set("formula", e.spec().formula());
    out.push_back(std::move(r));
  }
  return out;
}

void error_record(std::ostream& err, int code, const char* kind, const std::string& message) {
  err << "{\"record\":\"error\",\"code\":" << code << ",\"kind\":\"" << kind
      << "\",\"message\":" << nlohmann::json(message).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace)
      << "}\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unbiased estimators of joint cumulants: evaluation, derivation and simulation."};
  app.name(args.empty() ? "cumulants" : args.front());
  app.fallthrough();
  app.set_version_flag("--version", "cumulants 0.1.0");
  std::string format = "human";
  bool list = false;
  app.add_option("--format", format, "Output format: human, record or csv")
      ->check(CLI::IsMember({"human", "record", "csv"}));
  app.add_flag("--list", list, "Print the estimator registry");

  EstimateArgs ea;
  auto* estimate = app.add_subcommand("estimate", "Evaluate an estimator on delimited data");
  estimate->add_option("--input,-i", ea.input, "Input file with a header row")->required();
  estimate->add_option("--delimiter", ea.delimiter, "Field delimiter (default ',')");
  estimate->add_option("--estimator,-e", ea.estimator, "Registry estimator, e.g. c3cgo or c3a(x,x,z)");
  estimate->add_option("--cumulant", ea.cumulant, "Cumulant order as cN (checked against --vars)");
  estimate->add_option("--vars", ea.vars, "Cumulant slots, e.g. x,x,x or a,a*,b,b*")->delimiter(',');
  estimate->add_option("--zero-mean", ea.zero_mean, "Variables with vanishing mean")->delimiter(',');
  estimate->add_option("--uncorrelated", ea.uncorrelated, "Uncorrelated pairs u:v")->delimiter(',');
  estimate->add_option("--conjugate", ea.conjugates, "Pairs u:v with v the conjugate of u")->delimiter(',');
  estimate->add_option("--bind", ea.bind, "Variable to column bindings var=column")->delimiter(',');
  estimate->add_flag("--gauss-optimal", ea.gauss_optimal, "Prefer the Gauss-optimal variant");
  estimate->add_flag("--derive-missing", ea.derive_missing, "Derive an estimator when the registry has none");
  estimate->add_flag("--plug-in-se", ea.plug_in_se, "Standard error from the variance formula at sample cumulants");
  estimate->add_option("--batches", ea.batches, "Split the rows into this many equal batches");

  DeriveArgs da;
  auto* derive = app.add_subcommand("derive", "Derive an unbiased estimator symbolically");
  derive->add_option("--order", da.order, "Cumulant order (checked against --vars)");
  derive->add_option("--vars", da.vars, "Cumulant slots")->delimiter(',')->required();
  derive->add_option("--zero-mean", da.zero_mean, "Variables with vanishing mean")->delimiter(',');
  derive->add_option("--uncorrelated", da.uncorrelated, "Uncorrelated pairs u:v")->delimiter(',');
  derive->add_option("--conjugate", da.conjugates, "Pairs u:v with v the conjugate of u")->delimiter(',');
  derive->add_flag("--gauss-optimal", da.gauss_optimal, "Minimize the Gaussian variance");
  derive->add_flag("--variance", da.variance, "Also print m V(c) in cumulants");
  derive->add_flag("--gaussian", da.gaussian, "Also print the Gaussian part of m V(c)");
  derive->add_flag("--spec", da.spec, "Also print the structured spec");

  VarianceArgs va;
  auto* variance = app.add_subcommand("variance", "Evaluate a registry variance formula");
  variance->add_option("estimator", va.estimator, "Registry estimator")->required();
  variance->add_option("--m", va.m, "Sample count")->required()->check(CLI::PositiveNumber);
  variance->add_option("--cumulant,-c", va.cumulants, "Cumulant value, e.g. 'C2(x,x)=1' (repeatable)");
  variance->add_flag("--gaussian", va.gaussian, "Drop cumulants of order three and higher");
  variance->add_flag("--symbolic", va.symbolic, "Print the formula m V(c)");

  SimulateArgs sa;
  std::uint64_t seed = 0;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo runs on a random process");
  simulate->add_option("process", sa.process, "gaussian, poisson (quasi_poisson) or complex_gaussian")->required();
  simulate->add_option("--lambda", sa.lambda, "Poisson parameter");
  simulate->add_option("--mean", sa.mean, "Gaussian mean");
  simulate->add_option("--variance", sa.variance, "Gaussian variance");
  simulate->add_option("--dimension,-d", sa.dimension, "Number of independent columns");
  simulate->add_option("--m", sa.m, "Samples per batch");
  simulate->add_option("--repeats,-M", sa.repeats, "Number of batches")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--estimators", sa.estimators, "Comma-separated estimators, e.g. c3c,c3cgo")->required();
  auto* seed_option = simulate->add_option("--seed", seed, "Seed (default: CUMULANTS_SEED or 0)");
  simulate->add_option("--threads", sa.threads, "Worker threads (0: all cores)");
  simulate->add_option("--scatter", sa.scatter, "Per-repeat rows to emit (-1: all)");
  simulate->add_option("--scan", sa.scan, "m grid for a consistency scan")->delimiter(',');
  simulate->add_option("--plot-data", sa.plot_data, "Write the scatter or scan table as CSV");
  simulate->add_flag("--no-theory", sa.no_theory, "Skip the theory overlay");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("cumulants");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    error_record(err, kExitUsage, "usage", e.what());
    return kExitUsage;
  }

  try {
    const Format f = parse_format(format);
    std::vector<Record> records;
    if (*estimate) records = run_estimate(ea);
    else if (*derive) records = run_derive(da);
    else if (*variance) records = run_variance(va);
    else if (*simulate) {
      if (seed_option->count()) sa.seed = seed;
      if (sa.scan.empty() && sa.m < 1) throw UsageError("simulate needs --m or --scan");
      records = run_simulate(sa);
    } else if (list) records = run_list();
    else {
      out << app.help();
      return kExitUsage;
    }
    emit(records, f, out);
    return kExitOk;
  } catch (const UsageError& e) {
    error_record(err, kExitUsage, "usage", e.what());
    return kExitUsage;
  } catch (const DataError& e) {
    error_record(err, kExitData, "data", e.what());
    return kExitData;
  } catch (const UnsupportedEstimatorError& e) {
    error_record(err, kExitUnsupported, "unsupported", e.what());
    return kExitUnsupported;
  } catch (const std::invalid_argument& e) {
    error_record(err, kExitUsage, "usage", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    error_record(err, 1, "internal", e.what());
    return 1;
  }
}

}  // namespace cumulants::cli
