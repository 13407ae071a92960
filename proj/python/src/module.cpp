#include <algorithm>

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cumulants/conversions.hpp"
#include "cumulants/derivation.hpp"
#include "cumulants/estimators.hpp"
#include "cumulants/simulation.hpp"

namespace py = pybind11;
using namespace cumulants;

namespace {

using Pairs = std::vector<std::pair<std::string, std::string>>;

ConditionSet make_conditions(std::vector<std::string> zero_mean, Pairs zero_cov) {
  return {std::move(zero_mean), std::move(zero_cov), {}};
}

// Columns arrive as a mapping of name -> 1-d array; complex dtypes become
// complex columns.
SampleBatch to_batch(const py::dict& data) {
  std::vector<Column> columns;
  for (const auto& [key, value] : data) {
    Column c{py::cast<std::string>(key), {}, {}};
    const auto arr = py::array::ensure(value);
    if (!arr || arr.ndim() != 1) throw std::invalid_argument("column '" + c.name + "' must be one-dimensional");
    if (arr.dtype().kind() == 'c') {
      const auto z = py::array_t<std::complex<double>, py::array::forcecast>::ensure(arr);
      for (py::ssize_t i = 0; i < z.size(); ++i) {
        c.re.push_back(z.at(i).real());
        c.im.push_back(z.at(i).imag());
      }
    } else {
      const auto r = py::array_t<double, py::array::forcecast>::ensure(arr);
      c.re.assign(r.data(), r.data() + r.size());
    }
    columns.push_back(std::move(c));
  }
  return SampleBatch(std::move(columns));
}

py::object scalar(std::complex<double> v, bool complex) {
  if (complex) return py::cast(v);
  return py::float_(v.real());
}

mpq_class to_mpq(const py::handle& h) { return mpq_class(py::str(h).cast<std::string>()); }

py::object to_fraction(const mpq_class& q) {
  static const py::object fraction = py::module_::import("fractions").attr("Fraction");
  return fraction(q.get_str());
}

ProcessSpec make_process(const std::string& kind, int dimension, double mean, double variance, double lambda,
                         std::uint64_t seed) {
  ProcessSpec p;
  p.kind = parse_process_kind(kind);
  p.dimension = dimension;
  p.mean = mean;
  p.variance = variance;
  p.lambda = lambda;
  p.seed = seed;
  p.validate();
  return p;
}

py::dict summary_dict(const EstimatorSummary& s, long m) {
  py::dict d;
  d["estimator"] = s.estimator;
  d["m"] = m;
  d["mean"] = s.mean;
  d["variance"] = s.variance;
  d["scaled_variance"] = s.scaled_variance;
  d["mean_standard_error"] = s.mean_standard_error;
  d["variance_standard_error"] = s.variance_standard_error;
  d["target"] = s.target ? py::cast(*s.target) : py::none();
  d["theory_scaled_variance"] = s.theory_scaled_variance ? py::cast(*s.theory_scaled_variance) : py::none();
  d["estimates"] = s.estimates;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Unbiased cumulant estimators: exact derivation, evaluation and simulation";

  auto data_error = py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<UnsupportedEstimatorError>(m, "UnsupportedEstimatorError", PyExc_LookupError);
  (void)data_error;

  py::class_<EstimatorSpec>(m, "Spec")
      .def_readonly("name", &EstimatorSpec::name)
      .def_readonly("min_m", &EstimatorSpec::min_m)
      .def_property_readonly("slots", &EstimatorSpec::slot_names)
      .def_property_readonly("order", &EstimatorSpec::order)
      .def_property_readonly("formula", &EstimatorSpec::formula)
      .def("is_unbiased", [](const EstimatorSpec& s) { return verify_unbiased(s).unbiased(); })
      .def("variance", [](const EstimatorSpec& s) { return symbolic_variance(s).to_string(); },
           "m V(c) in cumulants.")
      .def("gaussian_variance",
           [](const EstimatorSpec& s) { return gaussian_restriction(symbolic_variance(s)).to_string(); },
           "m V(c) with every cumulant above second order set to zero.")
      .def("to_json", &serialize_spec)
      .def_static("from_json", &parse_spec)
      .def(
          "__call__",
          [](const EstimatorSpec& s, const py::dict& data, const Binding& binding) {
            const SampleBatch batch = to_batch(data);
            return scalar(evaluate(s, batch, binding), batch.any_complex());
          },
          py::arg("data"), py::arg("binding") = Binding{})
      .def("__repr__", [](const EstimatorSpec& s) { return "<Spec " + s.name + ": " + s.formula() + ">"; });

  m.def(
      "derive",
      [](const std::vector<std::string>& slots, std::vector<std::string> zero_mean, Pairs zero_cov,
         bool gauss_optimal, std::string name) {
        const ConditionSet c = make_conditions(std::move(zero_mean), std::move(zero_cov));
        return gauss_optimal ? gauss_optimize(slots, c, std::move(name)) : derive_estimator(slots, c, std::move(name));
      },
      py::arg("slots"), py::arg("zero_mean") = std::vector<std::string>{}, py::arg("zero_cov") = Pairs{},
      py::arg("gauss_optimal") = false, py::arg("name") = "",
      "Unbiased estimator of the joint cumulant of `slots` ('a*' is a conjugate).");

  m.def("estimator", [](std::string_view name) { return registry_entry(name).spec(); }, py::arg("name"));

  m.def("registry", [] {
    py::list out;
    for (const auto& e : registry()) {
      py::dict d;
      d["name"] = e.name;
      d["slots"] = e.slots;
      d["zero_mean"] = e.conditions.zero_mean;
      d["zero_cov"] = e.conditions.zero_cov;
      d["gauss_optimized"] = e.gauss_optimized;
      d["min_m"] = e.spec().min_m;
      d["summary"] = e.summary;
      out.append(d);
    }
    return out;
  });

  m.def(
      "select",
      [](const std::vector<std::string>& slots, std::vector<std::string> zero_mean, Pairs zero_cov,
         bool prefer_gauss_optimal) {
        const Selection s =
            select_estimator(slots, make_conditions(std::move(zero_mean), std::move(zero_cov)), prefer_gauss_optimal);
        return std::make_pair(s.entry->name, s.renaming);
      },
      py::arg("slots"), py::arg("zero_mean") = std::vector<std::string>{}, py::arg("zero_cov") = Pairs{},
      py::arg("prefer_gauss_optimal") = false,
      "Name of the most reduced registry estimator and its variable renaming.");

  m.def(
      "estimate",
      [](std::string_view estimator, const py::dict& data) {
        const EstimatorRef ref = parse_estimator_ref(estimator);
        const SampleBatch batch = to_batch(data);
        return scalar(evaluate(ref.entry->spec(), batch, ref.binding), batch.any_complex());
      },
      py::arg("estimator"), py::arg("data"),
      "Registry estimator such as 'c3c' or 'c3a(x,x,z)' on a mapping of column name to array.");

  m.def(
      "plug_in_variance",
      [](std::string_view name, const std::map<std::string, double>& values, long m, bool gaussian) {
        NumericCumulants numeric;
        for (const auto& [key, v] : values) {
          std::vector<std::string> labels;
          std::string item;
          for (char ch : key) {
            if (ch == ',') {
              labels.push_back(item);
              item.clear();
            } else if (ch != ' ') {
              item += ch;
            }
          }
          labels.push_back(item);
          std::sort(labels.begin(), labels.end());
          numeric[labels] = v;
        }
        const PlugInVariance p = plug_in_variance(name, numeric, m, gaussian);
        return std::make_pair(p.scaled, p.variance);
      },
      py::arg("name"), py::arg("cumulants"), py::arg("m"), py::arg("gaussian") = false,
      "(m V, V) of a registry estimator; cumulants keyed like 'x,x' or 'x,x,x,x'.");

  m.def(
      "simulate",
      [](const std::vector<std::string>& estimators, long m, long repeats, const std::string& process, int dimension,
         double mean, double variance, double lambda, std::uint64_t seed, unsigned threads) {
        const ProcessSpec proc = make_process(process, dimension, mean, variance, lambda, seed);
        std::vector<EstimatorRef> refs;
        for (const auto& e : estimators) refs.push_back(parse_estimator_ref(e));
        ExperimentOptions options;
        options.threads = threads;
        ExperimentReport report;
        {
          py::gil_scoped_release release;
          report = run_experiment(proc, refs, m, repeats, options);
        }
        py::list out;
        for (const auto& s : report.estimators) out.append(summary_dict(s, m));
        return out;
      },
      py::arg("estimators"), py::arg("m"), py::arg("repeats"), py::arg("process") = "gaussian",
      py::arg("dimension") = 1, py::arg("mean") = 0.0, py::arg("variance") = 1.0, py::arg("lam") = 25.0,
      py::arg("seed") = 0, py::arg("threads") = 0,
      "Repeated estimates on batches of m draws; one summary dict per estimator.");

  m.def(
      "sample",
      [](long m, const std::string& process, int dimension, double mean, double variance, double lambda,
         std::uint64_t seed, std::uint64_t stream) {
        const SampleBatch batch = sample(make_process(process, dimension, mean, variance, lambda, seed), m, stream);
        py::dict out;
        for (const auto& c : batch.columns()) {
          if (!c.is_complex()) {
            out[py::str(c.name)] = py::array_t<double>(static_cast<py::ssize_t>(c.re.size()), c.re.data());
            continue;
          }
          py::array_t<std::complex<double>> z(static_cast<py::ssize_t>(c.re.size()));
          for (std::size_t i = 0; i < c.re.size(); ++i) z.mutable_at(static_cast<py::ssize_t>(i)) = {c.re[i], c.im[i]};
          out[py::str(c.name)] = z;
        }
        return out;
      },
      py::arg("m"), py::arg("process") = "gaussian", py::arg("dimension") = 1, py::arg("mean") = 0.0,
      py::arg("variance") = 1.0, py::arg("lam") = 25.0, py::arg("seed") = 0, py::arg("stream") = 0);

  m.def(
      "exact_cumulant",
      [](const py::sequence& points, const py::sequence& probabilities, const std::vector<int>& coordinates) {
        std::vector<std::vector<mpq_class>> pts;
        for (const auto& row : points) {
          std::vector<mpq_class> r;
          for (const auto& v : py::reinterpret_borrow<py::sequence>(row)) r.push_back(to_mpq(v));
          pts.push_back(std::move(r));
        }
        std::vector<mpq_class> probs;
        for (const auto& p : probabilities) probs.push_back(to_mpq(p));
        return to_fraction(exact_cumulant(FiniteDistribution(std::move(pts), std::move(probs)), coordinates));
      },
      py::arg("points"), py::arg("probabilities"), py::arg("coordinates"),
      "Exact joint cumulant of a finite distribution given by rational points and probabilities.");

  m.def(
      "smith_cumulants",
      [](const py::sequence& moments) {
        std::vector<mpq_class> raw;
        for (const auto& v : moments) raw.push_back(to_mpq(v));
        py::list out;
        for (const auto& c : smith_univariate_cumulants(raw)) out.append(to_fraction(c));
        return out;
      },
      py::arg("moments"), "Univariate cumulants C1..CN from raw moments M1..MN.");
}
