#include <json.hpp>

#include "cumulants/derivation.hpp"

namespace cumulants {
namespace {

using nlohmann::json;

json polynomial_to_json(const Polynomial& p) {
  json out = json::array();
  for (const auto& c : p.coefficients()) out.push_back(c.get_str());
  return out;
}

Polynomial polynomial_from_json(const json& j) {
  std::vector<mpz_class> coeffs;
  for (const auto& c : j) coeffs.emplace_back(c.get<std::string>());
  return Polynomial(std::move(coeffs));
}

json pairs_to_json(const std::vector<std::pair<std::string, std::string>>& pairs) {
  json out = json::array();
  for (const auto& [a, b] : pairs) out.push_back({a, b});
  return out;
}

std::vector<std::pair<std::string, std::string>> pairs_from_json(const json& j) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& p : j) out.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
  return out;
}

}  // namespace

std::string serialize_spec(const EstimatorSpec& spec) {
  json terms = json::array();
  for (const auto& [term, coeff] : spec.terms.terms())
    terms.push_back({{"blocks", term.blocks()},
                     {"numerator", polynomial_to_json(coeff.numerator())},
                     {"denominator", polynomial_to_json(coeff.denominator())}});
  const json doc = {{"name", spec.name},
                    {"order", spec.order()},
                    {"labels", spec.labels},
                    {"slots", spec.slots},
                    {"conditions",
                     {{"zero_mean", spec.conditions.zero_mean},
                      {"zero_cov", pairs_to_json(spec.conditions.zero_cov)},
                      {"conjugate_pairs", pairs_to_json(spec.conditions.conjugate_pairs)}}},
                    {"terms", terms},
                    {"min_m", spec.min_m}};
  return doc.dump(2);
}

EstimatorSpec parse_spec(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed estimator document: ") + e.what());
  }
  try {
    EstimatorSpec spec;
    spec.name = doc.at("name").get<std::string>();
    spec.labels = doc.at("labels").get<std::vector<std::string>>();
    spec.slots = doc.at("slots").get<std::vector<Label>>();
    const auto& cond = doc.at("conditions");
    spec.conditions.zero_mean = cond.at("zero_mean").get<std::vector<std::string>>();
    spec.conditions.zero_cov = pairs_from_json(cond.at("zero_cov"));
    spec.conditions.conjugate_pairs = pairs_from_json(cond.at("conjugate_pairs"));
    for (const auto& t : doc.at("terms"))
      spec.terms.add(MeanProductTerm(t.at("blocks").get<std::vector<Block>>()),
                     RationalFn(polynomial_from_json(t.at("numerator")), polynomial_from_json(t.at("denominator"))));
    spec.min_m = doc.at("min_m").get<long>();
    if (doc.at("order").get<int>() != spec.order()) throw std::invalid_argument("order does not match the slot count");
    for (Label l : spec.slots)
      if (l < 0 || static_cast<std::size_t>(l) >= spec.labels.size()) throw std::invalid_argument("slot label out of range");
    return spec;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed estimator document: ") + e.what());
  }
}

}  // namespace cumulants
