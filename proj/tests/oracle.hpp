#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <random>
#include <vector>

#include <gmpxx.h>

#include "cumulants/conversions.hpp"
#include "cumulants/derivation.hpp"

namespace cumulants::testing {

using Sample = std::vector<const std::vector<mpq_class>*>;

/// Exact expectation of f over all m-tuples of i.i.d. draws from dist.
inline mpq_class brute_expectation(const FiniteDistribution& dist, int m,
                                   const std::function<mpq_class(const Sample&)>& f) {
  const std::size_t k = dist.support_size();
  std::vector<std::size_t> idx(static_cast<std::size_t>(m), 0);
  Sample rows(static_cast<std::size_t>(m));
  mpq_class total = 0;
  while (true) {
    mpq_class weight = 1;
    for (std::size_t j = 0; j < idx.size(); ++j) {
      rows[j] = &dist.points()[idx[j]];
      weight *= dist.probabilities()[idx[j]];
    }
    total += weight * f(rows);
    std::size_t pos = 0;
    while (pos < idx.size() && ++idx[pos] == k) idx[pos++] = 0;
    if (pos == idx.size()) break;
  }
  return total;
}

/// Sample mean of the product of the given coordinates.
inline mpq_class sample_mean(const Sample& rows, const std::vector<int>& coords) {
  mpq_class acc = 0;
  for (const auto* row : rows) {
    mpq_class p = 1;
    for (int c : coords) p *= (*row)[static_cast<std::size_t>(c)];
    acc += p;
  }
  return acc / static_cast<long>(rows.size());
}

/// Three support points in `dimension` coordinates with small rational values.
inline FiniteDistribution random_three_point(std::mt19937& rng, int dimension) {
  std::uniform_int_distribution<int> value(-3, 4), den(1, 2), weight(1, 4);
  std::vector<std::vector<mpq_class>> pts(3);
  std::vector<int> w(3);
  int total = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (int d = 0; d < dimension; ++d) {
      mpq_class v(value(rng), den(rng));
      v.canonicalize();
      pts[i].push_back(v);
    }
    w[i] = weight(rng);
    total += w[i];
  }
  std::vector<mpq_class> probs;
  for (int wi : w) {
    mpq_class p(wi, total);
    p.canonicalize();
    probs.push_back(p);
  }
  return {std::move(pts), std::move(probs)};
}

}  // namespace cumulants::testing


namespace cumulants::testing {

/// Exact complex rational.
struct ExactComplex {
  mpq_class re = 0;
  mpq_class im = 0;

  friend ExactComplex operator+(const ExactComplex& a, const ExactComplex& b) { return {a.re + b.re, a.im + b.im}; }
  friend ExactComplex operator*(const ExactComplex& a, const ExactComplex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend bool operator==(const ExactComplex& a, const ExactComplex& b) { return a.re == b.re && a.im == b.im; }
  friend std::ostream& operator<<(std::ostream& os, const ExactComplex& c) { return os << c.re << " + " << c.im << "i"; }
};

/// Coordinates of one variable inside a FiniteDistribution: the real part
/// and, for complex variables, the imaginary part (-1 when real).
struct Coords {
  int re = 0;
  int im = -1;
};

/// A distribution together with where each variable (by base name) lives.
struct Scenario {
  FiniteDistribution dist;
  std::map<std::string, Coords> coords;
};

inline std::string base_name(const std::string& n) {
  return n.size() > 1 && n.back() == '*' ? n.substr(0, n.size() - 1) : n;
}
inline bool is_conjugate(const std::string& n) { return n.size() > 1 && n.back() == '*'; }

inline ExactComplex value_of(const std::vector<mpq_class>& row, const Coords& c, bool conj) {
  ExactComplex v{row[static_cast<std::size_t>(c.re)], c.im < 0 ? mpq_class(0) : row[static_cast<std::size_t>(c.im)]};
  if (conj) v.im = -v.im;
  return v;
}

/// Exact joint cumulant of the spec's target slots, expanded multilinearly
/// into cumulants of real coordinates.
inline ExactComplex exact_target_cumulant(const EstimatorSpec& spec, const Scenario& s) {
  const auto names = spec.slot_names();
  const std::size_t n = names.size();
  ExactComplex total;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    ExactComplex factor{1, 0};
    std::vector<int> coords;
    bool skip = false;
    for (std::size_t i = 0; i < n; ++i) {
      const Coords& c = s.coords.at(base_name(names[i]));
      if (mask & (1u << i)) {
        if (c.im < 0) {
          skip = true;
          break;
        }
        factor = factor * ExactComplex{0, is_conjugate(names[i]) ? -1 : 1};
        coords.push_back(c.im);
      } else {
        coords.push_back(c.re);
      }
    }
    if (skip) continue;
    total = total + factor * ExactComplex{exact_cumulant(s.dist, coords), 0};
  }
  return total;
}

/// Exact expectation of the estimator over all m-tuples of draws.
inline ExactComplex exact_estimator_mean(const EstimatorSpec& spec, const Scenario& s, int m) {
  std::vector<std::pair<Coords, bool>> label_coords;
  for (const auto& name : spec.labels) label_coords.emplace_back(s.coords.at(base_name(name)), is_conjugate(name));
  std::vector<std::pair<ExactComplex, const MeanProductTerm*>> terms;
  for (const auto& [term, coeff] : spec.terms.terms()) terms.emplace_back(ExactComplex{coeff.evaluate(m), 0}, &term);

  const std::size_t k = s.dist.support_size();
  std::vector<std::size_t> idx(static_cast<std::size_t>(m), 0);
  ExactComplex total;
  while (true) {
    mpq_class weight = 1;
    for (std::size_t j : idx) weight *= s.dist.probabilities()[j];
    ExactComplex value;
    for (const auto& [coeff, term] : terms) {
      ExactComplex prod = coeff;
      for (const auto& block : term->blocks()) {
        ExactComplex mean;
        for (std::size_t j : idx) {
          ExactComplex p{1, 0};
          for (Label l : block) {
            const auto& [c, conj] = label_coords[static_cast<std::size_t>(l)];
            p = p * value_of(s.dist.points()[j], c, conj);
          }
          mean = mean + p;
        }
        prod = prod * ExactComplex{mean.re / m, mean.im / m};
      }
      value = value + prod;
    }
    total = total + ExactComplex{weight * value.re, weight * value.im};
    std::size_t pos = 0;
    while (pos < idx.size() && ++idx[pos] == k) idx[pos++] = 0;
    if (pos == idx.size()) break;
  }
  return total;
}

/// Random finite distribution satisfying the spec's conditions. Variables in
/// a zero-covariance relation get mutually orthogonal centred directions;
/// a pair with C2(a,b) = 0 but C2(a,b*) free is built from the four points
/// {1, i, -1, -i} so that it stays correlated with the conjugate.
inline Scenario scenario_for(const EstimatorSpec& spec, std::mt19937& rng) {
  const ResolvedConditions rc = spec.resolved();
  std::vector<std::string> bases;
  for (const auto& n : spec.labels)
    if (std::find(bases.begin(), bases.end(), base_name(n)) == bases.end()) bases.push_back(base_name(n));
  const auto complex_base = [&](const std::string& b) { return rc.is_complex(rc.label(b)); };
  std::uniform_int_distribution<int> small(-3, 3), positive(1, 4);
  const auto nonzero = [&] {
    int v = 0;
    while (v == 0) v = small(rng);
    return mpq_class(v);
  };

  bool circular = false;
  std::set<std::string> isolated;
  for (std::size_t i = 0; i < spec.labels.size(); ++i)
    for (std::size_t j = i + 1; j < spec.labels.size(); ++j) {
      const Label a = static_cast<Label>(i), b = static_cast<Label>(j);
      if (!rc.zero_cov(a, b)) continue;
      if (base_name(spec.labels[i]) == base_name(spec.labels[j])) continue;
      if (rc.is_complex(b) && !rc.zero_cov(a, rc.conjugate(b))) circular = true;
      isolated.insert(base_name(spec.labels[i]));
      isolated.insert(base_name(spec.labels[j]));
    }

  Scenario s{FiniteDistribution({{0}}, {1}), {}};
  if (circular) {
    // Every variable is a complex multiple of u in {1, i, -1, -i}, plus an
    // offset when its mean is free.
    std::vector<std::vector<mpq_class>> pts(4);
    const int ure[4] = {1, 0, -1, 0}, uim[4] = {0, 1, 0, -1};
    int coord = 0;
    for (const auto& b : bases) {
      const mpq_class ar = nonzero(), ai = small(rng);
      const bool zm = rc.zero_mean(rc.label(b));
      const mpq_class sr = zm ? 0 : small(rng), si = zm ? 0 : small(rng);
      for (int p = 0; p < 4; ++p) {
        pts[static_cast<std::size_t>(p)].push_back(ar * ure[p] - ai * uim[p] + sr);
        pts[static_cast<std::size_t>(p)].push_back(ar * uim[p] + ai * ure[p] + si);
      }
      s.coords[b] = {coord, coord + 1};
      coord += 2;
    }
    s.dist = FiniteDistribution(std::move(pts), std::vector<mpq_class>(4, mpq_class(1, 4)));
    return s;
  }

  const std::size_t k = std::max<std::size_t>(3, isolated.size() + 1);
  std::vector<mpq_class> probs;
  int total = 0;
  std::vector<int> w;
  for (std::size_t i = 0; i < k; ++i) total += w.emplace_back(positive(rng));
  for (int wi : w) probs.emplace_back(wi, total), probs.back().canonicalize();
  const auto inner = [&](const std::vector<mpq_class>& u, const std::vector<mpq_class>& v) {
    mpq_class acc = 0;
    for (std::size_t i = 0; i < k; ++i) acc += probs[i] * u[i] * v[i];
    return acc;
  };
  const auto centred = [&](std::vector<mpq_class> v) {
    mpq_class mean = 0;
    for (std::size_t i = 0; i < k; ++i) mean += probs[i] * v[i];
    for (auto& e : v) e -= mean;
    return v;
  };
  const auto random_vector = [&] {
    std::vector<mpq_class> v(k);
    for (auto& e : v) e = small(rng);
    return v;
  };
  // Orthogonal centred directions for the isolated variables.
  std::vector<std::vector<mpq_class>> basis;
  while (basis.size() < isolated.size()) {
    auto v = centred(random_vector());
    for (const auto& e : basis) {
      const mpq_class f = inner(v, e) / inner(e, e);
      for (std::size_t i = 0; i < k; ++i) v[i] -= f * e[i];
    }
    if (inner(v, v) != 0) basis.push_back(std::move(v));
  }

  std::vector<std::vector<mpq_class>> pts(k);
  int coord = 0;
  std::size_t next_direction = 0;
  for (const auto& b : bases) {
    const bool zm = rc.zero_mean(rc.label(b));
    const int parts = complex_base(b) ? 2 : 1;
    std::vector<mpq_class> direction;
    if (isolated.contains(b)) direction = basis[next_direction++];
    for (int part = 0; part < parts; ++part) {
      std::vector<mpq_class> v;
      if (!direction.empty()) {
        const mpq_class scale = nonzero();
        for (const auto& e : direction) v.push_back(scale * e);
        if (!zm) {
          const mpq_class shift = small(rng);
          for (auto& e : v) e += shift;
        }
      } else {
        v = random_vector();
        if (zm) v = centred(v);
      }
      for (std::size_t i = 0; i < k; ++i) pts[i].push_back(v[i]);
    }
    s.coords[b] = {coord, parts == 2 ? coord + 1 : -1};
    coord += parts;
  }
  s.dist = FiniteDistribution(std::move(pts), std::move(probs));
  return s;
}

}  // namespace cumulants::testing
