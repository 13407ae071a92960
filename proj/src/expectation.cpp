#include "cumulants/expectation.hpp"

#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <stdexcept>

namespace cumulants {
namespace {

class NumeratorMemo {
 public:
  const ScaledMoments* find(const MeanProductTerm& key) {
    std::lock_guard lock(mutex_);
    auto it = table_.find(key);
    return it == table_.end() ? nullptr : &it->second;
  }
  const ScaledMoments& insert(const MeanProductTerm& key, ScaledMoments value) {
    std::lock_guard lock(mutex_);
    return table_.try_emplace(key, std::move(value)).first->second;
  }

 private:
  std::mutex mutex_;
  std::map<MeanProductTerm, ScaledMoments> table_;
};

NumeratorMemo& numerator_memo() {
  static NumeratorMemo memo;
  return memo;
}

Polynomial m_power(std::size_t n) {
  std::vector<mpz_class> c(n + 1, 0);
  c[n] = 1;
  return Polynomial(std::move(c));
}

}  // namespace

const ScaledMoments& mean_product_numerator(const MeanProductTerm& term) {
  if (const auto* hit = numerator_memo().find(term)) return *hit;

  const auto& blocks = term.blocks();
  const int n = static_cast<int>(blocks.size());
  ScaledMoments result;
  if (n == 0) {
    result.add(MomentProduct(), Polynomial(1));
    return numerator_memo().insert(term, std::move(result));
  }
  // Sample index of the first factor either coincides with the indices of
  // the chosen factors (merged into one expectation) or differs from all of
  // them; the remaining factors draw from the other m - 1 samples.
  std::vector<int> rest(static_cast<std::size_t>(n - 1));
  std::iota(rest.begin(), rest.end(), 1);
  const Polynomial m = Polynomial::m();
  for (int nu = 0; nu < n; ++nu) {
    for (const auto& split : enumerate_partitions(rest, nu)) {
      Block merged = blocks.front();
      for (int i : split.chosen) merged.insert(merged.end(), blocks[static_cast<std::size_t>(i)].begin(),
                                               blocks[static_cast<std::size_t>(i)].end());
      std::vector<Block> remaining;
      for (int j : split.remainder) remaining.push_back(blocks[static_cast<std::size_t>(j)]);
      const MomentProduct head({make_block(std::move(merged))});
      const ScaledMoments& tail = mean_product_numerator(MeanProductTerm(std::move(remaining)));
      for (const auto& [moments, poly] : tail.terms()) result.add(head.times(moments), m * poly.shifted(1));
    }
  }
  return numerator_memo().insert(term, std::move(result));
}

ExpectedMoments expand_mean_product(const MeanProductTerm& term) {
  if (term.slot_count() > kMaxMeanProductSlots)
    throw std::out_of_range("mean product with " + std::to_string(term.slot_count()) + " slots exceeds the limit of " +
                            std::to_string(kMaxMeanProductSlots));
  const Polynomial scale = m_power(term.blocks().size());
  ExpectedMoments out;
  for (const auto& [moments, poly] : mean_product_numerator(term).terms()) out.add(moments, RationalFn(poly, scale));
  return out;
}

int MultiplicityMatrix::column_of(const MomentProduct& p) const {
  for (std::size_t j = 0; j < columns.size(); ++j)
    if (columns[j] == p) return static_cast<int>(j);
  return -1;
}

RationalFn MultiplicityMatrix::determinant() const {
  RationalFn det(1);
  for (std::size_t i = 0; i < entries.size(); ++i) det *= entries[i][i];
  return det;
}

MultiplicityMatrix multiplicity_matrix(const std::vector<Label>& slot_labels) {
  const int n = static_cast<int>(slot_labels.size());
  if (n < 1) throw std::invalid_argument("multiplicity matrix needs at least one slot");
  std::set<MomentProduct> distinct;
  for (const auto& partition : set_partitions(n)) {
    std::vector<Block> blocks;
    for (const auto& block : partition.blocks()) {
      Block labels;
      for (int slot : block) labels.push_back(slot_labels[static_cast<std::size_t>(slot)]);
      blocks.push_back(make_block(std::move(labels)));
    }
    distinct.insert(MomentProduct(std::move(blocks)));
  }
  MultiplicityMatrix a;
  a.columns.assign(distinct.begin(), distinct.end());
  for (const auto& c : a.columns) a.rows.emplace_back(c.blocks());
  a.entries.assign(a.rows.size(), std::vector<RationalFn>(a.columns.size()));
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const ExpectedMoments expansion = expand_mean_product(a.rows[i]);
    for (const auto& [moments, coeff] : expansion.terms()) {
      const int j = a.column_of(moments);
      if (j < 0) throw std::logic_error("mean-product expansion left the slot partition lattice");
      a.entries[i][static_cast<std::size_t>(j)] = coeff;
    }
  }
  return a;
}

MultiplicityMatrix build_multiplicity_matrix(int order) {
  if (order < 2 || order > 4) throw std::out_of_range("multiplicity matrices are built for orders 2 to 4");
  std::vector<Label> labels(static_cast<std::size_t>(order));
  std::iota(labels.begin(), labels.end(), 0);
  return multiplicity_matrix(labels);
}

MultiplicityMatrix reduced_matrix(const std::vector<Label>& slot_labels) { return multiplicity_matrix(slot_labels); }

std::vector<RationalFn> solve_left(const MultiplicityMatrix& a, const std::vector<RationalFn>& gamma) {
  const std::size_t n = a.size();
  if (gamma.size() != n) throw std::invalid_argument("gamma length does not match the matrix");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!a.entries[i][j].is_zero()) throw std::logic_error("multiplicity matrix is not lower-triangular");
  // r_j A_jj + sum_{i > j} r_i A_ij = gamma_j, solved from the last column.
  std::vector<RationalFn> r(n);
  for (std::size_t j = n; j-- > 0;) {
    RationalFn acc = gamma[j];
    for (std::size_t i = j + 1; i < n; ++i)
      if (!r[i].is_zero() && !a.entries[i][j].is_zero()) acc -= r[i] * a.entries[i][j];
    r[j] = acc / a.entries[j][j];
  }
  return r;
}

}  // namespace cumulants
