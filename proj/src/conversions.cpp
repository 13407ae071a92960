#include "cumulants/conversions.hpp"

#include <map>
#include <mutex>
#include <numeric>
#include <string>

namespace cumulants {
namespace {

void check_order(const Block& labels) {
  if (labels.empty() || labels.size() > static_cast<std::size_t>(kMaxConversionOrder))
    throw std::out_of_range("conversion order " + std::to_string(labels.size()) + " outside [1, " +
                            std::to_string(kMaxConversionOrder) + "]");
}

// Both recursions only depend on the label multiset, so results are memoized
// on the sorted block. References into std::map stay valid across inserts.
template <class Expr>
class Memo {
 public:
  template <class Compute>
  const Expr& get(const Block& key, Compute compute) {
    {
      std::lock_guard lock(mutex_);
      auto it = table_.find(key);
      if (it != table_.end()) return it->second;
    }
    Expr value = compute();
    std::lock_guard lock(mutex_);
    return table_.try_emplace(key, std::move(value)).first->second;
  }

 private:
  std::mutex mutex_;
  std::map<Block, Expr> table_;
};

Memo<MomentExpr>& cumulant_memo() {
  static Memo<MomentExpr> memo;
  return memo;
}

Memo<CumulantExpr>& moment_memo() {
  static Memo<CumulantExpr> memo;
  return memo;
}

Block pick(const Block& labels, const std::vector<int>& positions) {
  Block out;
  out.reserve(positions.size());
  for (int p : positions) out.push_back(labels[static_cast<std::size_t>(p)]);
  return make_block(std::move(out));
}

}  // namespace

const MomentExpr& cumulants_from_moments(const Block& unsorted) {
  const Block labels = make_block(unsorted);
  check_order(labels);
  return cumulant_memo().get(labels, [&] {
    const int n = static_cast<int>(labels.size());
    MomentExpr result = MomentExpr::single(MomentProduct({labels}), mpq_class(1));
    std::vector<int> positions(static_cast<std::size_t>(n));
    std::iota(positions.begin(), positions.end(), 0);
    for (int nu = 1; nu < n; ++nu) {
      mpq_class weight(nu, n);
      weight.canonicalize();
      for (const auto& split : enumerate_partitions(positions, nu)) {
        MomentExpr term = cumulants_from_moments(pick(labels, split.chosen)) *
                          MomentExpr::single(MomentProduct({pick(labels, split.remainder)}), mpq_class(1));
        term *= -weight;
        result += term;
      }
    }
    return result;
  });
}

const CumulantExpr& moments_from_cumulants(const Block& unsorted) {
  const Block labels = make_block(unsorted);
  check_order(labels);
  return moment_memo().get(labels, [&] {
    const int n = static_cast<int>(labels.size());
    CumulantExpr result = CumulantExpr::single(CumulantProduct({labels}), mpq_class(1));
    std::vector<int> positions(static_cast<std::size_t>(n));
    std::iota(positions.begin(), positions.end(), 0);
    for (int nu = 1; nu < n; ++nu) {
      mpq_class weight(nu, n);
      weight.canonicalize();
      for (const auto& split : enumerate_partitions(positions, nu)) {
        CumulantExpr term = CumulantExpr::single(CumulantProduct({pick(labels, split.chosen)}), mpq_class(1)) *
                            moments_from_cumulants(pick(labels, split.remainder));
        term *= weight;
        result += term;
      }
    }
    return result;
  });
}

FiniteDistribution::FiniteDistribution(std::vector<std::vector<mpq_class>> points,
                                       std::vector<mpq_class> probabilities)
    : points_(std::move(points)), probs_(std::move(probabilities)) {
  if (points_.empty() || points_.size() != probs_.size())
    throw std::invalid_argument("finite distribution needs one probability per support point");
  dimension_ = static_cast<int>(points_.front().size());
  mpq_class total = 0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (static_cast<int>(points_[i].size()) != dimension_)
      throw std::invalid_argument("support points of unequal dimension");
    if (probs_[i] < 0) throw std::invalid_argument("negative probability");
    total += probs_[i];
  }
  if (total != 1) throw std::invalid_argument("probabilities sum to " + total.get_str() + ", not 1");
}

mpq_class FiniteDistribution::moment(std::span<const int> coordinates) const {
  for (int c : coordinates)
    if (c < 0 || c >= dimension_)
      throw std::out_of_range("coordinate " + std::to_string(c) + " outside dimension " + std::to_string(dimension_));
  mpq_class acc = 0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    mpq_class prod = probs_[i];
    for (int c : coordinates) prod *= points_[i][static_cast<std::size_t>(c)];
    acc += prod;
  }
  return acc;
}

FiniteDistribution FiniteDistribution::independent_sum(const FiniteDistribution& other) const {
  if (other.dimension_ != dimension_) throw std::invalid_argument("independent sum of unequal dimensions");
  std::vector<std::vector<mpq_class>> pts;
  std::vector<mpq_class> probs;
  for (std::size_t i = 0; i < points_.size(); ++i)
    for (std::size_t j = 0; j < other.points_.size(); ++j) {
      std::vector<mpq_class> p(points_[i]);
      for (std::size_t k = 0; k < p.size(); ++k) p[k] += other.points_[j][k];
      pts.push_back(std::move(p));
      probs.push_back(probs_[i] * other.probs_[j]);
    }
  return {std::move(pts), std::move(probs)};
}

FiniteDistribution FiniteDistribution::independent_join(const FiniteDistribution& other) const {
  std::vector<std::vector<mpq_class>> pts;
  std::vector<mpq_class> probs;
  for (std::size_t i = 0; i < points_.size(); ++i)
    for (std::size_t j = 0; j < other.points_.size(); ++j) {
      std::vector<mpq_class> p(points_[i]);
      p.insert(p.end(), other.points_[j].begin(), other.points_[j].end());
      pts.push_back(std::move(p));
      probs.push_back(probs_[i] * other.probs_[j]);
    }
  return {std::move(pts), std::move(probs)};
}

FiniteDistribution FiniteDistribution::affine(int coordinate, const mpq_class& scale, const mpq_class& shift) const {
  if (coordinate < 0 || coordinate >= dimension_) throw std::out_of_range("affine map on a missing coordinate");
  auto pts = points_;
  for (auto& p : pts) p[static_cast<std::size_t>(coordinate)] = p[static_cast<std::size_t>(coordinate)] * scale + shift;
  return {std::move(pts), probs_};
}

mpq_class evaluate_moments(const MomentExpr& expr, const FiniteDistribution& dist) {
  mpq_class total = 0;
  for (const auto& [product, coeff] : expr.terms()) {
    mpq_class value = coeff;
    for (const auto& block : product.blocks()) value *= dist.moment(block);
    total += value;
  }
  return total;
}

mpq_class exact_cumulant(const FiniteDistribution& dist, std::span<const int> slots) {
  Block labels(slots.begin(), slots.end());
  for (int s : labels)
    if (s < 0 || s >= dist.dimension())
      throw std::out_of_range("slot " + std::to_string(s) + " exceeds dimension " + std::to_string(dist.dimension()));
  return evaluate_moments(cumulants_from_moments(labels), dist);
}

std::vector<mpq_class> smith_univariate_cumulants(std::span<const mpq_class> moments) {
  if (moments.size() > static_cast<std::size_t>(kMaxConversionOrder))
    throw std::out_of_range("at most " + std::to_string(kMaxConversionOrder) + " moments supported");
  std::vector<mpq_class> cumulants;
  cumulants.reserve(moments.size());
  for (std::size_t n = 1; n <= moments.size(); ++n) {
    mpq_class c = moments[n - 1];
    for (std::size_t nu = 1; nu < n; ++nu)
      c -= mpq_class(static_cast<long>(binomial(static_cast<int>(n - 1), static_cast<int>(nu - 1)))) * cumulants[nu - 1] *
           moments[n - nu - 1];
    cumulants.push_back(c);
  }
  return cumulants;
}

}  // namespace cumulants
