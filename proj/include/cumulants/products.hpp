#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "cumulants/partitions.hpp"
#include "cumulants/polynomial.hpp"
#include "cumulants/rational_fn.hpp"

namespace cumulants {

/// Index of a variable (x, y, a, a*, ...) within an estimator's label table.
using Label = int;

/// A sorted multiset of labels: the argument list of one moment, cumulant or
/// sample-mean factor, e.g. {x, x, z} for <x^2 z>.
using Block = std::vector<Label>;

inline Block make_block(Block labels) {
  std::sort(labels.begin(), labels.end());
  return labels;
}

struct MeanTag {};
struct MomentTag {};
struct CumulantTag {};

/// Commutative product of block factors in canonical order (larger blocks
/// first, then lexicographic). The tag fixes what a factor means: a sample
/// mean, an expectation or a joint cumulant.
template <class Tag>
class Product {
 public:
  Product() = default;
  explicit Product(std::vector<Block> blocks) : blocks_(std::move(blocks)) {
    for (auto& b : blocks_) std::sort(b.begin(), b.end());
    std::sort(blocks_.begin(), blocks_.end(), block_precedes);
  }

  [[nodiscard]] const std::vector<Block>& blocks() const { return blocks_; }
  [[nodiscard]] bool empty() const { return blocks_.empty(); }
  [[nodiscard]] std::size_t slot_count() const {
    std::size_t n = 0;
    for (const auto& b : blocks_) n += b.size();
    return n;
  }
  /// All labels with multiplicity, sorted.
  [[nodiscard]] Block labels() const {
    Block all;
    for (const auto& b : blocks_) all.insert(all.end(), b.begin(), b.end());
    std::sort(all.begin(), all.end());
    return all;
  }

  [[nodiscard]] Product times(const Product& other) const {
    std::vector<Block> merged = blocks_;
    merged.insert(merged.end(), other.blocks_.begin(), other.blocks_.end());
    return Product(std::move(merged));
  }

  friend bool operator==(const Product& a, const Product& b) { return a.blocks_ == b.blocks_; }
  /// Canonical total order: coarser size profiles first.
  friend bool operator<(const Product& a, const Product& b) {
    const auto& x = a.blocks_;
    const auto& y = b.blocks_;
    for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i)
      if (x[i].size() != y[i].size()) return x[i].size() > y[i].size();
    if (x.size() != y.size()) return x.size() < y.size();
    return x < y;
  }

 private:
  std::vector<Block> blocks_;
};

/// Product of sample means, e.g. mean(xy) mean(z).
using MeanProductTerm = Product<MeanTag>;
/// Product of expectations, e.g. <xy><z>.
using MomentProduct = Product<MomentTag>;
/// Product of joint cumulants, e.g. C2(x,y) C1(z).
using CumulantProduct = Product<CumulantTag>;

inline bool is_zero(const mpq_class& c) { return sgn(c) == 0; }
inline bool is_zero(const Polynomial& c) { return c.is_zero(); }
inline bool is_zero(const RationalFn& c) { return c.is_zero(); }

/// Sparse linear combination of products with exact coefficients. Zero
/// coefficients are never stored.
template <class Tag, class Coeff>
class LinearCombination {
 public:
  using Key = Product<Tag>;
  using Map = std::map<Key, Coeff>;

  LinearCombination() = default;
  static LinearCombination single(Key key, Coeff coeff) {
    LinearCombination r;
    r.add(std::move(key), std::move(coeff));
    return r;
  }

  void add(const Key& key, const Coeff& coeff) {
    if (is_zero(coeff)) return;
    auto [it, inserted] = terms_.try_emplace(key, coeff);
    if (!inserted) {
      it->second += coeff;
      if (is_zero(it->second)) terms_.erase(it);
    }
  }

  LinearCombination& operator+=(const LinearCombination& rhs) {
    for (const auto& [k, c] : rhs.terms_) add(k, c);
    return *this;
  }
  LinearCombination& operator-=(const LinearCombination& rhs) {
    for (const auto& [k, c] : rhs.terms_) add(k, -c);
    return *this;
  }
  LinearCombination& operator*=(const Coeff& factor) {
    if (is_zero(factor)) {
      terms_.clear();
      return *this;
    }
    for (auto& [k, c] : terms_) c *= factor;
    return *this;
  }

  friend LinearCombination operator*(const LinearCombination& a, const LinearCombination& b) {
    LinearCombination r;
    for (const auto& [ka, ca] : a.terms_)
      for (const auto& [kb, cb] : b.terms_) r.add(ka.times(kb), ca * cb);
    return r;
  }

  template <class Fn>
  [[nodiscard]] LinearCombination filtered(Fn keep) const {
    LinearCombination r;
    for (const auto& [k, c] : terms_)
      if (keep(k)) r.terms_.emplace(k, c);
    return r;
  }

  [[nodiscard]] const Map& terms() const { return terms_; }
  [[nodiscard]] bool is_zero_expr() const { return terms_.empty(); }
  [[nodiscard]] std::size_t size() const { return terms_.size(); }
  [[nodiscard]] Coeff coefficient(const Key& key) const {
    auto it = terms_.find(key);
    return it == terms_.end() ? Coeff{} : it->second;
  }

  friend bool operator==(const LinearCombination& a, const LinearCombination& b) { return a.terms_ == b.terms_; }

 private:
  Map terms_;
};

/// Renders a product such as "<xy><z>" or "C(x,y)C(z)" given label names.
std::string format_moment_product(const MomentProduct& p, const std::vector<std::string>& names);
std::string format_mean_product(const MeanProductTerm& p, const std::vector<std::string>& names);
std::string format_cumulant_product(const CumulantProduct& p, const std::vector<std::string>& names);

/// Reads back the printed notation: signed terms "coeff factor factor ...",
/// where coeff is anything parse_rational accepts (optional, default 1) and
/// a factor is "mean(x^2z)" or "C2(x,y)", optionally raised as "^k". Labels
/// are matched against `names` (longest name first). Throws
/// std::invalid_argument on malformed text or unknown names.
LinearCombination<MeanTag, RationalFn> parse_mean_expr(std::string_view text, const std::vector<std::string>& names);
LinearCombination<CumulantTag, RationalFn> parse_cumulant_expr(std::string_view text,
                                                               const std::vector<std::string>& names);

}  // namespace cumulants
