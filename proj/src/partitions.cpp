#include "cumulants/partitions.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace cumulants {

std::vector<SubsetSplit> enumerate_partitions(std::span<const int> indices, int nu) {
  const int n = static_cast<int>(indices.size());
  if (nu < 0 || nu > n)
    throw std::out_of_range("subset size " + std::to_string(nu) + " outside [0, " + std::to_string(n) + "]");
  std::vector<SubsetSplit> out;
  out.reserve(static_cast<std::size_t>(binomial(n, nu)));
  std::vector<int> pick(static_cast<std::size_t>(nu));
  for (int i = 0; i < nu; ++i) pick[static_cast<std::size_t>(i)] = i;
  for (;;) {
    SubsetSplit split;
    std::size_t next = 0;
    for (int i = 0; i < n; ++i) {
      if (next < pick.size() && pick[next] == i) {
        split.chosen.push_back(indices[static_cast<std::size_t>(i)]);
        ++next;
      } else {
        split.remainder.push_back(indices[static_cast<std::size_t>(i)]);
      }
    }
    out.push_back(std::move(split));
    // Advance to the next combination in lexicographic order.
    int k = nu - 1;
    while (k >= 0 && pick[static_cast<std::size_t>(k)] == n - nu + k) --k;
    if (k < 0) break;
    ++pick[static_cast<std::size_t>(k)];
    for (int j = k + 1; j < nu; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

bool block_precedes(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return a.size() > b.size();
  return a < b;
}

SlotPartition::SlotPartition(std::vector<std::vector<int>> blocks) : blocks_(std::move(blocks)) {
  std::vector<int> seen;
  for (auto& block : blocks_) {
    if (block.empty()) throw std::invalid_argument("slot partition with an empty block");
    std::sort(block.begin(), block.end());
    seen.insert(seen.end(), block.begin(), block.end());
  }
  std::sort(seen.begin(), seen.end());
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (seen[i] != static_cast<int>(i)) throw std::invalid_argument("slot partition blocks overlap or leave gaps");
  slot_count_ = static_cast<int>(seen.size());
  std::sort(blocks_.begin(), blocks_.end(), block_precedes);
}

bool SlotPartition::refines(const SlotPartition& coarser) const {
  std::vector<int> owner(static_cast<std::size_t>(coarser.slot_count_), -1);
  for (std::size_t b = 0; b < coarser.blocks_.size(); ++b)
    for (int slot : coarser.blocks_[b]) owner[static_cast<std::size_t>(slot)] = static_cast<int>(b);
  for (const auto& block : blocks_)
    for (int slot : block)
      if (owner[static_cast<std::size_t>(slot)] != owner[static_cast<std::size_t>(block.front())]) return false;
  return true;
}

bool partition_precedes(const SlotPartition& a, const SlotPartition& b) {
  const auto& x = a.blocks();
  const auto& y = b.blocks();
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i)
    if (x[i].size() != y[i].size()) return x[i].size() > y[i].size();
  if (x.size() != y.size()) return x.size() < y.size();
  return x < y;
}

std::vector<SlotPartition> set_partitions(int n) {
  if (n < 0) throw std::out_of_range("negative slot count");
  // Restricted growth strings enumerate each set partition exactly once.
  std::vector<SlotPartition> out;
  std::vector<int> rgs(static_cast<std::size_t>(n), 0);
  auto emit = [&] {
    int count = 0;
    for (int v : rgs) count = std::max(count, v + 1);
    std::vector<std::vector<int>> blocks(static_cast<std::size_t>(count));
    for (int i = 0; i < n; ++i) blocks[static_cast<std::size_t>(rgs[static_cast<std::size_t>(i)])].push_back(i);
    out.emplace_back(std::move(blocks));
  };
  if (n == 0) {
    out.emplace_back(std::vector<std::vector<int>>{});
    return out;
  }
  for (;;) {
    emit();
    int i = n - 1;
    for (; i > 0; --i) {
      int max_prefix = 0;
      for (int j = 0; j < i; ++j) max_prefix = std::max(max_prefix, rgs[static_cast<std::size_t>(j)]);
      if (rgs[static_cast<std::size_t>(i)] <= max_prefix) {
        ++rgs[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < n; ++j) rgs[static_cast<std::size_t>(j)] = 0;
        break;
      }
    }
    if (i == 0) break;
  }
  std::sort(out.begin(), out.end(), partition_precedes);
  return out;
}

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace cumulants
