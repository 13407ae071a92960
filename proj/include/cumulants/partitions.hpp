#pragma once

#include <span>
#include <vector>

namespace cumulants {

/// One way of splitting an index set into a chosen subset and its remainder.
struct SubsetSplit {
  std::vector<int> chosen;
  std::vector<int> remainder;
  friend bool operator==(const SubsetSplit&, const SubsetSplit&) = default;
};

/// All binomial(|indices|, nu) splits of `indices` into a chosen subset of
/// size nu and the remainder. Chosen subsets are listed in lexicographic order
/// of their positions in `indices`; both halves keep the input order.
/// Throws std::out_of_range unless 0 <= nu <= |indices|.
std::vector<SubsetSplit> enumerate_partitions(std::span<const int> indices, int nu);

/// A set partition of the slot range {0, ..., n-1}.
class SlotPartition {
 public:
  /// Blocks must be disjoint and cover {0, ..., n-1}; throws otherwise.
  explicit SlotPartition(std::vector<std::vector<int>> blocks);

  [[nodiscard]] const std::vector<std::vector<int>>& blocks() const { return blocks_; }
  [[nodiscard]] int slot_count() const { return slot_count_; }
  /// True when every block of *this lies inside some block of `coarser`.
  [[nodiscard]] bool refines(const SlotPartition& coarser) const;

  friend bool operator==(const SlotPartition&, const SlotPartition&) = default;

 private:
  std::vector<std::vector<int>> blocks_;
  int slot_count_ = 0;
};

/// Canonical block order: larger blocks first, ties by smallest element.
bool block_precedes(const std::vector<int>& a, const std::vector<int>& b);

/// Canonical partition order: coarser size profiles first (sizes compared
/// descending, lexicographically), then blocks compared lexicographically.
bool partition_precedes(const SlotPartition& a, const SlotPartition& b);

/// Every set partition of n slots (Bell(n) of them), in canonical order.
std::vector<SlotPartition> set_partitions(int n);

long long binomial(int n, int k);

}  // namespace cumulants
