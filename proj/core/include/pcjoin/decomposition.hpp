#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "pcjoin/relation.hpp"

namespace pcj {

/// A split of a relation into one part per family X, certifying
/// DC(X, Y, achieved_degree) on every part.
struct Partitioning {
  ColumnSet y = 0;
  std::vector<ColumnSet> families;
  std::vector<Relation> parts;
  /// Family index of every row of the source relation.
  std::vector<std::uint32_t> part_of_row;
  std::uint64_t achieved_degree = 0;
};

/// Builds the parts for a row-to-family assignment and measures the
/// resulting maximum part degree.
Partitioning make_partitioning(const Relation& relation, std::span<const ColumnSet> families, ColumnSet y,
                               std::vector<std::uint32_t> part_of_row);

/// Throws a schema error unless every X in `families` satisfies X ⊆ Y ⊆ schema
/// and the family list is non-empty and duplicate-free.
void validate_families(const Relation& relation, std::span<const ColumnSet> families, ColumnSet y);

/// The distinct Y-projections ("groups") of a relation and, per family, the
/// dense id of each group's X-value ("node").
class GroupIndex {
 public:
  GroupIndex(const Relation& relation, std::span<const ColumnSet> families, ColumnSet y);

  std::size_t num_groups() const { return num_groups_; }
  std::size_t num_families() const { return families_.size(); }
  std::size_t num_nodes(std::size_t family) const { return node_first_.at(family).size() - 1; }
  ColumnSet family(std::size_t f) const { return families_[f]; }

  std::uint32_t node(std::size_t family, std::uint32_t group) const {
    return node_of_group_[group * families_.size() + family];
  }
  std::uint32_t group_of_row(std::size_t row) const { return identity_ ? static_cast<std::uint32_t>(row) : group_of_row_[row]; }
  std::span<const std::uint32_t> rows(std::uint32_t group) const {
    if (identity_) return {group_rows_.data() + group, 1};
    return {group_rows_.data() + group_first_row_[group], group_first_row_[group + 1] - group_first_row_[group]};
  }
  /// All groups whose X-value for `family` is `node`.
  std::span<const std::uint32_t> groups_of(std::size_t family, std::uint32_t node) const {
    const auto& first = node_first_[family];
    return {node_groups_[family].data() + first[node], first[node + 1] - first[node]};
  }
 private:
  std::vector<ColumnSet> families_;
  bool identity_ = false;
  std::size_t num_groups_ = 0;
  std::vector<std::uint32_t> group_of_row_;
  std::vector<std::uint32_t> group_first_row_;
  std::vector<std::uint32_t> group_rows_;
  std::vector<std::uint32_t> node_of_group_;
  std::vector<std::vector<std::uint32_t>> node_first_;
  std::vector<std::vector<std::uint32_t>> node_groups_;
};

/// Per-family bucket queues keyed by a node's live group count.
///
/// Buckets are LIFO stacks; a node with count 0 is absent.
/// Decrements are O(1) and the global minimum is found by scanning one
/// cursor per family.
class DegreeBucketQueue {
 public:
  struct Entry {
    std::size_t family = 0;
    std::uint32_t node = 0;
    std::uint32_t count = 0;
  };

  explicit DegreeBucketQueue(const std::vector<std::vector<std::uint32_t>>& counts);

  bool empty() const { return live_ == 0; }
  std::size_t live() const { return live_; }
  std::uint32_t count(std::size_t family, std::uint32_t node) const { return lanes_[family].count[node]; }
  bool contains(std::size_t family, std::uint32_t node) const { return lanes_[family].count[node] != 0; }

  /// Removes and returns an entry of globally minimal count. Ties go to the
  /// lowest family index, then to the most recently bucketed node.
  Entry pop_min();
  void decrement(std::size_t family, std::uint32_t node);
  void remove(std::size_t family, std::uint32_t node);

 private:
  // Buckets are stacks with lazy deletion: an entry is live only while the
  // node's count still equals the bucket index. Counts never rise, so each
  // node has at most one live entry.
  struct Lane {
    std::vector<std::uint32_t> count;
    std::vector<std::vector<std::uint32_t>> bucket;
    std::size_t cursor = 0;
  };

  void settle(Lane& lane) const;

  mutable std::vector<Lane> lanes_;
  std::size_t live_ = 0;
};

/// (y_1..y_m, X_1..X_{m+1}): y_i moves from part X_i to X_{i+1}, the new
/// group enters X_1.
struct AugmentingPath {
  std::vector<std::uint32_t> groups;
  std::vector<std::size_t> families;
};

/// State of the exact decomposition: groups are inserted one at a time and
/// the current assignment is kept optimal for the inserted prefix.
class ExactDecomposer {
 public:
  ExactDecomposer(const Relation& relation, std::span<const ColumnSet> families, ColumnSet y);

  const GroupIndex& groups() const { return index_; }
  std::uint64_t degree() const { return degree_; }
  std::optional<std::size_t> family_of(std::uint32_t group) const;
  /// |π_Y σ_{X=y} R^X| for the family `family` and the X-value of `group`.
  std::uint32_t load(std::size_t family, std::uint32_t group) const;
  std::uint64_t max_load() const;

  /// Shortest augmenting path for an unplaced group, by BFS over groups and
  /// (family, X-value) nodes.
  std::optional<AugmentingPath> find_augmenting_path(std::uint32_t group) const;
  void apply(const AugmentingPath& path, std::uint32_t group);
  /// One insertion step: augment if possible, otherwise raise the degree and
  /// place the group where it collides least.
  void insert(std::uint32_t group);

  /// Requires every group placed.
  Partitioning finish() const;

 private:
  static constexpr std::uint32_t kNil = std::numeric_limits<std::uint32_t>::max();

  void attach(std::uint32_t group, std::size_t family);
  void detach(std::uint32_t group);

  const Relation* relation_;
  std::vector<ColumnSet> families_;
  ColumnSet y_;
  GroupIndex index_;
  std::uint64_t degree_ = 0;
  std::vector<std::uint32_t> family_of_;
  std::vector<std::vector<std::uint32_t>> load_;
  std::vector<std::vector<std::uint32_t>> head_;
  std::vector<std::uint32_t> next_;
  std::vector<std::uint32_t> prev_;

  // BFS scratch, reset by epoch stamps.
  mutable std::uint32_t epoch_ = 0;
  mutable std::vector<std::uint32_t> group_seen_;
  mutable std::vector<std::vector<std::uint32_t>> node_seen_;
  mutable std::vector<std::uint32_t> parent_node_family_;
  mutable std::vector<std::uint32_t> parent_node_;
  mutable std::vector<std::vector<std::uint32_t>> parent_group_;
  mutable std::vector<std::uint32_t> queue_;
};

/// Greedy peeling in O(|R|): a partitioning within a factor |families| of optimal.
Partitioning decompose_approx(const Relation& relation, std::span<const ColumnSet> families, ColumnSet y);

/// Augmenting-path insertion in O(|R|^2): an optimal partitioning.
Partitioning decompose_exact(const Relation& relation, std::span<const ColumnSet> families, ColumnSet y);

/// Exhaustive search over all |families|^groups assignments.
Partitioning decompose_bruteforce(const Relation& relation, std::span<const ColumnSet> families, ColumnSet y,
                                  std::size_t max_groups = 10);

/// JSON manifest: part -> source row indices, in canonical row order.
void write_partition_manifest(std::ostream& out, const Relation& relation, const Partitioning& partitioning);

}  // namespace pcj
