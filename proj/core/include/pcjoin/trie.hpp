#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pcjoin/relation.hpp"

namespace pcj {

/// Sorted-vector trie over a relation with a chosen column order.
///
/// A node is a half-open row range whose rows share their first `level`
/// values; children are found by binary search on the next column.
class TrieIndex {
 public:
  struct Range {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    bool empty() const { return begin >= end; }
    std::uint32_t size() const { return end - begin; }
  };

  TrieIndex(const Relation& relation, std::span<const std::string> order);
  TrieIndex(const Relation& relation, std::vector<std::size_t> column_order);

  std::size_t depth() const { return order_.size(); }
  std::size_t size() const { return size_; }
  /// Source column for each trie level.
  const std::vector<std::size_t>& column_order() const { return order_; }

  Range root() const { return {0, static_cast<std::uint32_t>(size_)}; }
  Value key(std::uint32_t row, std::size_t level) const { return data_[std::size_t{row} * depth() + level]; }

  /// Child of `node` (whose rows agree on levels < level) with value `v` at `level`.
  Range child(Range node, std::size_t level, Value v) const;
  /// Sub-range of rows sharing the level value of `node.begin`.
  Range first_child(Range node, std::size_t level) const;
  std::size_t fanout(Range node, std::size_t level) const;

  template <class F>
  void for_each_child(Range node, std::size_t level, F&& f) const {
    while (!node.empty()) {
      Range c = first_child(node, level);
      f(key(c.begin, level), c);
      node.begin = c.end;
    }
  }

  /// Depth-first enumeration; each tuple is laid out in trie order.
  std::vector<std::vector<Value>> enumerate() const;

 private:
  void build(const Relation& relation);

  std::vector<std::size_t> order_;
  std::vector<Value> data_;
  std::size_t size_ = 0;
};

}  // namespace pcj
