#include "pcjoin/trie.hpp"

#include <algorithm>
#include <numeric>

#include "pcjoin/error.hpp"

namespace pcj {

TrieIndex::TrieIndex(const Relation& relation, std::span<const std::string> order) {
  if (order.size() != relation.arity()) fail(ErrorKind::Schema, "trie order is not a permutation of the schema");
  for (const auto& v : order) order_.push_back(relation.column_index(v));
  build(relation);
}

TrieIndex::TrieIndex(const Relation& relation, std::vector<std::size_t> column_order)
    : order_(std::move(column_order)) {
  build(relation);
}

void TrieIndex::build(const Relation& relation) {
  const std::size_t k = relation.arity();
  std::vector<bool> seen(k, false);
  if (order_.size() != k) fail(ErrorKind::Schema, "trie order is not a permutation of the schema");
  for (auto c : order_) {
    if (c >= k || seen[c]) fail(ErrorKind::Schema, "trie order is not a permutation of the schema");
    seen[c] = true;
  }
  size_ = relation.size();
  data_.resize(size_ * k);
  bool identity = true;
  for (std::size_t i = 0; i < k; ++i) identity = identity && order_[i] == i;
  if (identity) {
    data_ = relation.data();
    return;
  }
  std::vector<Value> permuted(size_ * k);
  for (std::size_t row = 0; row < size_; ++row) {
    for (std::size_t l = 0; l < k; ++l) permuted[row * k + l] = relation.at(row, order_[l]);
  }
  std::vector<std::uint32_t> rows(size_);
  std::iota(rows.begin(), rows.end(), 0u);
  const Value* p = permuted.data();
  std::sort(rows.begin(), rows.end(), [&](std::uint32_t a, std::uint32_t b) {
    return std::lexicographical_compare(p + a * k, p + a * k + k, p + b * k, p + b * k + k);
  });
  for (std::size_t i = 0; i < size_; ++i) {
    std::copy_n(p + std::size_t{rows[i]} * k, k, data_.begin() + static_cast<std::ptrdiff_t>(i * k));
  }
}

TrieIndex::Range TrieIndex::child(Range node, std::size_t level, Value v) const {
  std::uint32_t lo = node.begin;
  std::uint32_t hi = node.end;
  while (lo < hi) {
    const std::uint32_t mid = lo + (hi - lo) / 2;
    if (key(mid, level) < v) lo = mid + 1; else hi = mid;
  }
  const std::uint32_t first = lo;
  hi = node.end;
  while (lo < hi) {
    const std::uint32_t mid = lo + (hi - lo) / 2;
    if (key(mid, level) <= v) lo = mid + 1; else hi = mid;
  }
  return {first, lo};
}

TrieIndex::Range TrieIndex::first_child(Range node, std::size_t level) const {
  const Value v = key(node.begin, level);
  // Exponential search: offsets <= known are equal to v.
  std::uint32_t known = 0;
  std::uint32_t probe = 1;
  while (node.begin + probe < node.end && key(node.begin + probe, level) == v) {
    known = probe;
    probe <<= 1;
  }
  std::uint32_t lo = node.begin + known + 1;
  std::uint32_t hi = std::min(node.begin + probe, node.end);
  while (lo < hi) {
    const std::uint32_t mid = lo + (hi - lo) / 2;
    if (key(mid, level) == v) lo = mid + 1; else hi = mid;
  }
  return {node.begin, lo};
}

std::size_t TrieIndex::fanout(Range node, std::size_t level) const {
  std::size_t n = 0;
  for_each_child(node, level, [&](Value, Range) { ++n; });
  return n;
}

std::vector<std::vector<Value>> TrieIndex::enumerate() const {
  std::vector<std::vector<Value>> out;
  std::vector<Value> prefix;
  auto dfs = [&](auto&& self, Range node, std::size_t level) -> void {
    if (level == depth()) {
      out.push_back(prefix);
      return;
    }
    for_each_child(node, level, [&](Value v, Range c) {
      prefix.push_back(v);
      self(self, c, level + 1);
      prefix.pop_back();
    });
  };
  if (size_ > 0) dfs(dfs, root(), 0);
  return out;
}

}  // namespace pcj
