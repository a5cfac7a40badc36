#include "pcjoin/decomposition.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "pcjoin/error.hpp"
#include "pcjoin/statistics.hpp"

namespace pcj {

void validate_families(const Relation& relation, std::span<const ColumnSet> families, ColumnSet y) {
  if (families.empty()) fail(ErrorKind::Schema, "partition constraint needs at least one family");
  if (!is_subset(y, all_columns(relation.arity()))) {
    fail(ErrorKind::Schema, "Y is not a subset of the schema of '" + relation.name() + "'");
  }
  for (std::size_t i = 0; i < families.size(); ++i) {
    if (!is_subset(families[i], y)) {
      fail(ErrorKind::Schema, "family member is not a subset of Y on '" + relation.name() + "'");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (families[i] == families[j]) fail(ErrorKind::Schema, "duplicate family member on '" + relation.name() + "'");
    }
  }
}

Partitioning make_partitioning(const Relation& relation, std::span<const ColumnSet> families, ColumnSet y,
                               std::vector<std::uint32_t> part_of_row) {
  Partitioning out;
  out.y = y;
  out.families.assign(families.begin(), families.end());
  std::vector<std::vector<std::uint32_t>> rows(families.size());
  for (std::size_t row = 0; row < part_of_row.size(); ++row) rows.at(part_of_row[row]).push_back(static_cast<std::uint32_t>(row));
  for (std::size_t f = 0; f < families.size(); ++f) {
    out.parts.push_back(relation.subset(rows[f]));
    out.achieved_degree = std::max(out.achieved_degree, compute_dc(out.parts.back(), families[f], y));
  }
  out.part_of_row = std::move(part_of_row);
  return out;
}

GroupIndex::GroupIndex(const Relation& relation, std::span<const ColumnSet> families, ColumnSet y)
    : families_(families.begin(), families.end()) {
  validate_families(relation, families, y);
  const std::size_t n = relation.size();
  std::size_t g = 0;
  if (relation.arity() > 0 && y == all_columns(relation.arity())) {
    // Rows are distinct, so every row is its own group.
    identity_ = true;
    g = n;
    group_rows_.resize(n);
    std::iota(group_rows_.begin(), group_rows_.end(), 0u);
  } else {
    KeyIndex groups = index_keys(relation, y);
    if (y == 0 && n > 0) groups.key_of_row.assign(n, 0);
    g = groups.num_keys();
    group_of_row_ = std::move(groups.key_of_row);
    group_first_row_.assign(g + 1, 0);
    for (std::size_t row = 0; row < n; ++row) ++group_first_row_[group_of_row_[row] + 1];
    for (std::size_t i = 0; i < g; ++i) group_first_row_[i + 1] += group_first_row_[i];
    group_rows_.resize(n);
    std::vector<std::uint32_t> fill(group_first_row_.begin(), group_first_row_.end() - 1);
    for (std::size_t row = 0; row < n; ++row) group_rows_[fill[group_of_row_[row]]++] = static_cast<std::uint32_t>(row);
  }
  num_groups_ = g;

  const std::size_t k = families_.size();
  node_of_group_.resize(k * g);
  std::vector<std::size_t> nodes(k);
  for (std::size_t f = 0; f < k; ++f) {
    const KeyIndex xs = index_keys(relation, families_[f]);
    nodes[f] = families_[f] == 0 ? (g > 0 ? 1 : 0) : xs.num_keys();
    for (std::size_t grp = 0; grp < g; ++grp) {
      node_of_group_[grp * k + f] = families_[f] == 0 ? 0 : xs.key_of_row[rows(static_cast<std::uint32_t>(grp))[0]];
    }
  }
  node_first_.resize(k);
  node_groups_.resize(k);
  for (std::size_t f = 0; f < k; ++f) {
    auto& first = node_first_[f];
    first.assign(nodes[f] + 1, 0);
    for (std::size_t grp = 0; grp < g; ++grp) ++first[node_of_group_[grp * k + f] + 1];
    for (std::size_t i = 0; i < nodes[f]; ++i) first[i + 1] += first[i];
    auto& members = node_groups_[f];
    members.resize(g);
    std::vector<std::uint32_t> fill(first.begin(), first.end() - 1);
    for (std::size_t grp = 0; grp < g; ++grp) members[fill[node_of_group_[grp * k + f]]++] = static_cast<std::uint32_t>(grp);
  }
}

// ---------------------------------------------------------------------------

namespace {

// make_partitioning for callers that already hold the group index: part
// degrees are per-node group counts, no re-indexing of the parts needed.
Partitioning assemble(const Relation& relation, const GroupIndex& index, ColumnSet y,
                      std::span<const std::uint32_t> family_of_group) {
  const std::size_t k = index.num_families();
  Partitioning out;
  out.y = y;
  for (std::size_t f = 0; f < k; ++f) out.families.push_back(index.family(f));
  out.part_of_row.resize(relation.size());
  std::vector<std::vector<std::uint32_t>> rows(k);
  for (std::size_t row = 0; row < relation.size(); ++row) {
    const std::uint32_t f = family_of_group[index.group_of_row(row)];
    if (f >= k) fail(ErrorKind::Internal, "decomposition finished with unplaced groups");
    out.part_of_row[row] = f;
    rows[f].push_back(static_cast<std::uint32_t>(row));
  }
  for (std::size_t f = 0; f < k; ++f) {
    out.parts.push_back(relation.subset(rows[f]));
    std::vector<std::uint32_t> load(index.num_nodes(f), 0);
    for (std::uint32_t grp = 0; grp < family_of_group.size(); ++grp) {
      if (family_of_group[grp] == f) {
        out.achieved_degree = std::max<std::uint64_t>(out.achieved_degree, ++load[index.node(f, grp)]);
      }
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

DegreeBucketQueue::DegreeBucketQueue(const std::vector<std::vector<std::uint32_t>>& counts) {
  lanes_.resize(counts.size());
  for (std::size_t f = 0; f < counts.size(); ++f) {
    Lane& lane = lanes_[f];
    lane.count = counts[f];
    std::uint32_t top = 0;
    for (auto c : lane.count) top = std::max(top, c);
    lane.bucket.resize(std::size_t{top} + 1);
    // Push in descending id order so that each stack pops ascending ids.
    for (std::size_t i = lane.count.size(); i-- > 0;) {
      if (lane.count[i] == 0) continue;
      lane.bucket[lane.count[i]].push_back(static_cast<std::uint32_t>(i));
      ++live_;
    }
    lane.cursor = 1;
  }
}

void DegreeBucketQueue::settle(Lane& lane) const {
  while (lane.cursor < lane.bucket.size()) {
    auto& stack = lane.bucket[lane.cursor];
    while (!stack.empty() && lane.count[stack.back()] != lane.cursor) stack.pop_back();
    if (!stack.empty()) return;
    ++lane.cursor;
  }
}

DegreeBucketQueue::Entry DegreeBucketQueue::pop_min() {
  if (live_ == 0) fail(ErrorKind::Internal, "pop from empty bucket queue");
  std::size_t best = lanes_.size();
  std::size_t best_count = 0;
  for (std::size_t f = 0; f < lanes_.size(); ++f) {
    settle(lanes_[f]);
    const std::size_t c = lanes_[f].cursor;
    if (c < lanes_[f].bucket.size() && (best == lanes_.size() || c < best_count)) {
      best = f;
      best_count = c;
    }
  }
  Lane& lane = lanes_[best];
  auto& stack = lane.bucket[best_count];
  const std::uint32_t node = stack.back();
  stack.pop_back();
  Entry e{best, node, lane.count[node]};
  lane.count[node] = 0;
  --live_;
  return e;
}

void DegreeBucketQueue::decrement(std::size_t family, std::uint32_t node) {
  Lane& lane = lanes_[family];
  std::uint32_t& c = lane.count[node];
  if (c == 0) return;
  if (--c == 0) {
    --live_;
    return;
  }
  lane.bucket[c].push_back(node);
  lane.cursor = std::min<std::size_t>(lane.cursor, c);
}

void DegreeBucketQueue::remove(std::size_t family, std::uint32_t node) {
  Lane& lane = lanes_[family];
  if (lane.count[node] == 0) return;
  lane.count[node] = 0;
  --live_;
}

// ---------------------------------------------------------------------------

Partitioning decompose_approx(const Relation& relation, std::span<const ColumnSet> families, ColumnSet y) {
  const GroupIndex index(relation, families, y);
  const std::size_t k = families.size();
  const std::size_t g = index.num_groups();

  std::vector<std::vector<std::uint32_t>> counts(k);
  for (std::size_t f = 0; f < k; ++f) {
    counts[f].resize(index.num_nodes(f));
    for (std::uint32_t x = 0; x < counts[f].size(); ++x) counts[f][x] = static_cast<std::uint32_t>(index.groups_of(f, x).size());
  }
  DegreeBucketQueue queue(counts);

  constexpr std::uint32_t kUnplaced = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> family_of_group(g, kUnplaced);
  std::uint64_t achieved = 0;
  while (!queue.empty()) {
    const auto e = queue.pop_min();
    achieved = std::max<std::uint64_t>(achieved, e.count);
    for (auto grp : index.groups_of(e.family, e.node)) {
      if (family_of_group[grp] != kUnplaced) continue;
      family_of_group[grp] = static_cast<std::uint32_t>(e.family);
      for (std::size_t f = 0; f < k; ++f) {
        if (f != e.family) queue.decrement(f, index.node(f, grp));
      }
    }
  }

  Partitioning out = assemble(relation, index, y, family_of_group);
  if (out.achieved_degree > achieved) fail(ErrorKind::Internal, "approximate decomposition lost track of part degrees");
  return out;
}

// ---------------------------------------------------------------------------

ExactDecomposer::ExactDecomposer(const Relation& relation, std::span<const ColumnSet> families, ColumnSet y)
    : relation_(&relation), families_(families.begin(), families.end()), y_(y), index_(relation, families, y) {
  const std::size_t k = families_.size();
  const std::size_t g = index_.num_groups();
  family_of_.assign(g, kNil);
  next_.assign(g, kNil);
  prev_.assign(g, kNil);
  load_.resize(k);
  head_.resize(k);
  node_seen_.resize(k);
  parent_group_.resize(k);
  for (std::size_t f = 0; f < k; ++f) {
    load_[f].assign(index_.num_nodes(f), 0);
    head_[f].assign(index_.num_nodes(f), kNil);
    node_seen_[f].assign(index_.num_nodes(f), 0);
    parent_group_[f].assign(index_.num_nodes(f), kNil);
  }
  group_seen_.assign(g, 0);
  parent_node_family_.assign(g, kNil);
  parent_node_.assign(g, kNil);
  queue_.reserve(g);
}

std::optional<std::size_t> ExactDecomposer::family_of(std::uint32_t group) const {
  if (family_of_[group] == kNil) return std::nullopt;
  return family_of_[group];
}

std::uint32_t ExactDecomposer::load(std::size_t family, std::uint32_t group) const {
  return load_[family][index_.node(family, group)];
}

std::uint64_t ExactDecomposer::max_load() const {
  std::uint64_t best = 0;
  for (const auto& per_family : load_) {
    for (auto l : per_family) best = std::max<std::uint64_t>(best, l);
  }
  return best;
}

void ExactDecomposer::attach(std::uint32_t group, std::size_t family) {
  const std::uint32_t x = index_.node(family, group);
  family_of_[group] = static_cast<std::uint32_t>(family);
  ++load_[family][x];
  prev_[group] = kNil;
  next_[group] = head_[family][x];
  if (head_[family][x] != kNil) prev_[head_[family][x]] = group;
  head_[family][x] = group;
}

void ExactDecomposer::detach(std::uint32_t group) {
  const std::size_t family = family_of_[group];
  const std::uint32_t x = index_.node(family, group);
  --load_[family][x];
  if (prev_[group] != kNil) {
    next_[prev_[group]] = next_[group];
  } else {
    head_[family][x] = next_[group];
  }
  if (next_[group] != kNil) prev_[next_[group]] = prev_[group];
  next_[group] = prev_[group] = kNil;
  family_of_[group] = kNil;
}

std::optional<AugmentingPath> ExactDecomposer::find_augmenting_path(std::uint32_t group) const {
  if (family_of_[group] != kNil) fail(ErrorKind::Internal, "augmenting path requested for a placed group");
  if (degree_ == 0) return std::nullopt;
  const std::size_t k = families_.size();
  const std::uint32_t stamp = ++epoch_;
  queue_.clear();
  queue_.push_back(group);
  group_seen_[group] = stamp;
  parent_node_family_[group] = kNil;

  for (std::size_t head = 0; head < queue_.size(); ++head) {
    const std::uint32_t y = queue_[head];
    for (std::size_t f = 0; f < k; ++f) {
      if (f == family_of_[y]) continue;
      const std::uint32_t x = index_.node(f, y);
      if (node_seen_[f][x] == stamp) continue;
      node_seen_[f][x] = stamp;
      parent_group_[f][x] = y;
      if (load_[f][x] < degree_) {
        AugmentingPath path;
        std::size_t fam = f;
        std::uint32_t node = x;
        path.families.push_back(fam);
        while (true) {
          const std::uint32_t from = parent_group_[fam][node];
          if (from == group) break;
          path.groups.push_back(from);
          fam = parent_node_family_[from];
          node = parent_node_[from];
          path.families.push_back(fam);
        }
        std::reverse(path.groups.begin(), path.groups.end());
        std::reverse(path.families.begin(), path.families.end());
        return path;
      }
      for (std::uint32_t member = head_[f][x]; member != kNil; member = next_[member]) {
        if (group_seen_[member] == stamp) continue;
        group_seen_[member] = stamp;
        parent_node_family_[member] = static_cast<std::uint32_t>(f);
        parent_node_[member] = x;
        queue_.push_back(member);
      }
    }
  }
  return std::nullopt;
}

void ExactDecomposer::apply(const AugmentingPath& path, std::uint32_t group) {
  const std::size_t m = path.groups.size();
  if (path.families.size() != m + 1) fail(ErrorKind::Internal, "malformed augmenting path");
  for (std::size_t i = m; i-- > 0;) {
    const std::uint32_t moved = path.groups[i];
    detach(moved);
    attach(moved, path.families[i + 1]);
  }
  attach(group, path.families[0]);
}

void ExactDecomposer::insert(std::uint32_t group) {
  if (auto path = find_augmenting_path(group)) {
    apply(*path, group);
    return;
  }
  ++degree_;
  std::size_t best = 0;
  for (std::size_t f = 1; f < families_.size(); ++f) {
    if (load(f, group) < load(best, group)) best = f;
  }
  attach(group, best);
}

Partitioning ExactDecomposer::finish() const {
  Partitioning out = assemble(*relation_, index_, y_, family_of_);
  if (out.achieved_degree != degree_) fail(ErrorKind::Internal, "exact decomposition degree mismatch");
  return out;
}

Partitioning decompose_exact(const Relation& relation, std::span<const ColumnSet> families, ColumnSet y) {
  ExactDecomposer state(relation, families, y);
  const auto g = static_cast<std::uint32_t>(state.groups().num_groups());
  for (std::uint32_t grp = 0; grp < g; ++grp) state.insert(grp);
  return state.finish();
}

// ---------------------------------------------------------------------------

Partitioning decompose_bruteforce(const Relation& relation, std::span<const ColumnSet> families, ColumnSet y,
                                  std::size_t max_groups) {
  validate_families(relation, families, y);
  const auto key_of = [&](std::size_t row, ColumnSet cols) {
    std::vector<Value> key;
    for (auto c : column_list(cols)) key.push_back(relation.at(row, c));
    return key;
  };

  std::map<std::vector<Value>, std::vector<std::size_t>> groups;
  for (std::size_t row = 0; row < relation.size(); ++row) groups[key_of(row, y)].push_back(row);
  const std::size_t g = groups.size();
  if (g > max_groups) {
    fail(ErrorKind::ScaleExceeded, "oracle scale exceeded: " + std::to_string(g) + " groups > " + std::to_string(max_groups));
  }
  const std::size_t k = families.size();

  // slot[f][i]: dense id of group i's X-value for family f.
  std::vector<std::vector<std::size_t>> slot(k, std::vector<std::size_t>(g));
  std::vector<std::size_t> slots_per_family(k);
  for (std::size_t f = 0; f < k; ++f) {
    std::map<std::vector<Value>, std::size_t> ids;
    std::size_t i = 0;
    for (const auto& [key, rows] : groups) {
      auto [it, fresh] = ids.emplace(key_of(rows.front(), families[f]), ids.size());
      (void)fresh;
      slot[f][i++] = it->second;
    }
    slots_per_family[f] = ids.size();
  }

  std::vector<std::size_t> assignment(g, 0);
  std::vector<std::size_t> best_assignment(g, 0);
  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::vector<std::uint64_t>> loads(k);
  while (true) {
    for (std::size_t f = 0; f < k; ++f) loads[f].assign(slots_per_family[f], 0);
    std::uint64_t d = 0;
    for (std::size_t i = 0; i < g; ++i) d = std::max(d, ++loads[assignment[i]][slot[assignment[i]][i]]);
    if (d < best) {
      best = d;
      best_assignment = assignment;
    }
    std::size_t pos = 0;
    while (pos < g && ++assignment[pos] == k) assignment[pos++] = 0;
    if (pos == g) break;
  }

  std::vector<std::uint32_t> part_of_row(relation.size());
  std::size_t i = 0;
  for (const auto& [key, rows] : groups) {
    for (auto row : rows) part_of_row[row] = static_cast<std::uint32_t>(best_assignment[i]);
    ++i;
  }
  Partitioning out = make_partitioning(relation, families, y, std::move(part_of_row));
  if (out.achieved_degree != (g == 0 ? 0 : best)) fail(ErrorKind::Internal, "brute-force degree mismatch");
  return out;
}

// ---------------------------------------------------------------------------

void write_partition_manifest(std::ostream& out, const Relation& relation, const Partitioning& partitioning) {
  using nlohmann::json;
  json doc;
  doc["relation"] = relation.name();
  doc["schema"] = relation.schema();
  doc["y"] = relation.names_of(partitioning.y);
  doc["achieved_degree"] = partitioning.achieved_degree;
  json parts = json::array();
  for (std::size_t f = 0; f < partitioning.families.size(); ++f) {
    std::vector<std::size_t> rows;
    for (std::size_t row = 0; row < partitioning.part_of_row.size(); ++row) {
      if (partitioning.part_of_row[row] == f) rows.push_back(row);
    }
    parts.push_back({{"family", relation.names_of(partitioning.families[f])},
                     {"size", rows.size()},
                     {"degree", compute_dc(partitioning.parts[f], partitioning.families[f], partitioning.y)},
                     {"rows", rows}});
  }
  doc["parts"] = std::move(parts);
  out << doc.dump(2) << '\n';
}

}  // namespace pcj
