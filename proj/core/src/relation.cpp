#include "pcjoin/relation.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <set>
#include <utility>

#include "pcjoin/error.hpp"

namespace pcj {

std::vector<std::size_t> column_list(ColumnSet columns) {
  std::vector<std::size_t> out;
  out.reserve(column_count(columns));
  while (columns != 0) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(columns)));
    columns &= columns - 1;
  }
  return out;
}

Value Catalog::intern(std::string_view text) {
  if (auto it = ids_.find(text); it != ids_.end()) return it->second;
  const auto id = static_cast<Value>(strings_.size());
  strings_.emplace_back(text);
  ids_.emplace(strings_.back(), id);
  return id;
}

std::optional<Value> Catalog::find(std::string_view text) const {
  if (auto it = ids_.find(text); it != ids_.end()) return it->second;
  return std::nullopt;
}

const std::string& Catalog::text(Value value) const {
  if (value >= strings_.size()) fail(ErrorKind::Internal, "value id out of catalog range");
  return strings_[value];
}

namespace {

void check_schema(const std::vector<std::string>& schema) {
  if (schema.size() > kMaxArity) {
    fail(ErrorKind::Schema, "arity " + std::to_string(schema.size()) + " exceeds the supported maximum of 64");
  }
  std::set<std::string_view> seen;
  for (const auto& name : schema) {
    if (name.empty()) fail(ErrorKind::Schema, "empty variable name in schema");
    if (!seen.insert(name).second) fail(ErrorKind::Schema, "duplicate variable '" + name + "' in schema");
  }
}

}  // namespace

Relation::Relation(std::string name, std::vector<std::string> schema)
    : name_(std::move(name)), schema_(std::move(schema)) {
  check_schema(schema_);
}

Relation::Relation(std::string name, std::vector<std::string> schema, std::vector<Value> rows)
    : name_(std::move(name)), schema_(std::move(schema)), data_(std::move(rows)) {
  check_schema(schema_);
  if (schema_.empty()) {
    if (!data_.empty()) fail(ErrorKind::Schema, "nullary relation given row data");
    return;
  }
  if (data_.size() % schema_.size() != 0) {
    fail(ErrorKind::Schema, "row data is not a multiple of the arity");
  }
  normalize();
}

Relation Relation::nullary(std::string name, bool nonempty) {
  Relation r(std::move(name), {});
  r.size_ = nonempty ? 1 : 0;
  return r;
}

namespace {

// LSD radix sort of row ids by their tuples: stable counting passes over
// digits of at most 16 bits, so sorting large relations stays linear in their size.
void radix_sort_rows(std::vector<std::uint32_t>& order, const Value* base, std::size_t k) {
  Value max_value = 0;
  for (std::size_t i = 0; i < order.size() * k; ++i) max_value = std::max(max_value, base[i]);
  const int bits = std::max(1, static_cast<int>(std::bit_width(max_value)));
  const int digits = (bits + 15) / 16;
  const int width = (bits + digits - 1) / digits;
  const Value digit_mask = (Value{1} << width) - 1;
  std::vector<std::uint32_t> scratch(order.size());
  std::vector<std::uint32_t> counts(std::size_t{1} << width);
  for (std::size_t c = k; c-- > 0;) {
    for (int d = 0; d < digits; ++d) {
      const int shift = width * d;
      std::fill(counts.begin(), counts.end(), 0);
      for (auto row : order) ++counts[(base[row * k + c] >> shift) & digit_mask];
      std::uint32_t sum = 0;
      for (auto& cnt : counts) sum += std::exchange(cnt, sum);
      for (auto row : order) scratch[counts[(base[row * k + c] >> shift) & digit_mask]++] = row;
      order.swap(scratch);
    }
  }
}

}  // namespace

void Relation::normalize() {
  const std::size_t k = arity();
  const std::size_t n = data_.size() / k;
  if (k == 1) {
    std::sort(data_.begin(), data_.end());
    data_.erase(std::unique(data_.begin(), data_.end()), data_.end());
    size_ = data_.size();
    return;
  }
  if (k == 2) {
    std::vector<std::uint64_t> packed(n);
    for (std::size_t i = 0; i < n; ++i) {
      packed[i] = (std::uint64_t{data_[2 * i]} << 32) | data_[2 * i + 1];
    }
    std::sort(packed.begin(), packed.end());
    packed.erase(std::unique(packed.begin(), packed.end()), packed.end());
    data_.resize(packed.size() * 2);
    for (std::size_t i = 0; i < packed.size(); ++i) {
      data_[2 * i] = static_cast<Value>(packed[i] >> 32);
      data_[2 * i + 1] = static_cast<Value>(packed[i] & 0xffffffffu);
    }
    size_ = packed.size();
    return;
  }
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  const Value* base = data_.data();
  auto row_less = [&](std::uint32_t a, std::uint32_t b) {
    return std::lexicographical_compare(base + a * k, base + a * k + k, base + b * k, base + b * k + k);
  };
  auto row_equal = [&](std::uint32_t a, std::uint32_t b) {
    return std::equal(base + a * k, base + a * k + k, base + b * k);
  };
  if (n < 2048) {
    std::sort(order.begin(), order.end(), row_less);
  } else {
    radix_sort_rows(order, base, k);
  }
  order.erase(std::unique(order.begin(), order.end(), row_equal), order.end());
  std::vector<Value> sorted;
  sorted.reserve(order.size() * k);
  for (auto row : order) sorted.insert(sorted.end(), base + row * k, base + row * k + k);
  data_ = std::move(sorted);
  size_ = order.size();
}

std::optional<std::size_t> Relation::find_column(std::string_view variable) const {
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    if (schema_[i] == variable) return i;
  }
  return std::nullopt;
}

std::size_t Relation::column_index(std::string_view variable) const {
  if (auto c = find_column(variable)) return *c;
  fail(ErrorKind::Schema, "unknown variable '" + std::string(variable) + "' in relation '" + name_ + "'");
}

ColumnSet Relation::columns_of(std::span<const std::string> variables) const {
  ColumnSet out = 0;
  for (const auto& v : variables) out |= column_bit(column_index(v));
  return out;
}

std::vector<std::string> Relation::names_of(ColumnSet columns) const {
  std::vector<std::string> out;
  for (auto c : column_list(columns)) {
    if (c >= arity()) fail(ErrorKind::Schema, "column position out of range");
    out.push_back(schema_[c]);
  }
  return out;
}

std::optional<std::size_t> Relation::find_row(std::span<const Value> tuple) const {
  if (tuple.size() != arity()) return std::nullopt;
  if (arity() == 0) return size_ == 1 ? std::optional<std::size_t>(0) : std::nullopt;
  std::size_t lo = 0;
  std::size_t hi = size_;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    auto row = this->tuple(mid);
    if (std::lexicographical_compare(row.begin(), row.end(), tuple.begin(), tuple.end())) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo < size_ && std::ranges::equal(this->tuple(lo), tuple)) return lo;
  return std::nullopt;
}

bool Relation::contains(std::span<const Value> tuple) const { return find_row(tuple).has_value(); }

Relation Relation::subset(std::span<const std::uint32_t> rows) const {
  Relation out(name_, schema_);
  if (arity() == 0) {
    out.size_ = (!rows.empty() && size_ == 1) ? 1 : 0;
    return out;
  }
  out.data_.reserve(rows.size() * arity());
  for (auto row : rows) {
    if (row >= size_) fail(ErrorKind::Internal, "subset row out of range");
    auto t = tuple(row);
    out.data_.insert(out.data_.end(), t.begin(), t.end());
  }
  out.size_ = rows.size();
  if (!std::is_sorted(rows.begin(), rows.end())) out.normalize();
  return out;
}

Relation Relation::renamed(std::string name, std::vector<std::string> schema) const {
  if (schema.size() != arity()) fail(ErrorKind::Schema, "rename changes arity");
  check_schema(schema);
  Relation out = *this;
  out.name_ = std::move(name);
  out.schema_ = std::move(schema);
  return out;
}

namespace {

inline std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h *= 0xbf58476d1ce4e5b9ULL;
  return h ^ (h >> 31);
}

}  // namespace

KeyIndex index_keys(const Relation& relation, ColumnSet columns) {
  if (!is_subset(columns, all_columns(relation.arity()))) {
    fail(ErrorKind::Schema, "key columns outside relation '" + relation.name() + "'");
  }
  const auto cols = column_list(columns);
  const std::size_t n = relation.size();
  KeyIndex out;
  out.key_of_row.resize(n);
  if (n == 0) return out;
  if (cols.empty()) {
    out.first_row.push_back(0);
    return out;
  }
  const std::size_t k = relation.arity();
  const Value* data = relation.data().data();
  // Rows are sorted, so a leading column block groups into adjacent runs.
  if (columns == all_columns(cols.size())) {
    out.first_row.push_back(0);
    for (std::size_t row = 1; row < n; ++row) {
      const Value* prev = data + (row - 1) * k;
      const Value* t = data + row * k;
      if (!std::equal(t, t + cols.size(), prev)) out.first_row.push_back(static_cast<std::uint32_t>(row));
      out.key_of_row[row] = static_cast<std::uint32_t>(out.first_row.size() - 1);
    }
    return out;
  }
  // One column over a dense id range: a direct table beats hashing.
  if (cols.size() == 1) {
    const std::size_t c = cols[0];
    Value max_value = 0;
    for (std::size_t row = 0; row < n; ++row) max_value = std::max(max_value, data[row * k + c]);
    if (max_value <= 4 * n + 1024) {
      std::vector<std::uint32_t> id(std::size_t{max_value} + 1, 0);  // key id + 1, 0 = unseen
      for (std::size_t row = 0; row < n; ++row) {
        std::uint32_t& e = id[data[row * k + c]];
        if (e == 0) {
          out.first_row.push_back(static_cast<std::uint32_t>(row));
          e = static_cast<std::uint32_t>(out.first_row.size());
        }
        out.key_of_row[row] = e - 1;
      }
      return out;
    }
  }
  std::size_t capacity = 16;
  while (capacity < 2 * n) capacity <<= 1;
  const std::size_t mask = capacity - 1;
  std::vector<std::uint32_t> slots(capacity, 0);  // key id + 1, 0 = empty
  for (std::size_t row = 0; row < n; ++row) {
    const Value* t = data + row * k;
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (auto c : cols) h = mix(h, t[c]);
    std::size_t slot = h & mask;
    while (true) {
      const std::uint32_t entry = slots[slot];
      if (entry == 0) {
        const auto id = static_cast<std::uint32_t>(out.first_row.size());
        slots[slot] = id + 1;
        out.first_row.push_back(static_cast<std::uint32_t>(row));
        out.key_of_row[row] = id;
        break;
      }
      const Value* rep = data + std::size_t{out.first_row[entry - 1]} * k;
      bool same = true;
      for (auto c : cols) {
        if (rep[c] != t[c]) {
          same = false;
          break;
        }
      }
      if (same) {
        out.key_of_row[row] = entry - 1;
        break;
      }
      slot = (slot + 1) & mask;
    }
  }
  return out;
}

Relation project_columns(const Relation& relation, std::span<const std::size_t> columns) {
  std::vector<std::string> schema;
  ColumnSet set = 0;
  for (auto c : columns) {
    if (c >= relation.arity()) fail(ErrorKind::Schema, "projection column out of range");
    if (set & column_bit(c)) fail(ErrorKind::Schema, "duplicate variable in projection");
    set |= column_bit(c);
    schema.push_back(relation.schema()[c]);
  }
  if (columns.empty()) return Relation::nullary(relation.name(), !relation.empty());
  const auto keys = index_keys(relation, set);
  std::vector<Value> rows;
  rows.reserve(keys.num_keys() * columns.size());
  for (auto row : keys.first_row) {
    for (auto c : columns) rows.push_back(relation.at(row, c));
  }
  return Relation(relation.name(), std::move(schema), std::move(rows));
}

Relation project(const Relation& relation, std::span<const std::string> variables) {
  std::vector<std::size_t> cols;
  cols.reserve(variables.size());
  for (const auto& v : variables) cols.push_back(relation.column_index(v));
  return project_columns(relation, cols);
}

Relation select_eq(const Relation& relation, const Binding& binding) {
  std::vector<std::pair<std::size_t, Value>> conditions;
  for (const auto& [var, value] : binding) conditions.emplace_back(relation.column_index(var), value);
  std::vector<std::uint32_t> rows;
  for (std::size_t row = 0; row < relation.size(); ++row) {
    bool keep = true;
    for (const auto& [c, v] : conditions) {
      if (relation.at(row, c) != v) {
        keep = false;
        break;
      }
    }
    if (keep) rows.push_back(static_cast<std::uint32_t>(row));
  }
  return relation.subset(rows);
}

Relation select_matching(const Relation& relation, ColumnSet x, std::span<const Value> reference) {
  if (reference.size() != relation.arity()) fail(ErrorKind::Schema, "reference tuple arity mismatch");
  if (!is_subset(x, all_columns(relation.arity()))) fail(ErrorKind::Schema, "selection columns out of range");
  const auto cols = column_list(x);
  std::vector<std::uint32_t> rows;
  for (std::size_t row = 0; row < relation.size(); ++row) {
    if (std::ranges::all_of(cols, [&](std::size_t c) { return relation.at(row, c) == reference[c]; })) {
      rows.push_back(static_cast<std::uint32_t>(row));
    }
  }
  return relation.subset(rows);
}

}  // namespace pcj
