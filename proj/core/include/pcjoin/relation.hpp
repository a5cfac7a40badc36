#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pcj {

/// Interned constant. Dense, assigned in first-seen order by a Catalog.
using Value = std::uint32_t;

/// Set of column positions of one relation, one bit per position.
using ColumnSet = std::uint64_t;

inline constexpr std::size_t kMaxArity = 64;

constexpr ColumnSet column_bit(std::size_t column) { return ColumnSet{1} << column; }
constexpr ColumnSet all_columns(std::size_t arity) {
  return arity >= 64 ? ~ColumnSet{0} : column_bit(arity) - 1;
}
constexpr bool is_subset(ColumnSet inner, ColumnSet outer) { return (inner & ~outer) == 0; }
inline std::size_t column_count(ColumnSet columns) {
  return static_cast<std::size_t>(std::popcount(columns));
}
std::vector<std::size_t> column_list(ColumnSet columns);

/// String interning dictionary shared by all relations of an instance.
class Catalog {
 public:
  Value intern(std::string_view text);
  std::optional<Value> find(std::string_view text) const;
  const std::string& text(Value value) const;
  std::size_t size() const { return strings_.size(); }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::vector<std::string> strings_;
  std::unordered_map<std::string, Value, Hash, std::equal_to<>> ids_;
};

/// A set of fixed-arity tuples over a named schema.
///
/// Tuples are kept sorted lexicographically by interned id and free of
/// duplicates, so row indices are canonical for a given tuple set.
class Relation {
 public:
  Relation() = default;
  Relation(std::string name, std::vector<std::string> schema);
  /// `rows` is row-major with `schema.size()` values per tuple; sorted and
  /// de-duplicated on construction.
  Relation(std::string name, std::vector<std::string> schema, std::vector<Value> rows);

  /// The zero-arity relation: either {()} or empty.
  static Relation nullary(std::string name, bool nonempty);

  const std::string& name() const { return name_; }
  const std::vector<std::string>& schema() const { return schema_; }
  std::size_t arity() const { return schema_.size(); }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  std::span<const Value> tuple(std::size_t row) const {
    return {data_.data() + row * arity(), arity()};
  }
  Value at(std::size_t row, std::size_t column) const { return data_[row * arity() + column]; }
  const std::vector<Value>& data() const { return data_; }

  std::size_t column_index(std::string_view variable) const;
  std::optional<std::size_t> find_column(std::string_view variable) const;
  ColumnSet columns_of(std::span<const std::string> variables) const;
  std::vector<std::string> names_of(ColumnSet columns) const;

  bool contains(std::span<const Value> tuple) const;
  std::optional<std::size_t> find_row(std::span<const Value> tuple) const;

  /// Rows must be ascending; the result keeps their relative order.
  Relation subset(std::span<const std::uint32_t> rows) const;
  Relation renamed(std::string name, std::vector<std::string> schema) const;

  friend bool operator==(const Relation& a, const Relation& b) {
    return a.schema_ == b.schema_ && a.size_ == b.size_ && a.data_ == b.data_;
  }

 private:
  void normalize();

  std::string name_;
  std::vector<std::string> schema_;
  std::vector<Value> data_;
  std::size_t size_ = 0;
};

/// Dense ids for the distinct projections of a relation onto some columns.
/// Ids follow the order of first occurrence in row order.
struct KeyIndex {
  std::vector<std::uint32_t> key_of_row;
  std::vector<std::uint32_t> first_row;

  std::size_t num_keys() const { return first_row.size(); }
};

KeyIndex index_keys(const Relation& relation, ColumnSet columns);

using Binding = std::map<std::string, Value, std::less<>>;

Relation project(const Relation& relation, std::span<const std::string> variables);
Relation project_columns(const Relation& relation, std::span<const std::size_t> columns);

Relation select_eq(const Relation& relation, const Binding& binding);

/// σ_{X=y}: tuples that agree with `reference` (a full-arity tuple) on the
/// columns in `x`. Components of `reference` outside `x` are ignored.
Relation select_matching(const Relation& relation, ColumnSet x, std::span<const Value> reference);

}  // namespace pcj
