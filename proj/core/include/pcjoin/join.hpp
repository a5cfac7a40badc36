#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcjoin/decomposition.hpp"
#include "pcjoin/query.hpp"
#include "pcjoin/relation.hpp"
#include "pcjoin/statistics.hpp"

namespace pcj {

/// Query-variable ids Z_1..Z_r.
using VariableOrder = std::vector<std::size_t>;

VariableOrder parse_order(const Query& query, std::span<const std::string> names);
void validate_order(const Query& query, const VariableOrder& order);
std::vector<std::string> order_names(const Query& query, const VariableOrder& order);

/// Greedy: repeatedly bind the variable with the smallest estimated fanout,
/// the minimum over atoms containing it of distinct-count growth.
VariableOrder default_order(const Query& query, const Instance& instance);

/// |Q_i| for the prefix joins Q_i(Z_1..Z_i) = ⋈_j π_{Z_1..Z_i} R_j.
struct VaatProfile {
  VariableOrder order;
  std::vector<std::uint64_t> sizes;

  std::uint64_t max() const;
};

/// Every output tuple in head order.
using TupleSink = std::function<void(std::span<const Value>)>;

/// Naive backtracking over atom tuples; the ground truth for tests.
Relation nested_loop_join_oracle(const Query& query, const Instance& instance);

/// Trie-based generic join. Reports the prefix sizes through `profile` when set.
Relation generic_join(const Query& query, const Instance& instance, std::optional<VariableOrder> order = std::nullopt,
                      VaatProfile* profile = nullptr);
/// Same traversal, streaming tuples instead of materializing; returns the count.
std::uint64_t generic_join_visit(const Query& query, const Instance& instance, const VariableOrder& order,
                                 const TupleSink& sink, VaatProfile* profile = nullptr);

VaatProfile vaat_profile(const Query& query, const Instance& instance, const VariableOrder& order);

enum class LiftedBase { Generic, Hexagon };

struct LiftedOptions {
  LiftedBase base = LiftedBase::Generic;
  bool exact = false;
  std::size_t jobs = 1;
  std::optional<VariableOrder> order;
};

struct LiftedResult {
  Relation output;
  /// One entry per family combination, in combination index order.
  std::vector<std::vector<std::size_t>> combinations;
  std::vector<Relation> sub_outputs;
  /// Partitioning per multi-family constraint, aligned with `partitioned`.
  std::vector<std::size_t> partitioned;
  std::vector<Partitioning> partitionings;
};

/// Splits every PC-constrained atom by a witnessing partitioning and runs the
/// base join once per family combination. Throws ConstraintViolation when the
/// instance does not satisfy the constraints.
LiftedResult pc_lifted_join(const Query& query, const Instance& instance, std::span<const AtomConstraint> constraints,
                            const LiftedOptions& options = {});

/// Whether the query is Q(A,B,C,U,V,W) <- R1(A,W,B), R2(B,U,C), R3(C,V,A), R4(U,V,W)
/// up to relation names and head order.
bool is_hexagon_shape(const Query& query);

}  // namespace pcj
