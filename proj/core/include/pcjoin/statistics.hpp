#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcjoin/decomposition.hpp"
#include "pcjoin/query.hpp"
#include "pcjoin/relation.hpp"

namespace pcj {

/// DC_R(X, Y, d): every X-value has at most d distinct Y-completions.
struct DegreeConstraint {
  std::string relation;
  std::vector<std::string> x;
  std::vector<std::string> y;
  std::uint64_t degree = 0;
};

/// PC_R(families, Y, d). A single family encodes a DC, and the single
/// family {∅} encodes a cardinality constraint.
///
/// Variable names refer to the columns of the relation as named by its first
/// atom in the query. `atom` pins the constraint to one atom occurrence.
struct PartitionConstraint {
  std::string relation;
  std::vector<std::vector<std::string>> families;
  std::vector<std::string> y;
  std::uint64_t degree = 0;
  std::optional<std::size_t> atom;

  bool is_degree_constraint() const { return families.size() == 1; }
  bool is_cardinality_constraint() const { return families.size() == 1 && families[0].empty(); }

  static PartitionConstraint from_dc(const DegreeConstraint& dc);
};

/// A constraint resolved against one atom occurrence, in that atom's columns.
struct AtomConstraint {
  std::size_t atom = 0;
  std::vector<ColumnSet> families;
  ColumnSet y = 0;
  std::uint64_t degree = 0;
  /// Index into ConstraintSet::constraints().
  std::size_t source = 0;
};

class ConstraintSet {
 public:
  ConstraintSet() = default;
  explicit ConstraintSet(std::vector<PartitionConstraint> constraints);

  void add(PartitionConstraint constraint);
  const std::vector<PartitionConstraint>& constraints() const { return constraints_; }
  std::size_t size() const { return constraints_.size(); }
  bool empty() const { return constraints_.empty(); }

  /// Attaches every constraint to the atoms it applies to. Duplicate
  /// (atom, families, Y) entries keep the smallest degree. Constraints on
  /// relations absent from the query are dropped.
  std::vector<AtomConstraint> bind(const Query& query) const;

  /// Throws a coverage error unless every query variable lies in the Y of
  /// some cardinality constraint.
  void validate_coverage(const Query& query) const;

  /// Non-fatal findings, e.g. several PCs sharing (relation, Y).
  std::vector<std::string> warnings() const;

 private:
  std::vector<PartitionConstraint> constraints_;
};

/// Throws a schema error unless X ⊆ Y ⊆ schema.
void validate_dc_shape(const Relation& relation, ColumnSet x, ColumnSet y);

/// max over x of |π_Y σ_{X=x} R|; |π_Y R| when X = ∅; 0 for empty R.
std::uint64_t compute_dc(const Relation& relation, ColumnSet x, ColumnSet y);
std::uint64_t compute_dc(const Relation& relation, std::span<const std::string> x, std::span<const std::string> y);

bool check_dc(const Relation& relation, const DegreeConstraint& dc);

/// Parts must be indexed by exactly the constraint's families, in order.
bool check_pc_witness(const Relation& relation, const PartitionConstraint& pc, const Partitioning& parts);
bool check_pc_witness(const Relation& relation, std::uint64_t degree, const Partitioning& parts);

/// Minimal d with PC_R(families, Y, d), via the exact decomposition.
std::uint64_t pc_value(const Relation& relation, std::span<const ColumnSet> families, ColumnSet y);

struct PcProfile {
  std::vector<std::string> y;
  std::vector<std::uint64_t> dcs;  // per non-key column, DC({col}, Y)
  std::uint64_t max_dc = 0;
  std::uint64_t min_dc = 0;
  std::uint64_t pc = 0;
  std::size_t num_families = 0;
};

/// Non-key profile: Y = schema minus keys, families = singletons of Y.
PcProfile nonkey_pc_profile(const Relation& relation, std::span<const std::string> key_vars);

/// Whether the instance satisfies every bound constraint; on failure the
/// message names the offending relation and constraint.
struct ConstraintCheck {
  bool ok = true;
  std::string message;
};
ConstraintCheck check_constraints(const Query& query, const Instance& instance,
                                  std::span<const AtomConstraint> constraints);

}  // namespace pcj
