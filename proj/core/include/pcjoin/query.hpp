#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pcjoin/relation.hpp"

namespace pcj {

struct Atom {
  std::string relation;
  std::vector<std::string> variables;
};

/// A full conjunctive query Q(Z) <- R1(Z1), ..., Rk(Zk).
///
/// Variables are numbered by their position in the head.
class Query {
 public:
  Query(std::vector<std::string> head, std::vector<Atom> atoms);

  const std::vector<std::string>& head() const { return head_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t num_variables() const { return head_.size(); }
  std::size_t num_atoms() const { return atoms_.size(); }

  std::size_t variable_index(std::string_view name) const;
  /// Query-variable ids of an atom's columns, in column order.
  const std::vector<std::size_t>& atom_variables(std::size_t atom) const { return atom_vars_[atom]; }
  /// Bitmask over query-variable ids.
  std::uint64_t atom_mask(std::size_t atom) const { return atom_masks_[atom]; }
  /// Query-variable mask of a column set of one atom.
  std::uint64_t variables_of(std::size_t atom, ColumnSet columns) const;

  std::string to_string() const;

 private:
  std::vector<std::string> head_;
  std::vector<Atom> atoms_;
  std::vector<std::vector<std::size_t>> atom_vars_;
  std::vector<std::uint64_t> atom_masks_;
};

/// Grammar: `Q(V1,...,Vk) <- R1(A,B), R2(B,C), ... .`
/// Identifiers are [A-Za-z0-9_]+, whitespace is free, `#` starts a line
/// comment, and the final period is optional.
Query parse_query(std::string_view text);

/// Q(A,B,C,U,V,W) <- R1(A,W,B), R2(B,U,C), R3(C,V,A), R4(U,V,W).
Query hexagon_query();

/// Relations bound by name plus the dictionary that interns their values.
class Instance {
 public:
  Catalog& catalog() { return catalog_; }
  const Catalog& catalog() const { return catalog_; }

  void bind(Relation relation);
  bool contains(std::string_view name) const;
  const Relation& relation(std::string_view name) const;
  const std::map<std::string, Relation, std::less<>>& relations() const { return relations_; }

  /// Every atom resolves to a relation of matching arity.
  void check_binds(const Query& query) const;

 private:
  Catalog catalog_;
  std::map<std::string, Relation, std::less<>> relations_;
};

}  // namespace pcj
