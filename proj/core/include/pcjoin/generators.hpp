#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcjoin/query.hpp"
#include "pcjoin/relation.hpp"
#include "pcjoin/statistics.hpp"

namespace pcj {

/// The 10-row Access(PersonID, RoomID) table.
Relation access_fixture(Catalog& catalog);
/// The 16-edge directed graph E(X, Y) of the degeneracy example.
Relation degeneracy_graph(Catalog& catalog);

/// k with k^3 = n for odd k, else a parameter error.
std::uint64_t odd_cube_root(std::uint64_t n);
/// s with 7 s^2 = n, else a parameter error.
std::uint64_t vaat_side(std::uint64_t n);

/// R_{X,Y,Z} = {(i, j, (i + j - floor(k/2)) mod k^2) : i < k^2, j < k}, k = n^{1/3}.
/// Values are interned as "<var>:<int>", so relations built over the same
/// variable names join on equal numbers.
Relation gen_mod_relation(Catalog& catalog, std::uint64_t n, const std::vector<std::string>& vars,
                          const std::string& name = "R");

/// C_{X,Y,Z} = {(i, j, i*s + j) : i, j < s}, s = sqrt(n/7).
Relation gen_complete_bipartite(Catalog& catalog, std::uint64_t n, const std::vector<std::string>& vars,
                                const std::string& name = "C", const std::string& prefix = "");
/// P_{X,Y,Z} = {(i, i, i) : i < n/7}.
Relation gen_disjoint_paths(Catalog& catalog, std::uint64_t n, const std::vector<std::string>& vars,
                            const std::string& name = "P", const std::string& prefix = "");

/// R1..R4 over the mod construction with R4 the full cube on [0, n^{1/3}).
Instance gen_hexagon_hard_dc(std::uint64_t n);
/// R1..R3 as above; R4 is a union of three degree-1 pieces, one per U, V, W.
Instance gen_pc_hexagon(std::uint64_t n, std::uint64_t seed);
/// Seven renamed sub-databases; every R_i has exactly n tuples.
Instance gen_vaat_hard(std::uint64_t n);

/// The hexagon constraint set with cardinality n; the PC on R4 is optional.
ConstraintSet hexagon_constraints(std::uint64_t n, bool with_pc);

/// Random relation over columns c0..c{y_arity-1} whose groups are planted
/// into the given families with at most target_d groups per (family, X-value).
Relation gen_planted_pc(Catalog& catalog, std::size_t num_groups, const std::vector<ColumnSet>& families,
                        std::size_t y_arity, std::uint64_t target_d, std::uint64_t seed);

struct ProfileTarget {
  std::uint64_t max_dc = 0;
  std::uint64_t min_dc = 0;
  std::uint64_t pc = 0;
  std::size_t num_families = 0;
};

/// Deterministic relation (id, c0..c{k-1}) with a unique key `id` whose
/// non-key profile equals the target. Requires min_dc ≥ k(pc-1)+1.
Relation gen_planted_profile(Catalog& catalog, const ProfileTarget& target, const std::string& name = "T");

}  // namespace pcj
