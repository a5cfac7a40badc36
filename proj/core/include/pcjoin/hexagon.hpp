#pragma once

#include <array>
#include <cstdint>

#include "pcjoin/relation.hpp"

namespace pcj {

struct HexagonStats {
  std::uint64_t r4_degree = 0;  // achieved degree of the R4 decomposition
  std::array<std::size_t, 3> part_sizes{};  // |R4^U|, |R4^V|, |R4^W|
  std::uint64_t outer_iterations = 0;
  std::uint64_t max_r4_candidates = 0;
  std::uint64_t max_terminal_candidates = 0;
};

/// The linear hexagon algorithm. Relations are positional:
/// r1(A,W,B), r2(B,U,C), r3(C,V,A), r4(U,V,W); output schema (A,B,C,U,V,W).
/// Throws ConstraintViolation when the greedy split of r4 needs degree > 3.
Relation hexagon_join(const Relation& r1, const Relation& r2, const Relation& r3, const Relation& r4,
                      HexagonStats* stats = nullptr);

}  // namespace pcj
