#pragma once

#include <cstdint>
#include <vector>

#include "pcjoin/power_product.hpp"

namespace pcj {

/// min Σ u_i log N_i  s.t.  Σ_{i : v ∈ edge_i} u_i ≥ 1 for every variable v, u ≥ 0.
struct CoverLP {
  std::size_t num_variables = 0;
  std::vector<std::uint64_t> edges;  // variable masks
  std::vector<BigInt> sizes;         // N_i ≥ 1
};

struct CoverSolution {
  std::vector<Rational> weights;
  Monomial objective;  // Π N_i^{u_i}
};

inline constexpr std::size_t kMaxCoverEdges = 16;

/// Exact optimum by basic-feasible-solution enumeration. Ties between optimal
/// vertices go to the lexicographically smallest weight vector.
CoverSolution solve_cover_lp(const CoverLP& lp);

/// Π N_i^{u_i} for arbitrary weights.
Monomial evaluate_cover(const CoverLP& lp, const std::vector<Rational>& weights);
bool is_feasible_cover(const CoverLP& lp, const std::vector<Rational>& weights);

}  // namespace pcj
