#include "pcjoin/cover_lp.hpp"

#include <algorithm>
#include <optional>

#include "pcjoin/error.hpp"

namespace pcj {

namespace {

// Solves A u = b over the rationals; nullopt when A is singular.
std::optional<std::vector<Rational>> solve_square(std::vector<std::vector<Rational>> a, std::vector<Rational> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && a[pivot][col] == 0) ++pivot;
    if (pivot == n) return std::nullopt;
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (std::size_t row = 0; row < n; ++row) {
      if (row == col || a[row][col] == 0) continue;
      const Rational factor = a[row][col] / a[col][col];
      for (std::size_t k = col; k < n; ++k) a[row][k] -= factor * a[col][k];
      b[row] -= factor * b[col];
    }
  }
  std::vector<Rational> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

}  // namespace

Monomial evaluate_cover(const CoverLP& lp, const std::vector<Rational>& weights) {
  Monomial out;
  for (std::size_t i = 0; i < lp.edges.size(); ++i) out *= Monomial::power(lp.sizes[i], weights[i]);
  return out;
}

bool is_feasible_cover(const CoverLP& lp, const std::vector<Rational>& weights) {
  if (weights.size() != lp.edges.size()) return false;
  for (const auto& w : weights) {
    if (w < 0) return false;
  }
  for (std::size_t v = 0; v < lp.num_variables; ++v) {
    Rational sum = 0;
    for (std::size_t i = 0; i < lp.edges.size(); ++i) {
      if (lp.edges[i] >> v & 1) sum += weights[i];
    }
    if (sum < 1) return false;
  }
  return true;
}

CoverSolution solve_cover_lp(const CoverLP& lp) {
  const std::size_t m = lp.edges.size();
  if (m > kMaxCoverEdges) fail(ErrorKind::ScaleExceeded, "LP scale exceeded: " + std::to_string(m) + " atoms > 16");
  if (lp.sizes.size() != m) fail(ErrorKind::Internal, "cover LP size vector mismatch");

  // Cover rows as edge masks; a row whose edge set contains another row's is implied.
  std::vector<std::uint32_t> rows;
  for (std::size_t v = 0; v < lp.num_variables; ++v) {
    std::uint32_t row = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (lp.edges[i] >> v & 1) row |= 1u << i;
    }
    if (row == 0) fail(ErrorKind::Coverage, "variable " + std::to_string(v) + " is in no edge of the cover LP");
    rows.push_back(row);
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  std::vector<std::uint32_t> minimal;
  for (auto r : rows) {
    bool implied = false;
    for (auto o : rows) {
      if (o != r && (o & ~r) == 0) implied = true;
    }
    if (!implied) minimal.push_back(r);
  }

  // Constraint k < minimal.size() is a cover row; the rest are u_i ≥ 0.
  const std::size_t total = minimal.size() + m;
  std::optional<CoverSolution> best;
  std::vector<std::size_t> pick;
  const auto consider = [&]() {
    std::vector<std::vector<Rational>> a(m, std::vector<Rational>(m, 0));
    std::vector<Rational> b(m, 0);
    for (std::size_t r = 0; r < m; ++r) {
      const std::size_t k = pick[r];
      if (k < minimal.size()) {
        for (std::size_t i = 0; i < m; ++i) a[r][i] = (minimal[k] >> i & 1) ? 1 : 0;
        b[r] = 1;
      } else {
        a[r][k - minimal.size()] = 1;
      }
    }
    auto u = solve_square(std::move(a), std::move(b));
    if (!u || !is_feasible_cover(lp, *u)) return;
    Monomial value = evaluate_cover(lp, *u);
    if (!best) {
      best = CoverSolution{std::move(*u), std::move(value)};
      return;
    }
    const int c = compare(value, best->objective);
    if (c < 0 || (c == 0 && *u < best->weights)) best = CoverSolution{std::move(*u), std::move(value)};
  };
  // Enumerate m-subsets of the constraints.
  const auto recurse = [&](auto&& self, std::size_t start) -> void {
    if (pick.size() == m) {
      consider();
      return;
    }
    for (std::size_t k = start; k + (m - pick.size()) <= total; ++k) {
      pick.push_back(k);
      self(self, k + 1);
      pick.pop_back();
    }
  };
  if (m == 0) {
    if (lp.num_variables != 0) fail(ErrorKind::Internal, "cover LP infeasible");
    return CoverSolution{{}, Monomial()};
  }
  recurse(recurse, 0);
  if (!best) fail(ErrorKind::Internal, "cover LP infeasible");
  return *best;
}

}  // namespace pcj
