#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pcjoin/bounds.hpp"
#include "pcjoin/error.hpp"
#include "pcjoin/generators.hpp"
#include "pcjoin/join.hpp"
#include "test_support.hpp"

using namespace pcj;

namespace {

std::vector<QueryDc> ccs(const Query& q, const std::vector<std::uint64_t>& sizes) {
  std::vector<QueryDc> out;
  for (std::size_t a = 0; a < q.num_atoms(); ++a) out.push_back({a, 0, q.atom_mask(a), sizes[a]});
  return out;
}

BigInt exact(const BoundValue& v) {
  BigInt out;
  EXPECT_TRUE(v.exact_integer(out)) << v.to_string();
  return out;
}

// min over u ∈ {0, 1/2, 1}^m of Σ u_i log N_i subject to the cover rows; optimal for binary atoms.
double half_grid_log_optimum(const Query& q, const std::vector<std::uint64_t>& sizes) {
  const std::size_t m = q.num_atoms();
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> u(m, 0);
  while (true) {
    bool feasible = true;
    for (std::size_t v = 0; v < q.num_variables() && feasible; ++v) {
      int sum = 0;
      for (std::size_t a = 0; a < m; ++a) {
        if (q.atom_mask(a) >> v & 1) sum += u[a];
      }
      feasible = sum >= 2;
    }
    if (feasible) {
      double obj = 0;
      for (std::size_t a = 0; a < m; ++a) obj += u[a] / 2.0 * std::log(static_cast<double>(sizes[a]));
      best = std::min(best, obj);
    }
    std::size_t pos = 0;
    while (pos < m && ++u[pos] == 3) u[pos++] = 0;
    if (pos == m) break;
  }
  return best;
}

// Exhaustive search over DC application sequences.
BigInt chain_oracle(const Query& q, const std::vector<QueryDc>& dcs, std::uint64_t bound, const BigInt& acc) {
  const std::uint64_t full = (std::uint64_t{1} << q.num_variables()) - 1;
  if (bound == full) return acc;
  BigInt best = -1;
  for (const auto& dc : dcs) {
    if ((dc.x & ~bound) != 0 || (dc.y & ~bound) == 0) continue;
    BigInt v = chain_oracle(q, dcs, bound | dc.y, acc * dc.degree);
    if (v >= 0 && (best < 0 || v < best)) best = v;
  }
  return best;
}

}  // namespace

TEST(PowerProduct, FloorAndExactness) {
  Monomial m = Monomial::power(16, Rational(3, 2));
  EXPECT_EQ(exact(BoundValue(m)), 64);
  Monomial two = Monomial::power(2, Rational(1, 2));
  EXPECT_EQ(two.floor(), 1);
  BigInt out;
  EXPECT_FALSE(two.exact_integer(out));
  EXPECT_EQ(compare(two * two, Monomial::integer(2)), 0);
  EXPECT_EQ(compare(Monomial::power(10, Rational(1, 3)), Monomial::power(3, Rational(2, 3))), 1);  // 10 > 9
  EXPECT_EQ(Monomial::power(0, Rational(1, 2)).floor(), 0);
  EXPECT_EQ(integer_root(BigInt(1000000), 3), 100);
  EXPECT_EQ(integer_root(BigInt(999999), 3), 99);
}

TEST(Agm, TriangleSixtyFour) {
  Query q = parse_query("Q(A,B,C) <- R(A,B), S(B,C), T(A,C).");
  auto r = agm_bound(q, ccs(q, {16, 16, 16}));
  EXPECT_EQ(exact(r.value), 64);
  ASSERT_EQ(r.cover.size(), 3u);
  for (const auto& u : r.cover) EXPECT_EQ(u, Rational(1, 2));
  EXPECT_EQ(evaluate_cover(r.lp, r.cover), r.value.terms()[0]);
  // value^2 = N1 N2 N3
  EXPECT_EQ(compare(r.value.terms()[0] * r.value.terms()[0], Monomial::integer(16 * 16 * 16)), 0);
}

TEST(Agm, SingleAtomAndPath) {
  Query single = parse_query("Q(A,B) <- R(A,B).");
  EXPECT_EQ(exact(agm_bound(single, ccs(single, {37})).value), 37);
  Query path = parse_query("Q(A,B,C) <- R(A,B), S(B,C).");
  auto r = agm_bound(path, ccs(path, {5, 7}));
  EXPECT_EQ(exact(r.value), 35);
  EXPECT_EQ(r.cover, (std::vector<Rational>{1, 1}));
}

TEST(Agm, StarMatchesGrid) {
  Query star = parse_query("Q(A,B,C,D) <- S(A,B), T(A,C), U(A,D).");
  auto r = agm_bound(star, ccs(star, {9, 9, 9}));
  EXPECT_EQ(exact(r.value), 729);
  EXPECT_NEAR(std::log(r.value.to_double()), half_grid_log_optimum(star, {9, 9, 9}), 1e-9);
}

TEST(Agm, RandomBinaryQueriesMatchHalfIntegralGrid) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 80; ++trial) {
    const std::size_t vars = 3 + rng() % 3;
    const std::size_t atoms = 2 + rng() % 4;
    std::vector<Atom> body;
    std::set<std::size_t> used;
    for (std::size_t a = 0; a < atoms; ++a) {
      std::size_t x = rng() % vars, y = rng() % vars;
      if (x == y) y = (x + 1) % vars;
      body.push_back({"R" + std::to_string(a), {std::string(1, 'A' + x), std::string(1, 'A' + y)}});
      used.insert(x);
      used.insert(y);
    }
    std::vector<std::string> head;
    for (auto v : used) head.push_back(std::string(1, 'A' + v));
    Query q(head, body);
    std::vector<std::uint64_t> sizes;
    for (std::size_t a = 0; a < atoms; ++a) sizes.push_back(1 + rng() % 50);
    auto r = agm_bound(q, ccs(q, sizes));
    EXPECT_TRUE(is_feasible_cover(r.lp, r.cover));
    EXPECT_NEAR(std::log(r.value.to_double()), half_grid_log_optimum(q, sizes), 1e-9) << q.to_string();
  }
}

TEST(Agm, Errors) {
  Query q = parse_query("Q(A,B,C) <- R(A,B), S(B,C).");
  std::vector<QueryDc> only_r = {{0, 0, q.atom_mask(0), 5}};
  try {
    agm_bound(q, only_r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Coverage);
  }
  std::vector<Atom> body;
  std::vector<std::string> head;
  for (int i = 0; i < 17; ++i) {
    head.push_back("V" + std::to_string(i));
    body.push_back({"R" + std::to_string(i), {"V" + std::to_string(i)}});
  }
  Query big(head, body);
  std::vector<std::uint64_t> sizes(17, 2);
  try {
    agm_bound(big, ccs(big, sizes));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ScaleExceeded);
  }
}

TEST(Agm, ZeroCardinality) {
  Query q = parse_query("Q(A,B,C) <- R(A,B), S(B,C).");
  auto r = agm_bound(q, ccs(q, {0, 7}));
  EXPECT_EQ(exact(r.value), 0);
}

TEST(Chain, SingleRelation) {
  Query q = parse_query("Q(A,B) <- R(A,B).");
  std::vector<QueryDc> dcs = {{0, 0, 3, 12}};
  EXPECT_EQ(exact(chain_dc_bound(q, dcs).value), 12);
  dcs.push_back({0, 0, 1, 3});
  dcs.push_back({0, 1, 3, 2});
  EXPECT_EQ(exact(chain_dc_bound(q, dcs).value), 6);
}

TEST(Chain, ZeroDegree) {
  Query q = parse_query("Q(A,B) <- R(A,B).");
  std::vector<QueryDc> dcs = {{0, 0, 3, 0}};
  EXPECT_EQ(exact(chain_dc_bound(q, dcs).value), 0);
}

TEST(Chain, Uncovered) {
  Query q = parse_query("Q(A,B,C) <- R(A,B), S(B,C).");
  std::vector<QueryDc> dcs = {{0, 0, 3, 12}};
  EXPECT_THROW(chain_dc_bound(q, dcs), Error);
}

TEST(Chain, HexagonDcOnlyIsQuadratic) {
  Query q = hexagon_query();
  for (std::uint64_t n : {27u, 125u, 1000u}) {
    auto dcs = to_query_dcs(q, hexagon_constraints(n, false).bind(q));
    auto r = chain_dc_bound(q, dcs);
    EXPECT_EQ(exact(r.value), BigInt(n) * n);
    EXPECT_EQ(exact(r.value), chain_oracle(q, dcs, 0, 1));
  }
}

TEST(Extended, HexagonWithPcIsLinear) {
  Query q = hexagon_query();
  ChainEstimator chain;
  for (std::uint64_t n : {27u, 343u}) {
    auto cs = hexagon_constraints(n, true).bind(q);
    auto r = extended_bound(q, cs, chain);
    ASSERT_EQ(r.combinations.size(), 3u);
    EXPECT_EQ(exact(r.value), 3 * BigInt(n));
    for (const auto& c : r.combinations) {
      EXPECT_EQ(exact(c.result->value), chain_oracle(q, c.dcs, 0, 1));
    }
  }
}

TEST(Extended, SingletonFamiliesEqualBase) {
  Query q = parse_query("Q(A,B,C) <- R(A,B), S(B,C), T(A,C).");
  ConstraintSet cs;
  cs.add({"R", {{}}, {"A", "B"}, 16, std::nullopt});
  cs.add({"S", {{}}, {"B", "C"}, 16, std::nullopt});
  cs.add({"T", {{}}, {"A", "C"}, 16, std::nullopt});
  cs.add({"R", {{"A"}}, {"A", "B"}, 2, std::nullopt});
  auto bound = cs.bind(q);
  for (const BoundEstimator* base : std::initializer_list<const BoundEstimator*>{new AgmEstimator, new ChainEstimator}) {
    auto ext = extended_bound(q, bound, *base);
    auto plain = base->estimate(q, to_query_dcs(q, bound));
    EXPECT_EQ(ext.value, plain.value);
    EXPECT_EQ(ext.combinations.size(), 1u);
    delete base;
  }
}

TEST(Extended, CombinationTableIsProduct) {
  Query q = parse_query("Q(A,B,C) <- R(A,B), S(A,B,C).");
  ConstraintSet cs;
  cs.add({"R", {{}}, {"A", "B"}, 10, std::nullopt});
  cs.add({"S", {{}}, {"A", "B", "C"}, 10, std::nullopt});
  cs.add({"R", {{"A"}, {"B"}}, {"A", "B"}, 2, std::nullopt});
  cs.add({"S", {{"A"}, {"B"}, {"C"}}, {"A", "B", "C"}, 3, std::nullopt});
  ChainEstimator chain;
  auto r = extended_bound(q, cs.bind(q), chain, 3);
  EXPECT_EQ(r.combinations.size(), 6u);
  auto serial = extended_bound(q, cs.bind(q), chain, 1);
  EXPECT_EQ(r.value, serial.value);
}

TEST(Extended, MonotoneInDegree) {
  Query q = hexagon_query();
  ChainEstimator chain;
  AgmEstimator agm;
  for (const BoundEstimator* base : {static_cast<const BoundEstimator*>(&chain), static_cast<const BoundEstimator*>(&agm)}) {
    auto lo = hexagon_constraints(64 * 27, true).bind(q);
    auto hi = lo;
    for (auto& c : hi) c.degree += 1;
    auto a = extended_bound(q, lo, *base).value;
    auto b = extended_bound(q, hi, *base).value;
    EXPECT_LE(a.to_double(), b.to_double());
    EXPECT_LE(a.certified_integer(), b.certified_integer());
  }
}

TEST(Extended, GrowthUnderScaledDegrees) {
  // CB(Q, alpha*DC) <= f(alpha) CB(Q, DC): measured for alpha in {2, 3}.
  Query q = hexagon_query();
  ChainEstimator chain;
  AgmEstimator agm;
  for (const BoundEstimator* base : {static_cast<const BoundEstimator*>(&chain), static_cast<const BoundEstimator*>(&agm)}) {
    auto dcs = to_query_dcs(q, hexagon_constraints(27, false).bind(q));
    const double one = base->estimate(q, dcs).value.to_double();
    for (std::uint64_t alpha : {2u, 3u}) {
      auto scaled = dcs;
      for (auto& d : scaled) d.degree *= alpha;
      const double v = base->estimate(q, scaled).value.to_double();
      // At most alpha^(#atoms) for either base on this query.
      EXPECT_LE(v, std::pow(static_cast<double>(alpha), 4.0) * one * (1 + 1e-9));
      EXPECT_GE(v, one);
    }
  }
}

TEST(Extended, SoundOnSmallInstances) {
  std::mt19937_64 rng(99);
  Query q = parse_query("Q(A,B,C) <- R(A,B), S(B,C), T(A,C).");
  ChainEstimator chain;
  AgmEstimator agm;
  for (int trial = 0; trial < 60; ++trial) {
    Instance inst;
    inst.bind(oracle::random_relation(inst.catalog(), rng, {"A", "B"}, 25, 5, "R"));
    inst.bind(oracle::random_relation(inst.catalog(), rng, {"B", "C"}, 25, 5, "S"));
    inst.bind(oracle::random_relation(inst.catalog(), rng, {"A", "C"}, 25, 5, "T"));
    ConstraintSet cs;
    for (const auto& atom : q.atoms()) {
      const Relation& r = inst.relation(atom.relation);
      cs.add({atom.relation, {{}}, atom.variables, r.size(), std::nullopt});
      const std::vector<ColumnSet> fams = {column_bit(0), column_bit(1)};
      cs.add({atom.relation, {{atom.variables[0]}, {atom.variables[1]}}, atom.variables, pc_value(r, fams, 3), std::nullopt});
    }
    const auto out = nested_loop_join_oracle(q, inst).size();
    for (const BoundEstimator* base : {static_cast<const BoundEstimator*>(&chain), static_cast<const BoundEstimator*>(&agm)}) {
      EXPECT_LE(BigInt(out), extended_bound(q, cs.bind(q), *base).value.certified_integer());
    }
  }
}
