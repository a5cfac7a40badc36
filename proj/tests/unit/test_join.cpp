#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "pcjoin/error.hpp"
#include "pcjoin/generators.hpp"
#include "pcjoin/hexagon.hpp"
#include "pcjoin/join.hpp"
#include "test_support.hpp"

using namespace pcj;

namespace {

// Independent prefix-join oracle: ⋈_j π_{Z1..Zi} R_j by filtering the cross
// product of per-variable active domains.
std::uint64_t prefix_size(const Query& q, const Instance& inst, const VariableOrder& order, std::size_t i) {
  std::vector<std::size_t> vars(order.begin(), order.begin() + static_cast<long>(i));
  std::vector<std::set<Value>> domains(vars.size());
  for (std::size_t k = 0; k < vars.size(); ++k) {
    for (std::size_t a = 0; a < q.num_atoms(); ++a) {
      const auto& av = q.atom_variables(a);
      for (std::size_t c = 0; c < av.size(); ++c) {
        if (av[c] != vars[k]) continue;
        const Relation& r = inst.relation(q.atoms()[a].relation);
        for (std::size_t row = 0; row < r.size(); ++row) domains[k].insert(r.at(row, c));
      }
    }
  }
  std::vector<std::set<std::vector<Value>>> projections(q.num_atoms());
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> bound_cols(q.num_atoms());
  for (std::size_t a = 0; a < q.num_atoms(); ++a) {
    const auto& av = q.atom_variables(a);
    for (std::size_t c = 0; c < av.size(); ++c) {
      auto it = std::find(vars.begin(), vars.end(), av[c]);
      if (it != vars.end()) bound_cols[a].push_back({c, static_cast<std::size_t>(it - vars.begin())});
    }
    const Relation& r = inst.relation(q.atoms()[a].relation);
    for (std::size_t row = 0; row < r.size(); ++row) {
      std::vector<Value> key;
      for (auto [c, k] : bound_cols[a]) key.push_back(r.at(row, c));
      projections[a].insert(key);
    }
  }
  std::uint64_t count = 0;
  std::vector<Value> assignment(vars.size());
  const auto recurse = [&](auto&& self, std::size_t k) -> void {
    if (k == vars.size()) {
      for (std::size_t a = 0; a < q.num_atoms(); ++a) {
        std::vector<Value> key;
        for (auto [c, pos] : bound_cols[a]) key.push_back(assignment[pos]);
        if (!projections[a].count(key)) return;
      }
      ++count;
      return;
    }
    for (auto v : domains[k]) {
      assignment[k] = v;
      self(self, k + 1);
    }
  };
  recurse(recurse, 0);
  return count;
}

Query random_query(std::mt19937_64& rng) {
  const std::size_t vars = 2 + rng() % 5;
  const std::size_t atoms = 1 + rng() % 6;
  std::vector<Atom> body;
  std::set<std::size_t> used;
  for (std::size_t a = 0; a < atoms; ++a) {
    const std::size_t arity = 1 + rng() % std::min<std::size_t>(3, vars);
    std::vector<std::size_t> pool(vars);
    std::iota(pool.begin(), pool.end(), 0);
    std::shuffle(pool.begin(), pool.end(), rng);
    Atom atom{"R" + std::to_string(a), {}};
    for (std::size_t c = 0; c < arity; ++c) {
      atom.variables.push_back(std::string(1, static_cast<char>('A' + pool[c])));
      used.insert(pool[c]);
    }
    body.push_back(atom);
  }
  std::vector<std::string> head;
  for (auto v : used) head.push_back(std::string(1, static_cast<char>('A' + v)));
  std::shuffle(head.begin(), head.end(), rng);
  return Query(head, body);
}

}  // namespace

TEST(Oracle, DirectedThreeCycle) {
  Catalog catalog;
  const Value a = catalog.intern("a"), b = catalog.intern("b"), c = catalog.intern("c");
  Relation e("E", {"X", "Y"}, {a, b, b, c, c, a});
  Instance inst;
  inst.bind(e);
  Query q = parse_query("Q(A,B,C) <- E(A,B), E(B,C), E(C,A).");
  EXPECT_EQ(nested_loop_join_oracle(q, inst).size(), 3u);
  EXPECT_EQ(generic_join(q, inst).size(), 3u);
}

TEST(Oracle, EmptyAtomAndSingleAtom) {
  Instance inst;
  Catalog& cat = inst.catalog();
  inst.bind(Relation("R", {"A", "B"}, {cat.intern("1"), cat.intern("2"), cat.intern("3"), cat.intern("4")}));
  inst.bind(Relation("S", {"B", "C"}));
  Query q = parse_query("Q(A,B,C) <- R(A,B), S(B,C).");
  EXPECT_TRUE(nested_loop_join_oracle(q, inst).empty());
  EXPECT_TRUE(generic_join(q, inst).empty());
  Query single = parse_query("Q(A,B) <- R(A,B).");
  EXPECT_EQ(nested_loop_join_oracle(single, inst).data(), inst.relation("R").data());
  EXPECT_EQ(generic_join(single, inst).data(), inst.relation("R").data());
}

TEST(GenericJoin, MatchesOracleOnRandomQueries) {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 300; ++trial) {
    Query q = random_query(rng);
    Instance inst;
    for (const auto& atom : q.atoms()) {
      const std::size_t n = rng() % 12;
      std::vector<Value> data;
      for (std::size_t i = 0; i < n * atom.variables.size(); ++i) data.push_back(inst.catalog().intern(std::to_string(rng() % 3)));
      inst.bind(Relation(atom.relation, atom.variables, data));
    }
    auto expected = nested_loop_join_oracle(q, inst);
    EXPECT_EQ(generic_join(q, inst), expected) << q.to_string();
    VariableOrder order(q.num_variables());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    EXPECT_EQ(generic_join(q, inst, order), expected) << q.to_string();
  }
}

TEST(GenericJoin, AgreeingSingletons) {
  Instance inst;
  auto& cat = inst.catalog();
  inst.bind(Relation("R", {"A", "B"}, {cat.intern("x"), cat.intern("y")}));
  inst.bind(Relation("S", {"B", "C"}, {cat.intern("y"), cat.intern("z")}));
  Query q = parse_query("Q(A,B,C) <- R(A,B), S(B,C).");
  EXPECT_EQ(generic_join(q, inst).size(), 1u);
}

TEST(GenericJoin, HexagonHardDcAtSmallScale) {
  Instance inst = gen_hexagon_hard_dc(27);
  Query q = hexagon_query();
  auto expected = nested_loop_join_oracle(q, inst);
  EXPECT_EQ(expected.size(), 63u);
  EXPECT_EQ(generic_join(q, inst), expected);
}

TEST(GenericJoin, OrderInvarianceOnHexagonShapes) {
  std::mt19937_64 rng(5);
  Query q = hexagon_query();
  for (int trial = 0; trial < 5; ++trial) {
    Instance inst;
    for (const auto& atom : q.atoms()) {
      std::vector<Value> data;
      for (int i = 0; i < 40 * 3; ++i) data.push_back(inst.catalog().intern(std::to_string(rng() % 3)));
      inst.bind(Relation(atom.relation, atom.variables, data));
    }
    auto expected = nested_loop_join_oracle(q, inst);
    VariableOrder order = {0, 1, 2, 3, 4, 5};
    do {
      ASSERT_EQ(generic_join(q, inst, order), expected);
    } while (std::next_permutation(order.begin(), order.end()));
  }
}

TEST(VaatProfile, PrefixSizesMatchOracle) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 60; ++trial) {
    Query q = random_query(rng);
    Instance inst;
    for (const auto& atom : q.atoms()) {
      std::vector<Value> data;
      const std::size_t n = 1 + rng() % 10;
      for (std::size_t i = 0; i < n * atom.variables.size(); ++i) data.push_back(inst.catalog().intern(std::to_string(rng() % 3)));
      inst.bind(Relation(atom.relation, atom.variables, data));
    }
    VariableOrder order(q.num_variables());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    auto profile = vaat_profile(q, inst, order);
    ASSERT_EQ(profile.sizes.size(), q.num_variables());
    for (std::size_t i = 1; i <= q.num_variables(); ++i) {
      EXPECT_EQ(profile.sizes[i - 1], prefix_size(q, inst, order, i)) << q.to_string() << " prefix " << i;
    }
    EXPECT_EQ(profile.sizes.back(), nested_loop_join_oracle(q, inst).size());
  }
}

TEST(Order, ParseAndValidate) {
  Query q = hexagon_query();
  std::vector<std::string> names = {"A", "W", "B", "U", "V", "C"};
  auto order = parse_order(q, names);
  EXPECT_EQ(order_names(q, order), names);
  std::vector<std::string> bad = {"A", "A", "B", "U", "V", "C"};
  EXPECT_THROW(parse_order(q, bad), Error);
}

TEST(Hexagon, MatchesOracleOnPcInstances) {
  Query q = hexagon_query();
  for (std::uint64_t n : {27u, 125u, 343u}) {
    Instance inst = gen_pc_hexagon(n, 7);
    HexagonStats stats;
    auto got = hexagon_join(inst.relation("R1"), inst.relation("R2"), inst.relation("R3"), inst.relation("R4"), &stats);
    EXPECT_EQ(got, nested_loop_join_oracle(q, inst)) << n;
    EXPECT_LE(stats.max_r4_candidates, 3u);
    EXPECT_LE(stats.max_terminal_candidates, 1u);
    EXPECT_LE(stats.r4_degree, 3u);
  }
}

TEST(Hexagon, EmptyR4) {
  Instance inst = gen_pc_hexagon(27, 1);
  Relation empty("R4", {"U", "V", "W"});
  EXPECT_TRUE(hexagon_join(inst.relation("R1"), inst.relation("R2"), inst.relation("R3"), empty).empty());
}

TEST(Hexagon, RejectsDenseR4) {
  Instance inst = gen_hexagon_hard_dc(343);
  try {
    hexagon_join(inst.relation("R1"), inst.relation("R2"), inst.relation("R3"), inst.relation("R4"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConstraintViolation);
    EXPECT_NE(std::string(e.what()).find("PC precondition violated"), std::string::npos);
  }
}

namespace {

void expect_partition(const LiftedResult& r, const Relation& expected) {
  std::set<std::vector<Value>> seen;
  std::size_t total = 0;
  for (const auto& part : r.sub_outputs) {
    for (std::size_t row = 0; row < part.size(); ++row) {
      EXPECT_TRUE(seen.emplace(part.tuple(row).begin(), part.tuple(row).end()).second) << "sub-outputs overlap";
    }
    total += part.size();
  }
  EXPECT_EQ(total, expected.size());
  EXPECT_EQ(r.output, expected);
}

}  // namespace

TEST(Lifted, SingletonFamiliesIsOneCombination) {
  Instance inst = gen_pc_hexagon(27, 2);
  Query q = hexagon_query();
  auto bound = hexagon_constraints(27, false).bind(q);
  auto r = pc_lifted_join(q, inst, bound);
  EXPECT_EQ(r.sub_outputs.size(), 1u);
  EXPECT_EQ(r.output, generic_join(q, inst));
}

TEST(Lifted, HexagonPcThreeDisjointParts) {
  Query q = hexagon_query();
  for (std::uint64_t n : {27u, 125u}) {
    Instance inst = gen_pc_hexagon(n, 3);
    auto bound = hexagon_constraints(n, true).bind(q);
    auto expected = nested_loop_join_oracle(q, inst);
    for (auto base : {LiftedBase::Generic, LiftedBase::Hexagon}) {
      LiftedOptions opts;
      opts.base = base;
      opts.jobs = 2;
      auto r = pc_lifted_join(q, inst, bound, opts);
      EXPECT_EQ(r.sub_outputs.size(), 3u);
      expect_partition(r, expected);
    }
  }
}

TEST(Lifted, TwoPcsGiveFourParts) {
  std::mt19937_64 rng(4);
  Query q = parse_query("Q(A,B,C) <- R(A,B), S(B,C), T(A,C).");
  for (int trial = 0; trial < 40; ++trial) {
    Instance inst;
    for (const auto& atom : q.atoms()) {
      std::vector<Value> data;
      for (int i = 0; i < 30; ++i) data.push_back(inst.catalog().intern(std::to_string(rng() % 6)));
      inst.bind(Relation(atom.relation, atom.variables, data));
    }
    ConstraintSet cs;
    const std::vector<ColumnSet> fams = {column_bit(0), column_bit(1)};
    cs.add({"R", {{"A"}, {"B"}}, {"A", "B"}, pc_value(inst.relation("R"), fams, 3), std::nullopt});
    cs.add({"S", {{"B"}, {"C"}}, {"B", "C"}, pc_value(inst.relation("S"), fams, 3), std::nullopt});
    auto r = pc_lifted_join(q, inst, cs.bind(q));
    EXPECT_EQ(r.sub_outputs.size(), 4u);
    expect_partition(r, nested_loop_join_oracle(q, inst));
  }
}

TEST(Lifted, ViolationNamesRelation) {
  Instance inst = gen_hexagon_hard_dc(125);
  Query q = hexagon_query();
  try {
    pc_lifted_join(q, inst, hexagon_constraints(125, true).bind(q));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConstraintViolation);
    EXPECT_NE(std::string(e.what()).find("R4"), std::string::npos);
  }
}
