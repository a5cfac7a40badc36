#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include <json.hpp>

#include "pcjoin/decomposition.hpp"
#include "pcjoin/error.hpp"
#include "pcjoin/generators.hpp"
#include "pcjoin/statistics.hpp"
#include "test_support.hpp"

using namespace pcj;

namespace {

const std::vector<ColumnSet> kPair = {column_bit(0), column_bit(1)};

struct Case {
  Catalog catalog;
  Relation relation;
  std::vector<ColumnSet> families;
  ColumnSet y = 0;
};

// Random relation plus a random valid family list over a random Y.
Case random_case(std::mt19937_64& rng, std::size_t max_tuples) {
  Case c;
  const std::size_t arity = 2 + rng() % 2;
  std::vector<std::string> schema;
  for (std::size_t i = 0; i < arity; ++i) schema.push_back(std::string(1, static_cast<char>('A' + i)));
  c.relation = oracle::random_relation(c.catalog, rng, schema, max_tuples, 3 + rng() % 3);
  c.y = all_columns(arity);
  if (arity == 3 && rng() % 3 == 0) c.y = 3;
  const std::size_t k = 2 + rng() % 2;
  std::set<ColumnSet> fams;
  for (int attempt = 0; fams.size() < k && attempt < 50; ++attempt) {
    ColumnSet x = rng() & c.y;
    if (x != c.y || rng() % 4 == 0) fams.insert(x);
  }
  c.families.assign(fams.begin(), fams.end());
  std::shuffle(c.families.begin(), c.families.end(), rng);
  return c;
}

std::size_t group_count(const Relation& r, ColumnSet y) { return r.empty() ? 0 : index_keys(r, y).num_keys(); }

}  // namespace

TEST(Approx, AccessWithinFactorTwo) {
  Catalog catalog;
  Relation access = access_fixture(catalog);
  auto p = decompose_approx(access, kPair, 3);
  EXPECT_GE(p.achieved_degree, 1u);
  EXPECT_LE(p.achieved_degree, 2u);
  EXPECT_TRUE(check_pc_witness(access, p.achieved_degree, p));
}

TEST(Approx, EmptyRelation) {
  Relation r("R", {"A", "B"});
  auto p = decompose_approx(r, kPair, 3);
  EXPECT_EQ(p.achieved_degree, 0u);
  for (const auto& part : p.parts) EXPECT_TRUE(part.empty());
}

TEST(Approx, ShapeViolation) {
  Catalog catalog;
  Relation access = access_fixture(catalog);
  const std::vector<ColumnSet> bad = {column_bit(0), column_bit(0)};
  EXPECT_THROW(decompose_approx(access, bad, 3), Error);
  const std::vector<ColumnSet> outside = {column_bit(1)};
  EXPECT_THROW(decompose_approx(access, outside, column_bit(0)), Error);
}

TEST(Approx, FactorGuaranteeOnRandom) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 500; ++trial) {
    Case c = random_case(rng, 30);
    auto approx = decompose_approx(c.relation, c.families, c.y);
    auto exact = decompose_exact(c.relation, c.families, c.y);
    EXPECT_TRUE(check_pc_witness(c.relation, approx.achieved_degree, approx));
    EXPECT_LE(approx.achieved_degree, c.families.size() * exact.achieved_degree);
    EXPECT_GE(approx.achieved_degree, exact.achieved_degree);
  }
}

TEST(Exact, Fixtures) {
  Catalog catalog;
  Relation access = access_fixture(catalog);
  auto p = decompose_exact(access, kPair, 3);
  EXPECT_EQ(p.achieved_degree, 1u);
  EXPECT_TRUE(check_pc_witness(access, 1, p));
  // At most one of Porter's four rows can stay on the person side.
  const Value porter = *catalog.find("Porter");
  int person_side = 0;
  for (std::size_t row = 0; row < access.size(); ++row) {
    if (access.at(row, 0) == porter && p.part_of_row[row] == 0) ++person_side;
  }
  EXPECT_LE(person_side, 1);
  Relation graph = degeneracy_graph(catalog);
  EXPECT_EQ(decompose_exact(graph, kPair, 3).achieved_degree, 1u);
}

TEST(Exact, MatchesBruteForce) {
  std::mt19937_64 rng(33);
  int compared = 0;
  while (compared < 1000) {
    Case c = random_case(rng, 12);
    if (group_count(c.relation, c.y) > 8) continue;
    auto exact = decompose_exact(c.relation, c.families, c.y);
    auto brute = decompose_bruteforce(c.relation, c.families, c.y);
    ASSERT_EQ(exact.achieved_degree, brute.achieved_degree) << "trial " << compared;
    EXPECT_TRUE(check_pc_witness(c.relation, exact.achieved_degree, exact));
    ++compared;
  }
}

TEST(Exact, RunningDegreeIsOptimalForEveryPrefix) {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 200; ++trial) {
    Case c = random_case(rng, 10);
    ExactDecomposer state(c.relation, c.families, c.y);
    const auto& groups = state.groups();
    std::vector<std::uint32_t> rows;
    for (std::uint32_t g = 0; g < groups.num_groups(); ++g) {
      state.insert(g);
      for (auto row : groups.rows(g)) rows.push_back(row);
      std::vector<std::uint32_t> sorted = rows;
      std::sort(sorted.begin(), sorted.end());
      Relation prefix = c.relation.subset(sorted);
      EXPECT_EQ(state.degree(), decompose_bruteforce(prefix, c.families, c.y).achieved_degree);
      EXPECT_EQ(state.max_load(), state.degree());
    }
  }
}

TEST(AugmentingPath, NoneAtDegreeZero) {
  Catalog catalog;
  Relation access = access_fixture(catalog);
  ExactDecomposer state(access, kPair, 3);
  EXPECT_FALSE(state.find_augmenting_path(0).has_value());
}

TEST(AugmentingPath, ZeroHopWhenSlackExists) {
  Catalog catalog;
  Relation access = access_fixture(catalog);
  ExactDecomposer state(access, kPair, 3);
  state.insert(0);
  ASSERT_EQ(state.degree(), 1u);
  // Group 1 is (Ben, Beacon Hall): Ben is unused on the person side.
  auto path = state.find_augmenting_path(1);
  ASSERT_TRUE(path.has_value());
  EXPECT_TRUE(path->groups.empty());
  EXPECT_EQ(path->families.size(), 1u);
}

TEST(AugmentingPath, ApplyNeverRaisesDegreeAndAbsenceForcesGrowth) {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 300; ++trial) {
    Case c = random_case(rng, 10);
    ExactDecomposer state(c.relation, c.families, c.y);
    const auto& groups = state.groups();
    std::vector<std::uint32_t> rows;
    for (std::uint32_t g = 0; g < groups.num_groups(); ++g) {
      const auto before = state.degree();
      auto path = state.find_augmenting_path(g);
      for (auto row : groups.rows(g)) rows.push_back(row);
      std::vector<std::uint32_t> sorted = rows;
      std::sort(sorted.begin(), sorted.end());
      if (path) {
        // Path shape: consecutive groups share the X-value of the family between them.
        ASSERT_EQ(path->families.size(), path->groups.size() + 1);
        for (std::size_t i = 0; i < path->groups.size(); ++i) {
          EXPECT_EQ(state.family_of(path->groups[i]), path->families[i]);
          const std::uint32_t prev = i == 0 ? g : path->groups[i - 1];
          EXPECT_EQ(groups.node(path->families[i], prev), groups.node(path->families[i], path->groups[i]));
        }
        state.apply(*path, g);
        EXPECT_EQ(state.max_load(), before);
      } else {
        Relation prefix = c.relation.subset(sorted);
        EXPECT_GT(decompose_bruteforce(prefix, c.families, c.y).achieved_degree, before);
        state.insert(g);
      }
    }
  }
}

TEST(BruteForce, Fixtures) {
  Catalog catalog;
  Relation access = access_fixture(catalog);
  EXPECT_EQ(decompose_bruteforce(access, kPair, 3).achieved_degree, 1u);
  Relation single("R", {"A", "B"}, {catalog.intern("x"), catalog.intern("y")});
  EXPECT_EQ(decompose_bruteforce(single, kPair, 3).achieved_degree, 1u);
}

TEST(BruteForce, ScaleLimit) {
  Catalog catalog;
  Relation graph = degeneracy_graph(catalog);
  try {
    decompose_bruteforce(graph, kPair, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ScaleExceeded);
    EXPECT_NE(std::string(e.what()).find("oracle scale exceeded"), std::string::npos);
  }
}

TEST(Partitioning, GroupsStayTogether) {
  Catalog catalog;
  std::mt19937_64 rng(66);
  for (int trial = 0; trial < 100; ++trial) {
    Relation r = oracle::random_relation(catalog, rng, {"A", "B", "C"}, 30, 3);
    const std::vector<ColumnSet> fams = {column_bit(0), column_bit(1)};
    for (auto p : {decompose_approx(r, fams, 3), decompose_exact(r, fams, 3)}) {
      std::map<std::pair<Value, Value>, std::uint32_t> part_of;
      for (std::size_t row = 0; row < r.size(); ++row) {
        auto [it, fresh] = part_of.emplace(std::pair(r.at(row, 0), r.at(row, 1)), p.part_of_row[row]);
        if (!fresh) EXPECT_EQ(it->second, p.part_of_row[row]);
      }
    }
  }
}

TEST(BucketQueue, PopsInNonDecreasingOrderUnderDecrements) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::vector<std::uint32_t>> counts(3);
    for (auto& lane : counts) {
      lane.resize(1 + rng() % 8);
      for (auto& c : lane) c = static_cast<std::uint32_t>(rng() % 6);
    }
    DegreeBucketQueue q(counts);
    auto shadow = counts;
    while (!q.empty()) {
      // Random decrement, mirrored in the shadow.
      const std::size_t f = rng() % 3;
      const std::uint32_t x = static_cast<std::uint32_t>(rng() % shadow[f].size());
      if (shadow[f][x] > 0) {
        q.decrement(f, x);
        --shadow[f][x];
      }
      if (q.empty()) break;
      std::uint32_t min = std::numeric_limits<std::uint32_t>::max();
      for (auto& lane : shadow) {
        for (auto c : lane) {
          if (c > 0) min = std::min(min, c);
        }
      }
      auto e = q.pop_min();
      EXPECT_EQ(e.count, min);
      EXPECT_EQ(shadow[e.family][e.node], e.count);
      shadow[e.family][e.node] = 0;
    }
  }
}

TEST(Manifest, ListsEveryRowOnce) {
  Catalog catalog;
  Relation access = access_fixture(catalog);
  auto p = decompose_exact(access, kPair, 3);
  std::ostringstream out;
  write_partition_manifest(out, access, p);
  auto doc = nlohmann::json::parse(out.str());
  std::size_t total = 0;
  for (const auto& part : doc["parts"]) total += part["rows"].size();
  EXPECT_EQ(total, access.size());
  EXPECT_EQ(doc["achieved_degree"], 1);
}
