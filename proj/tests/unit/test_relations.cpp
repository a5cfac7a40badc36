#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "pcjoin/csv.hpp"
#include "pcjoin/error.hpp"
#include "pcjoin/generators.hpp"
#include "pcjoin/query.hpp"
#include "pcjoin/relation.hpp"
#include "pcjoin/trie.hpp"
#include "test_support.hpp"

using namespace pcj;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / ("pcjoin_test_" + name);
  std::ofstream(path) << content;
  return path;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

}  // namespace

TEST(Csv, DuplicateRowsCollapse) {
  Catalog catalog;
  auto path = write_temp("dups.csv", "K,V\na,1\na,1\nb,2\n");
  auto report = load_csv(path.string(), "R", catalog);
  EXPECT_EQ(report.relation.size(), 2u);
  EXPECT_EQ(report.raw_rows, 3u);
  EXPECT_EQ(report.duplicates, 1u);
}

TEST(Csv, AccessTable) {
  Catalog catalog;
  std::ostringstream text;
  text << "PersonID,RoomID\n";
  for (auto [p, r] : std::vector<std::pair<std::string, std::string>>{
           {"Ava", "Beacon Hall"}, {"Ben", "Beacon Hall"}, {"Cole", "Delta Hall"}, {"Dan", "Delta Hall"},
           {"Emma", "Gala Hall"}, {"Finn", "Jade Hall"}, {"Porter", "Beacon Hall"}, {"Porter", "Delta Hall"},
           {"Porter", "Gala Hall"}, {"Porter", "Jade Hall"}}) {
    text << p << ',' << r << '\n';
  }
  std::istringstream in(text.str());
  auto report = read_csv(in, "Access", catalog);
  EXPECT_EQ(report.relation.size(), 10u);
  EXPECT_EQ(report.relation.schema(), (std::vector<std::string>{"PersonID", "RoomID"}));
}

TEST(Csv, RaggedRowNamesLine) {
  Catalog catalog;
  std::istringstream in("A,B\nx,y\nx,y,z\n");
  try {
    read_csv(in, "R", catalog);
    FAIL() << "expected a parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Csv, EmptySchemaIsSchemaError) {
  Catalog catalog;
  std::istringstream in("");
  EXPECT_EQ(kind_of([&] { read_csv(in, "R", catalog); }), ErrorKind::Schema);
}

TEST(Csv, QuotedFieldsAndTabs) {
  Catalog catalog;
  std::istringstream in("A\tB\n\"x\ty\"\t2\n");
  auto report = read_csv(in, "R", catalog, CsvOptions{'\t', true});
  ASSERT_EQ(report.relation.size(), 1u);
  EXPECT_EQ(catalog.text(report.relation.at(0, 0)), "x\ty");
}

TEST(Csv, WriteReadRoundTrip) {
  Catalog catalog;
  Relation r = access_fixture(catalog);
  std::ostringstream out;
  write_csv(out, r, catalog);
  std::istringstream in(out.str());
  Catalog other;
  auto back = read_csv(in, "Access", other).relation;
  EXPECT_EQ(back.size(), r.size());
}

TEST(Project, AccessRooms) {
  Catalog catalog;
  Relation access = access_fixture(catalog);
  std::vector<std::string> rooms = {"RoomID"};
  Relation p = project(access, rooms);
  EXPECT_EQ(p.size(), 4u);
  EXPECT_EQ(p.arity(), 1u);
}

TEST(Project, FullSchemaIsIdentity) {
  Catalog catalog;
  Relation access = access_fixture(catalog);
  EXPECT_EQ(project(access, access.schema()), access);
}

TEST(Project, UnknownVariable) {
  Catalog catalog;
  Relation access = access_fixture(catalog);
  std::vector<std::string> bad = {"Nope"};
  EXPECT_EQ(kind_of([&] { project(access, bad); }), ErrorKind::Schema);
}

TEST(Project, MatchesDistinctScan) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    Catalog catalog;
    Relation r = oracle::random_relation(catalog, rng, {"A", "B", "C"}, 20, 4);
    for (std::size_t c = 0; c < 3; ++c) {
      std::set<Value> distinct;
      for (std::size_t row = 0; row < r.size(); ++row) distinct.insert(r.at(row, c));
      std::vector<std::string> vars = {r.schema()[c]};
      Relation p = project(r, vars);
      EXPECT_EQ(p.size(), distinct.size());
      EXPECT_LE(p.size(), r.size());
      EXPECT_EQ(project(p, vars), p);
    }
  }
}

TEST(SelectEq, PorterRows) {
  Catalog catalog;
  Relation access = access_fixture(catalog);
  Binding b{{"PersonID", *catalog.find("Porter")}};
  EXPECT_EQ(select_eq(access, b).size(), 4u);
  EXPECT_EQ(select_eq(access, {}), access);
  Binding absent{{"PersonID", catalog.intern("Nobody")}};
  EXPECT_TRUE(select_eq(access, absent).empty());
  Binding unknown{{"Nope", 0}};
  EXPECT_EQ(kind_of([&] { select_eq(access, unknown); }), ErrorKind::Schema);
}

TEST(SelectEq, ComposesOverBindings) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Catalog catalog;
    Relation r = oracle::random_relation(catalog, rng, {"A", "B", "C"}, 25, 3);
    if (r.empty()) continue;
    Binding b1{{"A", r.at(0, 0)}};
    Binding b2{{"C", r.at(r.size() - 1, 2)}};
    Binding both = b1;
    both.insert(b2.begin(), b2.end());
    EXPECT_EQ(select_eq(r, both), select_eq(select_eq(r, b1), b2));
  }
}

TEST(SelectMatching, IgnoresOtherComponents) {
  Catalog catalog;
  Relation access = access_fixture(catalog);
  std::vector<Value> ref = {*catalog.find("Porter"), *catalog.find("Ava")};
  EXPECT_EQ(select_matching(access, column_bit(0), ref).size(), 4u);
}

TEST(ParseQuery, Triangle) {
  Query q = parse_query("Q(A,B,C) <- R(A,B), S(B,C), T(A,C).");
  EXPECT_EQ(q.num_atoms(), 3u);
  EXPECT_EQ(q.num_variables(), 3u);
  EXPECT_EQ(q.atoms()[2].relation, "T");
}

TEST(ParseQuery, Hexagon) {
  Query q = parse_query("Q(A,B,C,U,V,W) <- R1(A,W,B), R2(B,U,C), R3(C,V,A), R4(U,V,W).");
  Query h = hexagon_query();
  EXPECT_EQ(q.to_string(), h.to_string());
  EXPECT_EQ(q.atoms()[3].variables, (std::vector<std::string>{"U", "V", "W"}));
}

TEST(ParseQuery, NotFull) {
  try {
    parse_query("Q(A) <- R(A,B).");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("not a full CQ"), std::string::npos);
  }
}

TEST(ParseQuery, RepeatedVariableInAtom) {
  EXPECT_EQ(kind_of([] { parse_query("Q(A) <- R(A,A)."); }), ErrorKind::Parse);
}

TEST(ParseQuery, SyntaxErrorHasPosition) {
  try {
    parse_query("Q(A,B) <- R(A,B)\n  S(B");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    EXPECT_NE(std::string(e.what()).find("2:"), std::string::npos) << e.what();
  }
}

TEST(ParseQuery, CommentsAndWhitespace) {
  Query q = parse_query("# triangle\nQ( A , B )<-\n  R(A,B) # edge\n");
  EXPECT_EQ(q.num_atoms(), 1u);
}

TEST(Trie, SingleTuplePath) {
  Catalog catalog;
  Relation r("R", {"A", "B"}, {catalog.intern("x"), catalog.intern("y")});
  TrieIndex t(r, std::vector<std::string>{"A", "B"});
  auto root = t.root();
  EXPECT_EQ(t.fanout(root, 0), 1u);
  auto c = t.child(root, 0, catalog.intern("x"));
  EXPECT_EQ(c.size(), 1u);
  EXPECT_EQ(t.fanout(c, 1), 1u);
}

TEST(Trie, AccessRoomFirst) {
  Catalog catalog;
  Relation access = access_fixture(catalog);
  TrieIndex t(access, std::vector<std::string>{"RoomID", "PersonID"});
  EXPECT_EQ(t.fanout(t.root(), 0), 4u);
}

TEST(Trie, NonPermutationRejected) {
  Catalog catalog;
  Relation access = access_fixture(catalog);
  EXPECT_EQ(kind_of([&] { TrieIndex(access, std::vector<std::string>{"RoomID", "RoomID"}); }), ErrorKind::Schema);
}

TEST(Trie, DfsRoundTripsSortedTuples) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 120; ++trial) {
    Catalog catalog;
    Relation r = oracle::random_relation(catalog, rng, {"A", "B", "C"}, 30, 5);
    std::vector<std::size_t> perm = {0, 1, 2};
    std::shuffle(perm.begin(), perm.end(), rng);
    TrieIndex t(r, perm);
    std::vector<std::vector<Value>> expected;
    for (std::size_t row = 0; row < r.size(); ++row) {
      std::vector<Value> tup;
      for (auto c : perm) tup.push_back(r.at(row, c));
      expected.push_back(tup);
    }
    std::sort(expected.begin(), expected.end());
    EXPECT_EQ(t.enumerate(), expected);
  }
}

TEST(Instance, ArityMismatch) {
  Instance inst;
  inst.bind(Relation("R", {"A"}));
  Query q = parse_query("Q(A,B) <- R(A,B).");
  EXPECT_EQ(kind_of([&] { inst.check_binds(q); }), ErrorKind::Schema);
}

TEST(Relation, LargeRelationsSortLikeSmallOnes) {
  // Above the radix threshold the canonical order must match a plain sort.
  std::mt19937_64 rng(17);
  for (std::size_t arity : {3u, 5u}) {
    for (Value domain : {7u, 70000u}) {
      std::vector<Value> data;
      for (std::size_t i = 0; i < 6000 * arity; ++i) data.push_back(static_cast<Value>(rng() % domain));
      std::set<std::vector<Value>> expected;
      for (std::size_t i = 0; i < 6000; ++i) expected.emplace(data.begin() + i * arity, data.begin() + (i + 1) * arity);
      std::vector<std::string> schema;
      for (std::size_t c = 0; c < arity; ++c) schema.push_back("X" + std::to_string(c));
      Relation r("R", schema, data);
      ASSERT_EQ(r.size(), expected.size());
      std::size_t row = 0;
      for (const auto& t : expected) {
        ASSERT_TRUE(std::equal(t.begin(), t.end(), r.tuple(row).begin())) << row;
        ++row;
      }
    }
  }
}
