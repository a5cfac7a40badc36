#include "pcjoin/hexagon.hpp"

#include <algorithm>
#include <array>
#include <vector>

#include "pcjoin/decomposition.hpp"
#include "pcjoin/error.hpp"

namespace pcj {

namespace {

inline std::uint64_t pack(Value a, Value b) { return std::uint64_t{a} << 32 | b; }

inline std::uint64_t mix(std::uint64_t h) {
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  return h;
}

// Tables run at load factor one half for every n, so probe lengths do not
// depend on where n falls between powers of two.
std::size_t table_capacity(std::size_t n) { return std::max<std::size_t>(16, 2 * n); }

// Maps a hash onto [0, cap) without a modulo.
inline std::size_t bucket(std::uint64_t h, std::size_t cap) {
  __extension__ using wide = unsigned __int128;
  return static_cast<std::size_t>((static_cast<wide>(h) * cap) >> 64);
}

// Open-addressing set of triples; node-based sets thrash the cache at scale.
class TripleSet {
 public:
  explicit TripleSet(const Relation& r) : slots_(table_capacity(r.size()), kEmpty) {
    for (std::size_t row = 0; row < r.size(); ++row) {
      const Triple t{r.at(row, 0), r.at(row, 1), r.at(row, 2)};
      std::size_t i = bucket(hash(t), slots_.size());
      while (slots_[i] != kEmpty && slots_[i] != t) i = next(i);
      slots_[i] = t;
    }
  }

  bool contains(Value a, Value b, Value c) const {
    const Triple t{a, b, c};
    for (std::size_t i = bucket(hash(t), slots_.size());; i = next(i)) {
      if (slots_[i] == t) return true;
      if (slots_[i] == kEmpty) return false;
    }
  }

 private:
  using Triple = std::array<Value, 3>;
  static constexpr Triple kEmpty = {~Value{0}, ~Value{0}, ~Value{0}};
  static std::uint64_t hash(const Triple& t) { return mix(pack(t[0], t[1]) ^ mix(t[2] + 0x9e3779b97f4a7c15ULL)); }
  std::size_t next(std::size_t i) const { return i + 1 == slots_.size() ? 0 : i + 1; }

  std::vector<Triple> slots_;
};

// key(k1, k2) -> payload pairs, grouped into contiguous runs.
class PairIndex {
 public:
  struct Run {
    const std::pair<Value, Value>* begin;
    const std::pair<Value, Value>* end;
    std::size_t size() const { return static_cast<std::size_t>(end - begin); }
  };

  // Two counting passes over an open-addressing key table; linear in n.
  template <class Key, class Payload>
  PairIndex(std::size_t n, Key key, Payload payload) : slots_(table_capacity(n)) {
    for (std::size_t i = 0; i < n; ++i) ++slot(key(i)).end;
    std::uint32_t offset = 0;
    for (auto& s : slots_) {
      if (s.key == kFree) continue;
      s.begin = offset;
      offset += s.end;
      s.end = s.begin;
    }
    values_.resize(n);
    for (std::size_t i = 0; i < n; ++i) values_[slot(key(i)).end++] = payload(i);
  }

  Run find(std::uint64_t key) const {
    for (std::size_t i = bucket(mix(key), slots_.size());; i = next(i)) {
      const Slot& s = slots_[i];
      if (s.key == kFree) return {nullptr, nullptr};
      if (s.key == key) return {values_.data() + s.begin, values_.data() + s.end};
    }
  }

 private:
  // Keys pack two 32-bit ids and never reach this value.
  static constexpr std::uint64_t kFree = ~std::uint64_t{0};

  struct Slot {
    std::uint64_t key = kFree;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
  };

  Slot& slot(std::uint64_t key) {
    std::size_t i = bucket(mix(key), slots_.size());
    while (slots_[i].key != kFree && slots_[i].key != key) i = next(i);
    slots_[i].key = key;
    return slots_[i];
  }

  std::size_t next(std::size_t i) const { return i + 1 == slots_.size() ? 0 : i + 1; }

  std::vector<Slot> slots_;
  std::vector<std::pair<Value, Value>> values_;
};

void require_arity(const Relation& r, const char* which) {
  if (r.arity() != 3) fail(ErrorKind::Schema, std::string("hexagon relation ") + which + " must have arity 3");
}

}  // namespace

Relation hexagon_join(const Relation& r1, const Relation& r2, const Relation& r3, const Relation& r4,
                      HexagonStats* stats) {
  require_arity(r1, "R1");
  require_arity(r2, "R2");
  require_arity(r3, "R3");
  require_arity(r4, "R4");
  HexagonStats local;
  HexagonStats& st = stats ? *stats : local;
  st = HexagonStats{};
  const std::vector<std::string> head = {"A", "B", "C", "U", "V", "W"};

  // R4(U,V,W) into R4^U, R4^V, R4^W.
  const std::vector<ColumnSet> families = {column_bit(0), column_bit(1), column_bit(2)};
  const Partitioning parts = decompose_approx(r4, families, all_columns(3));
  st.r4_degree = parts.achieved_degree;
  for (std::size_t f = 0; f < 3; ++f) st.part_sizes[f] = parts.parts[f].size();
  if (parts.achieved_degree > 3) {
    fail(ErrorKind::ConstraintViolation, "PC precondition violated: R4 needs degree " +
                                             std::to_string(parts.achieved_degree) + " > 3 after decomposition");
  }
  const Relation& r4u = parts.parts[0];
  const Relation& r4v = parts.parts[1];
  const Relation& r4w = parts.parts[2];

  // Payload (x, y) of each part, keyed by its family column.
  const PairIndex by_w(r4w.size(), [&](std::size_t i) { return std::uint64_t{r4w.at(i, 2)}; },
                       [&](std::size_t i) { return std::pair(r4w.at(i, 0), r4w.at(i, 1)); });
  const PairIndex by_u(r4u.size(), [&](std::size_t i) { return std::uint64_t{r4u.at(i, 0)}; },
                       [&](std::size_t i) { return std::pair(r4u.at(i, 1), r4u.at(i, 2)); });
  const PairIndex by_v(r4v.size(), [&](std::size_t i) { return std::uint64_t{r4v.at(i, 1)}; },
                       [&](std::size_t i) { return std::pair(r4v.at(i, 0), r4v.at(i, 2)); });
  // R2 by (B,U) -> C, R1 by (B,W) -> A, R1 by (A,W) -> B.
  const PairIndex r2_bu(r2.size(), [&](std::size_t i) { return pack(r2.at(i, 0), r2.at(i, 1)); },
                        [&](std::size_t i) { return std::pair(r2.at(i, 2), Value{0}); });
  const PairIndex r1_bw(r1.size(), [&](std::size_t i) { return pack(r1.at(i, 2), r1.at(i, 1)); },
                        [&](std::size_t i) { return std::pair(r1.at(i, 0), Value{0}); });
  const PairIndex r1_aw(r1.size(), [&](std::size_t i) { return pack(r1.at(i, 0), r1.at(i, 1)); },
                        [&](std::size_t i) { return std::pair(r1.at(i, 2), Value{0}); });
  const TripleSet set2(r2);
  const TripleSet set3(r3);

  std::vector<Value> out;
  const auto emit = [&](Value a, Value b, Value c, Value u, Value v, Value w) {
    out.insert(out.end(), {a, b, c, u, v, w});
  };
  const auto note = [&](std::size_t r4_candidates, std::size_t terminal) {
    st.max_r4_candidates = std::max<std::uint64_t>(st.max_r4_candidates, r4_candidates);
    st.max_terminal_candidates = std::max<std::uint64_t>(st.max_terminal_candidates, terminal);
  };

  for (std::size_t i = 0; i < r1.size(); ++i) {
    ++st.outer_iterations;
    const Value a = r1.at(i, 0), w = r1.at(i, 1), b = r1.at(i, 2);
    const auto uvs = by_w.find(w);
    note(uvs.size(), 0);
    for (auto p = uvs.begin; p != uvs.end; ++p) {
      const auto [u, v] = *p;
      const auto cs = r2_bu.find(pack(b, u));
      note(0, cs.size());
      for (auto q = cs.begin; q != cs.end; ++q) {
        if (set3.contains(q->first, v, a)) emit(a, b, q->first, u, v, w);
      }
    }
  }
  for (std::size_t i = 0; i < r2.size(); ++i) {
    ++st.outer_iterations;
    const Value b = r2.at(i, 0), u = r2.at(i, 1), c = r2.at(i, 2);
    const auto vws = by_u.find(u);
    note(vws.size(), 0);
    for (auto p = vws.begin; p != vws.end; ++p) {
      const auto [v, w] = *p;
      const auto as = r1_bw.find(pack(b, w));
      note(0, as.size());
      for (auto q = as.begin; q != as.end; ++q) {
        if (set3.contains(c, v, q->first)) emit(q->first, b, c, u, v, w);
      }
    }
  }
  for (std::size_t i = 0; i < r3.size(); ++i) {
    ++st.outer_iterations;
    const Value c = r3.at(i, 0), v = r3.at(i, 1), a = r3.at(i, 2);
    const auto uws = by_v.find(v);
    note(uws.size(), 0);
    for (auto p = uws.begin; p != uws.end; ++p) {
      const auto [u, w] = *p;
      const auto bs = r1_aw.find(pack(a, w));
      note(0, bs.size());
      for (auto q = bs.begin; q != bs.end; ++q) {
        if (set2.contains(q->first, u, c)) emit(a, q->first, c, u, v, w);
      }
    }
  }
  return Relation("Q", head, std::move(out));
}

}  // namespace pcj
