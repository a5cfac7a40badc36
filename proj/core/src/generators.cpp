#include "pcjoin/generators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "pcjoin/error.hpp"

namespace pcj {

namespace {

std::string label(const std::string& prefix, const std::string& var, std::uint64_t i) {
  return prefix + var + ":" + std::to_string(i);
}

void require_three(const std::vector<std::string>& vars) {
  if (vars.size() != 3) fail(ErrorKind::Parameter, "generator needs exactly three variable names");
}

std::uint64_t uniform(std::mt19937_64& rng, std::uint64_t bound) { return bound == 0 ? 0 : rng() % bound; }

}  // namespace

Relation access_fixture(Catalog& catalog) {
  const std::vector<std::pair<const char*, const char*>> rows = {
      {"Ava", "Beacon Hall"},    {"Ben", "Beacon Hall"},   {"Cole", "Delta Hall"},   {"Dan", "Delta Hall"},
      {"Emma", "Gala Hall"},     {"Finn", "Jade Hall"},    {"Porter", "Beacon Hall"}, {"Porter", "Delta Hall"},
      {"Porter", "Gala Hall"},   {"Porter", "Jade Hall"}};
  std::vector<Value> data;
  for (const auto& [p, r] : rows) {
    data.push_back(catalog.intern(p));
    data.push_back(catalog.intern(r));
  }
  return Relation("Access", {"PersonID", "RoomID"}, std::move(data));
}

Relation degeneracy_graph(Catalog& catalog) {
  const std::vector<std::pair<const char*, const char*>> edges = {
      // solid: in-degree 1 part
      {"A", "B"}, {"A", "C"}, {"A", "E"}, {"B", "A"}, {"B", "F"}, {"B", "D"}, {"A", "A2"}, {"E", "D2"},
      // dashed: out-degree 1 part
      {"A", "F"}, {"B", "E"}, {"C", "D"}, {"D", "F"}, {"E", "F"}, {"F", "C"}, {"A2", "D2"}, {"D2", "F"}};
  std::vector<Value> data;
  for (const auto& [x, y] : edges) {
    data.push_back(catalog.intern(x));
    data.push_back(catalog.intern(y));
  }
  return Relation("E", {"X", "Y"}, std::move(data));
}

std::uint64_t odd_cube_root(std::uint64_t n) {
  std::uint64_t k = 0;
  while ((k + 1) * (k + 1) * (k + 1) <= n) ++k;
  if (n == 0 || k * k * k != n || k % 2 == 0) {
    fail(ErrorKind::Parameter, "n = " + std::to_string(n) + " is not the cube of an odd number");
  }
  return k;
}

std::uint64_t vaat_side(std::uint64_t n) {
  if (n == 0 || n % 7 != 0) fail(ErrorKind::Parameter, "n = " + std::to_string(n) + " is not 7 times a perfect square");
  const std::uint64_t t = n / 7;
  std::uint64_t s = 0;
  while ((s + 1) * (s + 1) <= t) ++s;
  if (s * s != t) fail(ErrorKind::Parameter, "n = " + std::to_string(n) + " is not 7 times a perfect square");
  return s;
}

Relation gen_mod_relation(Catalog& catalog, std::uint64_t n, const std::vector<std::string>& vars,
                          const std::string& name) {
  require_three(vars);
  const std::uint64_t k = odd_cube_root(n);
  const std::uint64_t m = k * k;
  const std::uint64_t h = k / 2;
  std::vector<Value> data;
  data.reserve(3 * n);
  for (std::uint64_t i = 0; i < m; ++i) {
    for (std::uint64_t j = 0; j < k; ++j) {
      const std::uint64_t z = (i + j + m - h) % m;
      data.push_back(catalog.intern(label("", vars[0], i)));
      data.push_back(catalog.intern(label("", vars[1], j)));
      data.push_back(catalog.intern(label("", vars[2], z)));
    }
  }
  return Relation(name, vars, std::move(data));
}

Relation gen_complete_bipartite(Catalog& catalog, std::uint64_t n, const std::vector<std::string>& vars,
                                const std::string& name, const std::string& prefix) {
  require_three(vars);
  const std::uint64_t s = vaat_side(n);
  std::vector<Value> data;
  for (std::uint64_t i = 0; i < s; ++i) {
    for (std::uint64_t j = 0; j < s; ++j) {
      data.push_back(catalog.intern(label(prefix, vars[0], i)));
      data.push_back(catalog.intern(label(prefix, vars[1], j)));
      data.push_back(catalog.intern(label(prefix, vars[2], i * s + j)));
    }
  }
  return Relation(name, vars, std::move(data));
}

Relation gen_disjoint_paths(Catalog& catalog, std::uint64_t n, const std::vector<std::string>& vars,
                            const std::string& name, const std::string& prefix) {
  require_three(vars);
  const std::uint64_t s = vaat_side(n);
  std::vector<Value> data;
  for (std::uint64_t i = 0; i < s * s; ++i) {
    for (const auto& v : vars) data.push_back(catalog.intern(label(prefix, v, i)));
  }
  return Relation(name, vars, std::move(data));
}

namespace {

const std::vector<std::vector<std::string>>& hexagon_atoms() {
  static const std::vector<std::vector<std::string>> atoms = {
      {"A", "W", "B"}, {"B", "U", "C"}, {"C", "V", "A"}, {"U", "V", "W"}};
  return atoms;
}

Relation hexagon_r4_cube(Catalog& catalog, std::uint64_t k) {
  std::vector<Value> data;
  for (std::uint64_t u = 0; u < k; ++u) {
    for (std::uint64_t v = 0; v < k; ++v) {
      for (std::uint64_t w = 0; w < k; ++w) {
        data.push_back(catalog.intern(label("", "U", u)));
        data.push_back(catalog.intern(label("", "V", v)));
        data.push_back(catalog.intern(label("", "W", w)));
      }
    }
  }
  return Relation("R4", {"U", "V", "W"}, std::move(data));
}

void bind_mod_triangle(Instance& inst, std::uint64_t n) {
  for (std::size_t i = 0; i < 3; ++i) {
    inst.bind(gen_mod_relation(inst.catalog(), n, hexagon_atoms()[i], "R" + std::to_string(i + 1)));
  }
}

}  // namespace

Instance gen_hexagon_hard_dc(std::uint64_t n) {
  const std::uint64_t k = odd_cube_root(n);
  Instance inst;
  bind_mod_triangle(inst, n);
  inst.bind(hexagon_r4_cube(inst.catalog(), k));
  return inst;
}

Instance gen_pc_hexagon(std::uint64_t n, std::uint64_t seed) {
  const std::uint64_t k = odd_cube_root(n);
  const std::uint64_t target = 3 * (k / 2);  // u + v + w that closes the mod triangle
  Instance inst;
  bind_mod_triangle(inst, n);
  std::mt19937_64 rng(seed);
  std::vector<std::array<std::uint64_t, 3>> tuples;
  // Piece f fixes coordinate f to every value once; the other two sum to target - x.
  for (std::size_t f = 0; f < 3; ++f) {
    for (std::uint64_t x = 0; x < k; ++x) {
      const std::uint64_t rest = target - x;
      const std::uint64_t lo = rest > k - 1 ? rest - (k - 1) : 0;
      const std::uint64_t hi = std::min(rest, k - 1);
      const std::uint64_t p = lo + uniform(rng, hi - lo + 1);
      std::array<std::uint64_t, 3> t{};
      t[f] = x;
      t[(f + 1) % 3] = p;
      t[(f + 2) % 3] = rest - p;
      tuples.push_back(t);
    }
  }
  std::shuffle(tuples.begin(), tuples.end(), rng);
  std::vector<Value> data;
  for (const auto& t : tuples) {
    data.push_back(inst.catalog().intern(label("", "U", t[0])));
    data.push_back(inst.catalog().intern(label("", "V", t[1])));
    data.push_back(inst.catalog().intern(label("", "W", t[2])));
  }
  inst.bind(Relation("R4", {"U", "V", "W"}, std::move(data)));
  return inst;
}

Instance gen_vaat_hard(std::uint64_t n) {
  vaat_side(n);
  const auto& atoms = hexagon_atoms();
  Instance inst;
  std::vector<std::vector<Value>> data(4);
  const auto append = [&](std::size_t atom, const Relation& part) {
    // `part` is over a permutation of the atom's variables; restore atom column order.
    std::vector<std::size_t> cols;
    for (const auto& v : atoms[atom]) cols.push_back(part.column_index(v));
    for (std::size_t row = 0; row < part.size(); ++row) {
      for (auto c : cols) data[atom].push_back(part.at(row, c));
    }
  };
  const auto split = [&](std::size_t atom, const std::set<std::string>& pivot) {
    // Variables of the atom outside `pivot` first (in column order), then the rest.
    std::vector<std::string> outside, inside;
    for (const auto& v : atoms[atom]) (pivot.count(v) ? inside : outside).push_back(v);
    outside.insert(outside.end(), inside.begin(), inside.end());
    return outside;
  };
  std::size_t block = 0;
  for (std::size_t i = 0; i < 4; ++i, ++block) {
    const std::string prefix = "d" + std::to_string(block) + ":";
    const std::set<std::string> own(atoms[i].begin(), atoms[i].end());
    for (std::size_t j = 0; j < 4; ++j) {
      if (j == i) {
        append(j, gen_disjoint_paths(inst.catalog(), n, atoms[j], "P", prefix));
      } else {
        append(j, gen_complete_bipartite(inst.catalog(), n, split(j, own), "C", prefix));
      }
    }
  }
  for (const auto& pair : std::vector<std::set<std::string>>{{"A", "U"}, {"B", "V"}, {"C", "W"}}) {
    const std::string prefix = "d" + std::to_string(block++) + ":";
    for (std::size_t j = 0; j < 4; ++j) append(j, gen_complete_bipartite(inst.catalog(), n, split(j, pair), "C", prefix));
  }
  for (std::size_t j = 0; j < 4; ++j) {
    inst.bind(Relation("R" + std::to_string(j + 1), atoms[j], std::move(data[j])));
  }
  return inst;
}

ConstraintSet hexagon_constraints(std::uint64_t n, bool with_pc) {
  ConstraintSet out;
  const auto& atoms = hexagon_atoms();
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& v = atoms[i];
    const std::string name = "R" + std::to_string(i + 1);
    out.add({name, {{v[0], v[1]}}, v, 1, std::nullopt});
    out.add({name, {{v[1], v[2]}}, v, 1, std::nullopt});
  }
  for (std::size_t i = 0; i < 4; ++i) out.add({"R" + std::to_string(i + 1), {{}}, atoms[i], n, std::nullopt});
  if (with_pc) out.add({"R4", {{"U"}, {"V"}, {"W"}}, atoms[3], 1, std::nullopt});
  return out;
}

Relation gen_planted_pc(Catalog& catalog, std::size_t num_groups, const std::vector<ColumnSet>& families,
                        std::size_t y_arity, std::uint64_t target_d, std::uint64_t seed) {
  if (y_arity == 0 || y_arity > 16 || families.empty()) fail(ErrorKind::Parameter, "planted PC needs 1..16 columns and a family");
  if (target_d == 0 && num_groups > 0) fail(ErrorKind::Parameter, "planted PC with target_d = 0 must be empty");
  for (auto f : families) {
    if (!is_subset(f, all_columns(y_arity))) fail(ErrorKind::Parameter, "planted family outside the columns");
  }
  // One spare value per column keeps rejection sampling from stalling near capacity,
  // and the Y-space must hold every group as a distinct tuple.
  std::uint64_t domain = (num_groups + target_d - 1) / std::max<std::uint64_t>(1, target_d) + 1;
  while (std::pow(static_cast<double>(domain), static_cast<double>(y_arity)) < 2.0 * static_cast<double>(num_groups)) ++domain;
  std::mt19937_64 rng(seed);
  std::vector<std::map<std::vector<std::uint64_t>, std::uint64_t>> load(families.size());
  std::set<std::vector<std::uint64_t>> seen;
  std::vector<Value> data;
  std::vector<std::string> schema;
  for (std::size_t c = 0; c < y_arity; ++c) schema.push_back("c" + std::to_string(c));
  for (std::size_t g = 0; g < num_groups; ++g) {
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      const std::size_t f = uniform(rng, families.size());
      std::vector<std::uint64_t> t(y_arity);
      for (std::size_t c = 0; c < y_arity; ++c) t[c] = uniform(rng, domain);
      std::vector<std::uint64_t> x;
      for (auto c : column_list(families[f])) x.push_back(t[c]);
      if (seen.count(t) || load[f][x] >= target_d) continue;
      ++load[f][x];
      seen.insert(t);
      for (std::size_t c = 0; c < y_arity; ++c) data.push_back(catalog.intern(label("", schema[c], t[c])));
      placed = true;
    }
    if (!placed) fail(ErrorKind::Parameter, "planted PC parameters infeasible: domain too small for the requested groups");
  }
  return Relation("P", schema, std::move(data));
}

Relation gen_planted_profile(Catalog& catalog, const ProfileTarget& target, const std::string& name) {
  const std::uint64_t k = target.num_families;
  const std::uint64_t p = target.pc;
  if (k < 2 || p == 0 || target.min_dc > target.max_dc) fail(ErrorKind::Parameter, "profile target needs k ≥ 2, pc ≥ 1, min ≤ max");
  const std::uint64_t d = k * (p - 1) + 1;
  if (target.min_dc < d) {
    fail(ErrorKind::Parameter, "profile target infeasible: min DC must be at least k(pc-1)+1 = " + std::to_string(d));
  }
  std::vector<std::string> schema = {"id"};
  for (std::uint64_t c = 0; c < k; ++c) schema.push_back("c" + std::to_string(c));
  std::vector<Value> data;
  std::uint64_t id = 0;
  std::uint64_t fresh = d;  // values ≥ d never occur in the core
  const auto row = [&](const std::vector<std::uint64_t>& values) {
    data.push_back(catalog.intern("id:" + std::to_string(id++)));
    for (std::uint64_t c = 0; c < k; ++c) data.push_back(catalog.intern(label("", schema[c + 1], values[c])));
  };
  // Core: column c = (i + c*j) mod d over [0,d)^2; every value has degree d and the PC is ceil(d/k) = p.
  for (std::uint64_t i = 0; i < d; ++i) {
    for (std::uint64_t j = 0; j < d; ++j) {
      std::vector<std::uint64_t> values(k);
      for (std::uint64_t c = 0; c < k; ++c) values[c] = (i + c * j) % d;
      row(values);
    }
  }
  // Stars: one hub per column, all other coordinates fresh.
  for (std::uint64_t c = 0; c < k; ++c) {
    const std::uint64_t size = c == 0 ? target.max_dc : target.min_dc;
    const std::uint64_t hub = fresh++;
    if (size <= d) continue;
    for (std::uint64_t s = 0; s < size; ++s) {
      std::vector<std::uint64_t> values(k);
      for (std::uint64_t o = 0; o < k; ++o) values[o] = o == c ? hub : fresh++;
      row(values);
    }
  }
  return Relation(name, schema, std::move(data));
}

}  // namespace pcj
