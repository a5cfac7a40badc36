#include "pcjoin/join.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <thread>

#include "pcjoin/error.hpp"
#include "pcjoin/hexagon.hpp"
#include "pcjoin/trie.hpp"

namespace pcj {

void validate_order(const Query& query, const VariableOrder& order) {
  if (order.size() != query.num_variables()) fail(ErrorKind::Parameter, "variable order must list every query variable once");
  std::vector<char> seen(query.num_variables(), 0);
  for (auto v : order) {
    if (v >= seen.size() || seen[v]) fail(ErrorKind::Parameter, "variable order must list every query variable once");
    seen[v] = 1;
  }
}

VariableOrder parse_order(const Query& query, std::span<const std::string> names) {
  VariableOrder out;
  for (const auto& n : names) out.push_back(query.variable_index(n));
  validate_order(query, out);
  return out;
}

std::vector<std::string> order_names(const Query& query, const VariableOrder& order) {
  std::vector<std::string> out;
  for (auto v : order) out.push_back(query.head()[v]);
  return out;
}

std::uint64_t VaatProfile::max() const {
  std::uint64_t best = 0;
  for (auto s : sizes) best = std::max(best, s);
  return best;
}

VariableOrder default_order(const Query& query, const Instance& instance) {
  instance.check_binds(query);
  const std::size_t r = query.num_variables();
  VariableOrder order;
  std::uint64_t bound = 0;
  // Distinct-count cache per (atom, column set).
  std::vector<std::vector<std::pair<ColumnSet, std::size_t>>> cache(query.num_atoms());
  const auto distinct = [&](std::size_t atom, ColumnSet cols) -> std::size_t {
    for (const auto& [c, n] : cache[atom]) {
      if (c == cols) return n;
    }
    const Relation& rel = instance.relation(query.atoms()[atom].relation);
    std::size_t n = rel.empty() ? 0 : (cols == 0 ? 1 : index_keys(rel, cols).num_keys());
    cache[atom].emplace_back(cols, n);
    return n;
  };
  while (order.size() < r) {
    std::size_t best_var = r;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < r; ++v) {
      if (bound >> v & 1) continue;
      double estimate = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < query.num_atoms(); ++a) {
        if (!(query.atom_mask(a) >> v & 1)) continue;
        ColumnSet before = 0;
        ColumnSet after = 0;
        const auto& vars = query.atom_variables(a);
        for (std::size_t c = 0; c < vars.size(); ++c) {
          if (bound >> vars[c] & 1) before |= column_bit(c);
          if (vars[c] == v) after |= column_bit(c);
        }
        after |= before;
        const double denom = static_cast<double>(std::max<std::size_t>(1, distinct(a, before)));
        estimate = std::min(estimate, static_cast<double>(distinct(a, after)) / denom);
      }
      if (estimate < best) {
        best = estimate;
        best_var = v;
      }
    }
    order.push_back(best_var);
    bound |= std::uint64_t{1} << best_var;
  }
  return order;
}

Relation nested_loop_join_oracle(const Query& query, const Instance& instance) {
  instance.check_binds(query);
  const std::size_t r = query.num_variables();
  std::vector<const Relation*> rels;
  for (const auto& atom : query.atoms()) rels.push_back(&instance.relation(atom.relation));
  std::vector<Value> assignment(r, 0);
  std::vector<int> bound_by(r, -1);
  std::vector<Value> out;

  const auto recurse = [&](auto&& self, std::size_t a) -> void {
    if (a == rels.size()) {
      out.insert(out.end(), assignment.begin(), assignment.end());
      return;
    }
    const auto& vars = query.atom_variables(a);
    for (std::size_t row = 0; row < rels[a]->size(); ++row) {
      const auto t = rels[a]->tuple(row);
      bool ok = true;
      for (std::size_t c = 0; c < vars.size() && ok; ++c) {
        if (bound_by[vars[c]] >= 0 && assignment[vars[c]] != t[c]) ok = false;
      }
      if (!ok) continue;
      std::vector<std::size_t> fresh;
      for (std::size_t c = 0; c < vars.size(); ++c) {
        if (bound_by[vars[c]] < 0) {
          bound_by[vars[c]] = static_cast<int>(a);
          assignment[vars[c]] = t[c];
          fresh.push_back(vars[c]);
        }
      }
      self(self, a + 1);
      for (auto v : fresh) bound_by[v] = -1;
    }
  };
  recurse(recurse, 0);
  return Relation("Q", query.head(), std::move(out));
}

namespace {

class GenericJoin {
 public:
  GenericJoin(const Query& query, const Instance& instance, const VariableOrder& order)
      : query_(query), order_(order), r_(query.num_variables()) {
    validate_order(query, order);
    instance.check_binds(query);
    std::vector<std::size_t> pos(r_);
    for (std::size_t i = 0; i < r_; ++i) pos[order[i]] = i;
    participants_.resize(r_);
    for (std::size_t a = 0; a < query.num_atoms(); ++a) {
      const Relation& rel = instance.relation(query.atoms()[a].relation);
      if (rel.empty()) any_empty_ = true;
      const auto& vars = query.atom_variables(a);
      std::vector<std::size_t> columns(vars.size());
      for (std::size_t c = 0; c < vars.size(); ++c) columns[c] = c;
      std::sort(columns.begin(), columns.end(), [&](std::size_t x, std::size_t y) { return pos[vars[x]] < pos[vars[y]]; });
      tries_.emplace_back(rel, columns);
      for (std::size_t level = 0; level < columns.size(); ++level) {
        participants_[pos[vars[columns[level]]]].push_back({a, level});
      }
    }
    ranges_.resize(tries_.size());
    for (std::size_t a = 0; a < tries_.size(); ++a) ranges_[a] = tries_[a].root();
    assignment_.assign(r_, 0);
  }

  std::uint64_t run(const TupleSink* sink, VaatProfile* profile) {
    sink_ = sink;
    sizes_.assign(r_, 0);
    count_ = 0;
    if (!any_empty_) visit(0);
    if (profile) {
      profile->order = order_;
      profile->sizes = sizes_;
    }
    return count_;
  }

 private:
  struct Slot {
    std::size_t atom;
    std::size_t level;
  };

  void visit(std::size_t depth) {
    if (depth == r_) {
      ++count_;
      if (sink_) (*sink_)(assignment_);
      return;
    }
    const auto& parts = participants_[depth];
    std::size_t driver = 0;
    for (std::size_t p = 1; p < parts.size(); ++p) {
      if (ranges_[parts[p].atom].size() < ranges_[parts[driver].atom].size()) driver = p;
    }
    std::vector<TrieIndex::Range> saved(parts.size());
    for (std::size_t p = 0; p < parts.size(); ++p) saved[p] = ranges_[parts[p].atom];
    const auto& lead = parts[driver];
    const TrieIndex& lead_trie = tries_[lead.atom];
    TrieIndex::Range rest = saved[driver];
    while (!rest.empty()) {
      const TrieIndex::Range child = lead_trie.first_child(rest, lead.level);
      rest.begin = child.end;
      const Value v = lead_trie.key(child.begin, lead.level);
      bool ok = true;
      for (std::size_t p = 0; p < parts.size(); ++p) {
        if (p == driver) {
          ranges_[parts[p].atom] = child;
          continue;
        }
        const auto c = tries_[parts[p].atom].child(saved[p], parts[p].level, v);
        if (c.empty()) {
          ok = false;
          break;
        }
        ranges_[parts[p].atom] = c;
      }
      if (!ok) continue;
      assignment_[order_[depth]] = v;
      ++sizes_[depth];
      visit(depth + 1);
    }
    for (std::size_t p = 0; p < parts.size(); ++p) ranges_[parts[p].atom] = saved[p];
  }

  const Query& query_;
  VariableOrder order_;
  std::size_t r_;
  bool any_empty_ = false;
  std::vector<TrieIndex> tries_;
  std::vector<std::vector<Slot>> participants_;
  std::vector<TrieIndex::Range> ranges_;
  std::vector<Value> assignment_;
  std::vector<std::uint64_t> sizes_;
  std::uint64_t count_ = 0;
  const TupleSink* sink_ = nullptr;
};

}  // namespace

std::uint64_t generic_join_visit(const Query& query, const Instance& instance, const VariableOrder& order,
                                 const TupleSink& sink, VaatProfile* profile) {
  GenericJoin join(query, instance, order);
  return join.run(sink ? &sink : nullptr, profile);
}

Relation generic_join(const Query& query, const Instance& instance, std::optional<VariableOrder> order,
                      VaatProfile* profile) {
  const VariableOrder chosen = order ? *order : default_order(query, instance);
  std::vector<Value> out;
  const TupleSink sink = [&](std::span<const Value> t) { out.insert(out.end(), t.begin(), t.end()); };
  generic_join_visit(query, instance, chosen, sink, profile);
  return Relation("Q", query.head(), std::move(out));
}

VaatProfile vaat_profile(const Query& query, const Instance& instance, const VariableOrder& order) {
  VaatProfile profile;
  GenericJoin join(query, instance, order);
  join.run(nullptr, &profile);
  return profile;
}

bool is_hexagon_shape(const Query& query) {
  if (query.num_atoms() != 4 || query.num_variables() != 6) return false;
  static const std::vector<std::vector<std::string>> expected = {
      {"A", "W", "B"}, {"B", "U", "C"}, {"C", "V", "A"}, {"U", "V", "W"}};
  for (std::size_t a = 0; a < 4; ++a) {
    if (query.atoms()[a].variables != expected[a]) return false;
  }
  return true;
}

LiftedResult pc_lifted_join(const Query& query, const Instance& instance, std::span<const AtomConstraint> constraints,
                            const LiftedOptions& options) {
  instance.check_binds(query);
  if (options.base == LiftedBase::Hexagon && !is_hexagon_shape(query)) {
    fail(ErrorKind::Parameter, "the hexagon base needs Q(...) <- R1(A,W,B), R2(B,U,C), R3(C,V,A), R4(U,V,W)");
  }
  LiftedResult out;
  std::vector<std::size_t> radix;
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const auto& c = constraints[i];
    const Relation& rel = instance.relation(query.atoms()[c.atom].relation);
    if (c.families.size() == 1) {
      const auto d = compute_dc(rel, c.families[0], c.y);
      if (d > c.degree) {
        fail(ErrorKind::ConstraintViolation, "relation '" + rel.name() + "' violates a degree constraint: degree " +
                                                 std::to_string(d) + " > " + std::to_string(c.degree));
      }
      continue;
    }
    Partitioning parts = options.exact ? decompose_exact(rel, c.families, c.y) : decompose_approx(rel, c.families, c.y);
    const std::uint64_t k = c.families.size();
    bool violated = parts.achieved_degree > k * c.degree;
    if (!violated && !options.exact && parts.achieved_degree > c.degree) {
      violated = decompose_exact(rel, c.families, c.y).achieved_degree > c.degree;
    }
    if (violated) {
      fail(ErrorKind::ConstraintViolation, "relation '" + rel.name() + "' violates a partition constraint with d = " +
                                               std::to_string(c.degree));
    }
    out.partitioned.push_back(i);
    out.partitionings.push_back(std::move(parts));
    radix.push_back(k);
  }

  std::size_t total = 1;
  for (auto k : radix) total *= k;
  out.combinations.resize(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    auto& choice = out.combinations[idx];
    choice.resize(radix.size());
    std::size_t rest = idx;
    for (std::size_t i = radix.size(); i-- > 0;) {
      choice[i] = rest % radix[i];
      rest /= radix[i];
    }
  }

  // Sub-queries read per-atom relations so that two atoms over one relation filter independently.
  std::vector<Atom> atoms = query.atoms();
  for (std::size_t a = 0; a < atoms.size(); ++a) atoms[a].relation = "atom" + std::to_string(a);
  const Query sub_query(query.head(), atoms);
  const std::optional<VariableOrder> order = options.order ? options.order : std::optional(default_order(query, instance));

  out.sub_outputs.resize(total);
  const auto run = [&](std::size_t idx) {
    Instance sub;
    std::vector<Relation> rels;
    for (std::size_t a = 0; a < query.num_atoms(); ++a) {
      const Relation& rel = instance.relation(query.atoms()[a].relation);
      std::vector<std::uint32_t> rows;
      for (std::size_t row = 0; row < rel.size(); ++row) {
        bool keep = true;
        for (std::size_t p = 0; p < out.partitioned.size() && keep; ++p) {
          if (constraints[out.partitioned[p]].atom != a) continue;
          keep = out.partitionings[p].part_of_row[row] == out.combinations[idx][p];
        }
        if (keep) rows.push_back(static_cast<std::uint32_t>(row));
      }
      rels.push_back(rel.subset(rows).renamed(atoms[a].relation, rel.schema()));
    }
    if (options.base == LiftedBase::Hexagon) {
      out.sub_outputs[idx] = hexagon_join(rels[0], rels[1], rels[2], rels[3]);
      // Reorder columns to the query head.
      std::vector<std::size_t> cols;
      for (const auto& v : query.head()) cols.push_back(out.sub_outputs[idx].column_index(v));
      out.sub_outputs[idx] = project_columns(out.sub_outputs[idx], cols).renamed("Q", query.head());
    } else {
      for (auto& r : rels) sub.bind(std::move(r));
      out.sub_outputs[idx] = generic_join(sub_query, sub, order);
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, total));
  if (jobs == 1) {
    for (std::size_t idx = 0; idx < total; ++idx) run(idx);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(jobs);
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&, w] {
        try {
          for (std::size_t idx; (idx = next.fetch_add(1)) < total;) run(idx);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : workers) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<Value> all;
  for (const auto& part : out.sub_outputs) all.insert(all.end(), part.data().begin(), part.data().end());
  out.output = Relation("Q", query.head(), std::move(all));
  return out;
}

}  // namespace pcj
