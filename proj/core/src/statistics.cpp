#include "pcjoin/statistics.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "pcjoin/error.hpp"

namespace pcj {

PartitionConstraint PartitionConstraint::from_dc(const DegreeConstraint& dc) {
  return PartitionConstraint{dc.relation, {dc.x}, dc.y, dc.degree, std::nullopt};
}

ConstraintSet::ConstraintSet(std::vector<PartitionConstraint> constraints) {
  for (auto& c : constraints) add(std::move(c));
}

void ConstraintSet::add(PartitionConstraint constraint) {
  if (constraint.families.empty()) fail(ErrorKind::Schema, "constraint on '" + constraint.relation + "' has no families");
  constraints_.push_back(std::move(constraint));
}

namespace {

ColumnSet resolve(const Query& query, std::size_t atom, const std::vector<std::string>& names,
                  const std::string& relation) {
  const auto& vars = query.atoms()[atom].variables;
  ColumnSet out = 0;
  for (const auto& name : names) {
    auto it = std::find(vars.begin(), vars.end(), name);
    if (it == vars.end()) {
      fail(ErrorKind::Schema, "constraint on '" + relation + "' names unknown variable '" + name + "'");
    }
    out |= column_bit(static_cast<std::size_t>(it - vars.begin()));
  }
  return out;
}

}  // namespace

std::vector<AtomConstraint> ConstraintSet::bind(const Query& query) const {
  std::vector<AtomConstraint> out;
  for (std::size_t source = 0; source < constraints_.size(); ++source) {
    const auto& c = constraints_[source];
    std::optional<std::size_t> first;
    for (std::size_t a = 0; a < query.num_atoms(); ++a) {
      if (query.atoms()[a].relation == c.relation) {
        first = a;
        break;
      }
    }
    if (!first) continue;
    if (c.atom) {
      if (*c.atom >= query.num_atoms() || query.atoms()[*c.atom].relation != c.relation) {
        fail(ErrorKind::Schema, "constraint pinned to atom " + std::to_string(*c.atom) + " which is not '" + c.relation + "'");
      }
    }
    // Names follow the pinned atom if any, else the first occurrence.
    const std::size_t naming = c.atom.value_or(*first);
    AtomConstraint resolved;
    resolved.y = resolve(query, naming, c.y, c.relation);
    for (const auto& fam : c.families) resolved.families.push_back(resolve(query, naming, fam, c.relation));
    for (std::size_t i = 0; i < resolved.families.size(); ++i) {
      if (!is_subset(resolved.families[i], resolved.y)) {
        fail(ErrorKind::Schema, "constraint on '" + c.relation + "': family member not contained in Y");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (resolved.families[i] == resolved.families[j]) {
          fail(ErrorKind::Schema, "constraint on '" + c.relation + "': duplicate family member");
        }
      }
    }
    resolved.degree = c.degree;
    resolved.source = source;
    for (std::size_t a = 0; a < query.num_atoms(); ++a) {
      if (query.atoms()[a].relation != c.relation) continue;
      if (c.atom && *c.atom != a) continue;
      resolved.atom = a;
      auto same = std::find_if(out.begin(), out.end(), [&](const AtomConstraint& o) {
        if (o.atom != a || o.y != resolved.y) return false;
        return std::set<ColumnSet>(o.families.begin(), o.families.end()) ==
               std::set<ColumnSet>(resolved.families.begin(), resolved.families.end());
      });
      if (same == out.end()) {
        out.push_back(resolved);
      } else if (resolved.degree < same->degree) {
        same->degree = resolved.degree;
        same->source = source;
      }
    }
  }
  return out;
}

void ConstraintSet::validate_coverage(const Query& query) const {
  std::uint64_t covered = 0;
  for (const auto& c : bind(query)) {
    if (c.families.size() == 1 && c.families[0] == 0) covered |= query.variables_of(c.atom, c.y);
  }
  for (std::size_t v = 0; v < query.num_variables(); ++v) {
    if (!(covered >> v & 1)) {
      fail(ErrorKind::Coverage, "variable '" + query.head()[v] + "' is not covered by any cardinality constraint");
    }
  }
}

std::vector<std::string> ConstraintSet::warnings() const {
  std::vector<std::string> out;
  std::map<std::pair<std::string, std::set<std::string>>, std::set<std::set<std::set<std::string>>>> seen;
  for (const auto& c : constraints_) {
    if (c.families.size() < 2) continue;
    std::set<std::set<std::string>> fams;
    for (const auto& f : c.families) fams.emplace(f.begin(), f.end());
    seen[{c.relation, std::set<std::string>(c.y.begin(), c.y.end())}].insert(std::move(fams));
  }
  for (const auto& [key, variants] : seen) {
    if (variants.size() > 1) {
      std::string ys;
      for (const auto& v : key.second) ys += v;
      out.push_back("relation '" + key.first + "' has " + std::to_string(variants.size()) +
                    " partition constraints with different families over Y = " + ys);
    }
  }
  return out;
}

void validate_dc_shape(const Relation& relation, ColumnSet x, ColumnSet y) {
  if (!is_subset(y, all_columns(relation.arity())) || !is_subset(x, y)) {
    fail(ErrorKind::Schema, "degree constraint on '" + relation.name() + "' needs X ⊆ Y ⊆ schema");
  }
}

std::uint64_t compute_dc(const Relation& relation, ColumnSet x, ColumnSet y) {
  validate_dc_shape(relation, x, y);
  if (relation.empty()) return 0;
  const KeyIndex groups = index_keys(relation, y);
  if (x == 0) return groups.num_keys();
  const KeyIndex xs = index_keys(relation, x);
  std::vector<std::uint32_t> count(xs.num_keys(), 0);
  std::uint32_t best = 0;
  for (auto row : groups.first_row) best = std::max(best, ++count[xs.key_of_row[row]]);
  return best;
}

std::uint64_t compute_dc(const Relation& relation, std::span<const std::string> x, std::span<const std::string> y) {
  return compute_dc(relation, relation.columns_of(x), relation.columns_of(y));
}

bool check_dc(const Relation& relation, const DegreeConstraint& dc) {
  return compute_dc(relation, dc.x, dc.y) <= dc.degree;
}

bool check_pc_witness(const Relation& relation, std::uint64_t degree, const Partitioning& parts) {
  if (parts.parts.size() != parts.families.size()) fail(ErrorKind::WitnessShape, "witness has a part count different from its families");
  std::vector<char> used(relation.size(), 0);
  std::size_t total = 0;
  for (std::size_t f = 0; f < parts.parts.size(); ++f) {
    const Relation& part = parts.parts[f];
    if (part.schema() != relation.schema()) fail(ErrorKind::WitnessShape, "witness part schema differs from the relation");
    for (std::size_t row = 0; row < part.size(); ++row) {
      const auto at = relation.find_row(part.tuple(row));
      if (!at || used[*at]) return false;
      used[*at] = 1;
    }
    total += part.size();
    if (compute_dc(part, parts.families[f], parts.y) > degree) return false;
  }
  return total == relation.size();
}

bool check_pc_witness(const Relation& relation, const PartitionConstraint& pc, const Partitioning& parts) {
  if (pc.families.size() != parts.families.size()) fail(ErrorKind::WitnessShape, "witness is not indexed by the constraint's families");
  if (relation.columns_of(pc.y) != parts.y) fail(ErrorKind::WitnessShape, "witness Y differs from the constraint's Y");
  for (std::size_t f = 0; f < pc.families.size(); ++f) {
    if (relation.columns_of(pc.families[f]) != parts.families[f]) {
      fail(ErrorKind::WitnessShape, "witness part " + std::to_string(f) + " is not indexed by the matching family");
    }
  }
  return check_pc_witness(relation, pc.degree, parts);
}

std::uint64_t pc_value(const Relation& relation, std::span<const ColumnSet> families, ColumnSet y) {
  return decompose_exact(relation, families, y).achieved_degree;
}

PcProfile nonkey_pc_profile(const Relation& relation, std::span<const std::string> key_vars) {
  const ColumnSet keys = relation.columns_of(key_vars);
  const ColumnSet y = all_columns(relation.arity()) & ~keys;
  if (column_count(y) < 2) fail(ErrorKind::Parameter, "profile undefined: fewer than 2 non-key attributes");
  PcProfile out;
  out.y = relation.names_of(y);
  std::vector<ColumnSet> families;
  for (auto c : column_list(y)) families.push_back(column_bit(c));
  out.num_families = families.size();
  for (auto f : families) out.dcs.push_back(compute_dc(relation, f, y));
  out.max_dc = *std::max_element(out.dcs.begin(), out.dcs.end());
  out.min_dc = *std::min_element(out.dcs.begin(), out.dcs.end());
  out.pc = pc_value(relation, families, y);
  return out;
}

ConstraintCheck check_constraints(const Query& query, const Instance& instance,
                                  std::span<const AtomConstraint> constraints) {
  for (const auto& c : constraints) {
    const Relation& r = instance.relation(query.atoms()[c.atom].relation);
    std::uint64_t d = 0;
    if (c.families.size() == 1) {
      d = compute_dc(r, c.families[0], c.y);
    } else {
      d = pc_value(r, c.families, c.y);
    }
    if (d > c.degree) {
      return {false, "relation '" + r.name() + "' violates a constraint: needs degree " + std::to_string(d) +
                         " > " + std::to_string(c.degree)};
    }
  }
  return {};
}

}  // namespace pcj
