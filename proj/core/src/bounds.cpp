#include "pcjoin/bounds.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <optional>
#include <thread>

#include <json.hpp>

#include "pcjoin/error.hpp"

namespace pcj {

std::vector<QueryDc> to_query_dcs(const Query& query, std::span<const AtomConstraint> constraints) {
  std::vector<QueryDc> out;
  for (const auto& c : constraints) {
    if (c.families.size() != 1) fail(ErrorKind::Parameter, "expected degree constraints only, found a partition constraint");
    out.push_back({c.atom, query.variables_of(c.atom, c.families[0]), query.variables_of(c.atom, c.y), c.degree});
  }
  return out;
}

BoundResult agm_bound(const Query& query, std::span<const QueryDc> dcs) {
  BoundResult out;
  out.estimator = "agm";
  // Smallest N per hyperedge.
  std::map<std::uint64_t, std::size_t> by_edge;
  for (std::size_t i = 0; i < dcs.size(); ++i) {
    if (dcs[i].x != 0 || dcs[i].y == 0) continue;
    auto [it, fresh] = by_edge.emplace(dcs[i].y, i);
    if (!fresh && dcs[i].degree < dcs[it->second].degree) it->second = i;
  }
  out.lp.num_variables = query.num_variables();
  std::uint64_t covered = 0;
  for (const auto& [edge, source] : by_edge) {
    out.lp.edges.push_back(edge);
    out.lp.sizes.push_back(BigInt(dcs[source].degree));
    out.lp_sources.push_back(source);
    covered |= edge;
  }
  for (std::size_t v = 0; v < query.num_variables(); ++v) {
    if (!(covered >> v & 1)) {
      fail(ErrorKind::Coverage, "variable '" + query.head()[v] + "' is not covered by any cardinality constraint");
    }
  }
  if (out.lp.edges.size() > kMaxCoverEdges) {
    fail(ErrorKind::ScaleExceeded, "LP scale exceeded: " + std::to_string(out.lp.edges.size()) + " atoms > 16");
  }
  const bool has_zero = std::any_of(out.lp.sizes.begin(), out.lp.sizes.end(), [](const BigInt& n) { return n == 0; });
  if (has_zero) {
    out.cover.assign(out.lp.edges.size(), Rational(1));
    out.value = BoundValue(evaluate_cover(out.lp, out.cover));
    return out;
  }
  CoverSolution solution = solve_cover_lp(out.lp);
  out.cover = std::move(solution.weights);
  out.value = BoundValue(std::move(solution.objective));
  return out;
}

BoundResult chain_dc_bound(const Query& query, std::span<const QueryDc> dcs) {
  const std::size_t r = query.num_variables();
  if (r > 24) fail(ErrorKind::ScaleExceeded, "chain bound supports at most 24 variables");
  const std::uint64_t full = r == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << r) - 1;
  const std::size_t states = std::size_t{1} << r;
  std::vector<std::optional<BigInt>> best(states);
  std::vector<std::pair<std::uint64_t, std::size_t>> parent(states, {0, 0});
  best[0] = BigInt(1);
  for (std::uint64_t mask = 0; mask < states; ++mask) {
    if (!best[mask]) continue;
    for (std::size_t i = 0; i < dcs.size(); ++i) {
      const auto& dc = dcs[i];
      if ((dc.x & ~mask) != 0 || (dc.y & ~mask) == 0) continue;
      const std::uint64_t next = mask | dc.y;
      BigInt value = *best[mask] * dc.degree;
      if (!best[next] || value < *best[next]) {
        best[next] = std::move(value);
        parent[next] = {mask, i};
      }
    }
  }
  if (!best[full]) fail(ErrorKind::Coverage, "no ordering of the degree constraints binds every variable");
  BoundResult out;
  out.estimator = "chain";
  out.value = BoundValue(Monomial::integer(*best[full]));
  for (std::uint64_t mask = full; mask != 0; mask = parent[mask].first) out.steps.push_back({parent[mask].second, mask});
  std::reverse(out.steps.begin(), out.steps.end());
  return out;
}

BoundResult AgmEstimator::estimate(const Query& query, std::span<const QueryDc> dcs) const { return agm_bound(query, dcs); }
BoundResult ChainEstimator::estimate(const Query& query, std::span<const QueryDc> dcs) const {
  return chain_dc_bound(query, dcs);
}

std::unique_ptr<BoundEstimator> make_estimator(const std::string& name) {
  if (name == "agm") return std::make_unique<AgmEstimator>();
  if (name == "chain") return std::make_unique<ChainEstimator>();
  fail(ErrorKind::Parameter, "unknown bound estimator '" + name + "' (expected agm or chain)");
}

BoundResult extended_bound(const Query& query, std::span<const AtomConstraint> constraints, const BoundEstimator& base,
                           std::size_t jobs) {
  std::size_t total = 1;
  for (const auto& c : constraints) {
    if (c.families.empty()) fail(ErrorKind::Schema, "constraint without families");
    total *= c.families.size();
    if (total > (std::size_t{1} << 20)) fail(ErrorKind::ScaleExceeded, "too many family combinations");
  }
  BoundResult out;
  out.estimator = "extended(" + base.name() + ")";
  out.combinations.resize(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    auto& combo = out.combinations[idx];
    combo.choice.resize(constraints.size());
    std::size_t rest = idx;
    for (std::size_t i = constraints.size(); i-- > 0;) {
      combo.choice[i] = rest % constraints[i].families.size();
      rest /= constraints[i].families.size();
    }
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      const auto& c = constraints[i];
      combo.dcs.push_back({c.atom, query.variables_of(c.atom, c.families[combo.choice[i]]), query.variables_of(c.atom, c.y),
                           c.degree});
    }
  }

  const auto run = [&](std::size_t idx) {
    auto& combo = out.combinations[idx];
    combo.result = std::make_shared<const BoundResult>(base.estimate(query, combo.dcs));
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, total));
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
  for (const auto& combo : out.combinations) out.value += combo.result->value;
  return out;
}

namespace {

nlohmann::json value_json(const BoundValue& value) {
  using nlohmann::json;
  json terms = json::array();
  for (const auto& t : value.terms()) {
    json factors = json::array();
    for (const auto& f : t.factors()) factors.push_back({{"base", f.base.str()}, {"exponent", to_string(f.exponent)}});
    terms.push_back({{"zero", t.is_zero()}, {"factors", factors}, {"text", t.to_string()}});
  }
  json out = {{"text", value.to_string()},
              {"terms", terms},
              {"certified_integer", value.certified_integer().str()},
              {"approx", value.to_double()}};
  BigInt exact;
  out["exact_integer"] = value.exact_integer(exact) ? json(exact.str()) : json(nullptr);
  return out;
}

std::vector<std::string> mask_names(const Query& query, std::uint64_t mask) {
  std::vector<std::string> out;
  for (std::size_t v = 0; v < query.num_variables(); ++v) {
    if (mask >> v & 1) out.push_back(query.head()[v]);
  }
  return out;
}

nlohmann::json dc_json(const Query& query, const QueryDc& dc) {
  return {{"relation", query.atoms()[dc.atom].relation},
          {"atom", dc.atom},
          {"x", mask_names(query, dc.x)},
          {"y", mask_names(query, dc.y)},
          {"d", dc.degree}};
}

nlohmann::json result_json(const Query& query, const BoundResult& r, std::span<const QueryDc> dcs) {
  using nlohmann::json;
  json out = {{"estimator", r.estimator}, {"value", value_json(r.value)}};
  if (!r.lp.edges.empty()) {
    json edges = json::array();
    for (std::size_t i = 0; i < r.lp.edges.size(); ++i) {
      edges.push_back({{"variables", mask_names(query, r.lp.edges[i])},
                       {"n", r.lp.sizes[i].str()},
                       {"weight", to_string(r.cover[i])},
                       {"relation", dcs.empty() ? json(nullptr) : json(query.atoms()[dcs[r.lp_sources[i]].atom].relation)}});
    }
    out["cover"] = edges;
  }
  if (!r.steps.empty()) {
    json steps = json::array();
    std::uint64_t bound = 0;
    for (const auto& s : r.steps) {
      json step = {{"binds", mask_names(query, s.bound_after & ~bound)}};
      if (!dcs.empty()) step["constraint"] = dc_json(query, dcs[s.constraint]);
      steps.push_back(step);
      bound = s.bound_after;
    }
    out["order"] = steps;
  }
  if (!r.combinations.empty()) {
    json combos = json::array();
    for (const auto& c : r.combinations) {
      combos.push_back({{"choice", c.choice}, {"result", result_json(query, *c.result, c.dcs)}});
    }
    out["combinations"] = combos;
  }
  return out;
}

}  // namespace

std::string bound_report_json(const Query& query, const BoundResult& result) {
  auto doc = result_json(query, result, {});
  doc["query"] = query.to_string();
  return doc.dump(2);
}

}  // namespace pcj
