#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pcjoin/cover_lp.hpp"
#include "pcjoin/power_product.hpp"
#include "pcjoin/query.hpp"
#include "pcjoin/statistics.hpp"

namespace pcj {

/// A degree constraint in query-variable space: DC(x, y, degree) on atom `atom`.
struct QueryDc {
  std::size_t atom = 0;
  std::uint64_t x = 0;
  std::uint64_t y = 0;
  std::uint64_t degree = 0;
};

struct ChainStep {
  std::size_t constraint = 0;  // index into the DC list handed to the estimator
  std::uint64_t bound_after = 0;  // variable mask bound after the step
};

struct BoundResult {
  std::string estimator;
  BoundValue value;

  // agm: one cover edge per used cardinality constraint.
  CoverLP lp;
  std::vector<std::size_t> lp_sources;  // DC index behind each edge
  std::vector<Rational> cover;

  // chain
  std::vector<ChainStep> steps;

  // extended: one row per family combination.
  struct Combination {
    std::vector<std::size_t> choice;  // family index per PC
    std::vector<QueryDc> dcs;
    std::shared_ptr<const BoundResult> result;
  };
  std::vector<Combination> combinations;
};

/// A sound DC-based cardinality bound (any base for the PC extension).
class BoundEstimator {
 public:
  virtual ~BoundEstimator() = default;
  virtual std::string name() const = 0;
  virtual BoundResult estimate(const Query& query, std::span<const QueryDc> dcs) const = 0;
};

class AgmEstimator final : public BoundEstimator {
 public:
  std::string name() const override { return "agm"; }
  BoundResult estimate(const Query& query, std::span<const QueryDc> dcs) const override;
};

class ChainEstimator final : public BoundEstimator {
 public:
  std::string name() const override { return "chain"; }
  BoundResult estimate(const Query& query, std::span<const QueryDc> dcs) const override;
};

std::unique_ptr<BoundEstimator> make_estimator(const std::string& name);

/// Uses only the cardinality constraints (X = ∅); the smallest N per edge.
BoundResult agm_bound(const Query& query, std::span<const QueryDc> dcs);
/// Cheapest sequence of DC steps that binds every variable.
BoundResult chain_dc_bound(const Query& query, std::span<const QueryDc> dcs);

/// Σ over one family choice per PC of base(query, chosen DCs).
BoundResult extended_bound(const Query& query, std::span<const AtomConstraint> constraints,
                           const BoundEstimator& base, std::size_t jobs = 1);

/// Single-family constraints only; throws if any constraint has several families.
std::vector<QueryDc> to_query_dcs(const Query& query, std::span<const AtomConstraint> constraints);

/// JSON report: value, certified integer, certificate, combinations.
std::string bound_report_json(const Query& query, const BoundResult& result);

}  // namespace pcj
