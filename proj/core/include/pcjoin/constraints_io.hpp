#pragma once

#include <iosfwd>
#include <string>

#include "pcjoin/statistics.hpp"

namespace pcj {

/// JSON lines: {"relation": "R", "families": [["A"],["B"]], "y": ["A","B"], "d": 3}
/// with an optional "atom" index. Blank lines and lines starting with '#' are skipped.
ConstraintSet read_constraints(std::istream& in);
ConstraintSet load_constraints(const std::string& path);

void write_constraints(std::ostream& out, const ConstraintSet& constraints);
void save_constraints(const std::string& path, const ConstraintSet& constraints);

}  // namespace pcj
