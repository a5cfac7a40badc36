#include "pcjoin/constraints_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "pcjoin/error.hpp"

namespace pcj {

namespace {

std::vector<std::string> names(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array()) fail(ErrorKind::Parse, where + ": expected an array of variable names");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) fail(ErrorKind::Parse, where + ": variable names must be strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

ConstraintSet read_constraints(std::istream& in) {
  ConstraintSet out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    const std::string where = "constraints line " + std::to_string(number);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorKind::Parse, where + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("relation") || !j.contains("families") || !j.contains("y") || !j.contains("d")) {
      fail(ErrorKind::Parse, where + ": need relation, families, y and d");
    }
    PartitionConstraint c;
    if (!j["relation"].is_string()) fail(ErrorKind::Parse, where + ": relation must be a string");
    c.relation = j["relation"].get<std::string>();
    if (!j["families"].is_array() || j["families"].empty()) fail(ErrorKind::Parse, where + ": families must be a non-empty array");
    for (const auto& f : j["families"]) c.families.push_back(names(f, where));
    c.y = names(j["y"], where);
    if (!j["d"].is_number_unsigned()) fail(ErrorKind::Parse, where + ": d must be a non-negative integer");
    c.degree = j["d"].get<std::uint64_t>();
    if (j.contains("atom")) {
      if (!j["atom"].is_number_unsigned()) fail(ErrorKind::Parse, where + ": atom must be a non-negative integer");
      c.atom = j["atom"].get<std::size_t>();
    }
    out.add(std::move(c));
  }
  return out;
}

ConstraintSet load_constraints(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open constraint file '" + path + "'");
  return read_constraints(in);
}

void write_constraints(std::ostream& out, const ConstraintSet& constraints) {
  for (const auto& c : constraints.constraints()) {
    nlohmann::json j;
    j["relation"] = c.relation;
    j["families"] = c.families;
    j["y"] = c.y;
    j["d"] = c.degree;
    if (c.atom) j["atom"] = *c.atom;
    out << j.dump() << '\n';
  }
}

void save_constraints(const std::string& path, const ConstraintSet& constraints) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write constraint file '" + path + "'");
  write_constraints(out, constraints);
}

}  // namespace pcj
