#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "pcjoin/relation.hpp"

namespace pcj {

struct CsvOptions {
  char delimiter = ',';
  bool header = true;
};

struct LoadReport {
  Relation relation;
  std::size_t raw_rows = 0;
  std::size_t duplicates = 0;
};

/// Reads a delimited file into a relation, interning every field in `catalog`.
/// Without a header the columns are named c0, c1, ...
LoadReport load_csv(const std::filesystem::path& path, std::string name, Catalog& catalog,
                    const CsvOptions& options = {});
LoadReport read_csv(std::istream& in, std::string name, Catalog& catalog, const CsvOptions& options = {});

/// Header line followed by one line per tuple in canonical row order.
void write_csv(std::ostream& out, const Relation& relation, const Catalog& catalog, char delimiter = ',');
void write_csv(const std::filesystem::path& path, const Relation& relation, const Catalog& catalog,
               char delimiter = ',');

}  // namespace pcj
