#include "pcjoin/csv.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "pcjoin/error.hpp"

namespace pcj {

namespace {

// Splits one line; double quotes group fields and "" escapes a quote.
std::vector<std::string> split_fields(const std::string& line, char delimiter, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(ch);
      }
    } else if (ch == '"' && current.empty()) {
      quoted = true;
    } else if (ch == delimiter) {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  if (quoted) fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": unterminated quoted field");
  fields.push_back(std::move(current));
  return fields;
}

bool needs_quotes(const std::string& s, char delimiter) {
  return s.find(delimiter) != std::string::npos || s.find('"') != std::string::npos ||
         s.find('\n') != std::string::npos;
}

void write_field(std::ostream& out, const std::string& s, char delimiter) {
  if (!needs_quotes(s, delimiter)) {
    out << s;
    return;
  }
  out << '"';
  for (char ch : s) {
    if (ch == '"') out << '"';
    out << ch;
  }
  out << '"';
}

}  // namespace

LoadReport read_csv(std::istream& in, std::string name, Catalog& catalog, const CsvOptions& options) {
  std::vector<std::string> schema;
  std::vector<Value> rows;
  std::size_t raw_rows = 0;
  std::size_t line_no = 0;
  std::string line;
  bool have_schema = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_fields(line, options.delimiter, line_no);
    if (!have_schema) {
      have_schema = true;
      if (options.header) {
        schema = std::move(fields);
        for (auto& s : schema) {
          if (s.empty()) fail(ErrorKind::Schema, "line " + std::to_string(line_no) + ": empty column name in header");
        }
        continue;
      }
      for (std::size_t i = 0; i < fields.size(); ++i) schema.push_back("c" + std::to_string(i));
    }
    if (fields.size() != schema.size()) {
      fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected " + std::to_string(schema.size()) +
                                 " fields, found " + std::to_string(fields.size()));
    }
    for (const auto& f : fields) rows.push_back(catalog.intern(f));
    ++raw_rows;
  }
  if (schema.empty()) fail(ErrorKind::Schema, "relation '" + name + "' has an empty schema");
  LoadReport report;
  report.relation = Relation(std::move(name), std::move(schema), std::move(rows));
  report.raw_rows = raw_rows;
  report.duplicates = raw_rows - report.relation.size();
  return report;
}

LoadReport load_csv(const std::filesystem::path& path, std::string name, Catalog& catalog,
                    const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "'");
  return read_csv(in, std::move(name), catalog, options);
}

void write_csv(std::ostream& out, const Relation& relation, const Catalog& catalog, char delimiter) {
  for (std::size_t c = 0; c < relation.arity(); ++c) {
    if (c) out << delimiter;
    write_field(out, relation.schema()[c], delimiter);
  }
  out << '\n';
  for (std::size_t row = 0; row < relation.size(); ++row) {
    for (std::size_t c = 0; c < relation.arity(); ++c) {
      if (c) out << delimiter;
      write_field(out, catalog.text(relation.at(row, c)), delimiter);
    }
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Relation& relation, const Catalog& catalog,
               char delimiter) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path.string() + "'");
  write_csv(out, relation, catalog, delimiter);
}

}  // namespace pcj
