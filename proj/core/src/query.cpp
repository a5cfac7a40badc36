#include "pcjoin/query.hpp"

#include <cctype>
#include <set>

#include "pcjoin/error.hpp"

namespace pcj {

Query::Query(std::vector<std::string> head, std::vector<Atom> atoms)
    : head_(std::move(head)), atoms_(std::move(atoms)) {
  if (atoms_.empty()) fail(ErrorKind::Parse, "query has no atoms");
  if (head_.size() > 64) fail(ErrorKind::ScaleExceeded, "queries are limited to 64 variables");
  std::set<std::string, std::less<>> head_set;
  for (const auto& v : head_) {
    if (!head_set.insert(v).second) fail(ErrorKind::Parse, "variable '" + v + "' repeated in head");
  }
  std::set<std::string, std::less<>> body_set;
  for (const auto& atom : atoms_) {
    std::set<std::string_view> seen;
    if (atom.variables.empty()) fail(ErrorKind::Parse, "atom '" + atom.relation + "' has no variables");
    for (const auto& v : atom.variables) {
      if (!seen.insert(v).second) {
        fail(ErrorKind::Parse, "variable '" + v + "' repeated inside atom '" + atom.relation + "'");
      }
      body_set.insert(v);
    }
  }
  if (head_set != body_set) fail(ErrorKind::Parse, "not a full CQ: head must list exactly the body variables");
  for (const auto& atom : atoms_) {
    std::vector<std::size_t> ids;
    std::uint64_t mask = 0;
    for (const auto& v : atom.variables) {
      ids.push_back(variable_index(v));
      mask |= std::uint64_t{1} << ids.back();
    }
    atom_vars_.push_back(std::move(ids));
    atom_masks_.push_back(mask);
  }
}

std::size_t Query::variable_index(std::string_view name) const {
  for (std::size_t i = 0; i < head_.size(); ++i) {
    if (head_[i] == name) return i;
  }
  fail(ErrorKind::Schema, "unknown query variable '" + std::string(name) + "'");
}

std::uint64_t Query::variables_of(std::size_t atom, ColumnSet columns) const {
  std::uint64_t mask = 0;
  for (auto c : column_list(columns)) {
    if (c >= atom_vars_[atom].size()) fail(ErrorKind::Schema, "column outside atom");
    mask |= std::uint64_t{1} << atom_vars_[atom][c];
  }
  return mask;
}

std::string Query::to_string() const {
  std::string out = "Q(";
  for (std::size_t i = 0; i < head_.size(); ++i) out += (i ? "," : "") + head_[i];
  out += ") <- ";
  for (std::size_t a = 0; a < atoms_.size(); ++a) {
    if (a) out += ", ";
    out += atoms_[a].relation + "(";
    for (std::size_t i = 0; i < atoms_[a].variables.size(); ++i) {
      out += (i ? "," : "") + atoms_[a].variables[i];
    }
    out += ")";
  }
  return out + ".";
}

namespace {

class QueryParser {
 public:
  explicit QueryParser(std::string_view text) : text_(text) {}

  Query parse() {
    std::string head_name = identifier();
    (void)head_name;
    auto head = variable_list();
    expect("<-");
    std::vector<Atom> atoms;
    do {
      Atom atom;
      atom.relation = identifier();
      atom.variables = variable_list();
      atoms.push_back(std::move(atom));
    } while (accept(','));
    accept('.');
    skip_space();
    if (pos_ < text_.size()) error("unexpected trailing input");
    return Query(std::move(head), std::move(atoms));
  }

 private:
  [[noreturn]] void error(const std::string& what) const {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    fail(ErrorKind::Parse, "query syntax error at " + std::to_string(line) + ":" + std::to_string(column) + ": " + what);
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      const char ch = text_[pos_];
      if (ch == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  bool accept(char ch) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == ch) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(std::string_view token) {
    skip_space();
    if (text_.substr(pos_, token.size()) != token) error("expected '" + std::string(token) + "'");
    pos_ += token.size();
  }

  std::string identifier() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
    if (start == pos_) error("expected identifier");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::vector<std::string> variable_list() {
    if (!accept('(')) error("expected '('");
    std::vector<std::string> vars;
    if (accept(')')) return vars;
    do {
      vars.push_back(identifier());
    } while (accept(','));
    if (!accept(')')) error("expected ')' or ','");
    return vars;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Query parse_query(std::string_view text) { return QueryParser(text).parse(); }

Query hexagon_query() {
  return parse_query("Q(A,B,C,U,V,W) <- R1(A,W,B), R2(B,U,C), R3(C,V,A), R4(U,V,W).");
}

void Instance::bind(Relation relation) {
  std::string name = relation.name();
  relations_.insert_or_assign(std::move(name), std::move(relation));
}

bool Instance::contains(std::string_view name) const { return relations_.find(name) != relations_.end(); }

const Relation& Instance::relation(std::string_view name) const {
  auto it = relations_.find(name);
  if (it == relations_.end()) fail(ErrorKind::Schema, "no relation bound to '" + std::string(name) + "'");
  return it->second;
}

void Instance::check_binds(const Query& query) const {
  for (const auto& atom : query.atoms()) {
    const auto& r = relation(atom.relation);
    if (r.arity() != atom.variables.size()) {
      fail(ErrorKind::Schema, "relation '" + atom.relation + "' has arity " + std::to_string(r.arity()) +
                                  " but its atom uses " + std::to_string(atom.variables.size()) + " variables");
    }
  }
}

}  // namespace pcj
