#include "common.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pcjoin/error.hpp"

namespace pcjcli {

using pcj::ErrorKind;
using pcj::fail;

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string file_digest(const fs::path& path) { return "fnv1a64:" + hex64(fnv1a(read_file(path))); }

Recorder& Recorder::get() {
  static Recorder r;
  return r;
}

void Recorder::input(const fs::path& path) {
  inputs_.push_back({{"path", path.string()}, {"digest", file_digest(path)}});
}

void Recorder::output(const fs::path& path, bool deterministic) {
  outputs_.push_back({{"path", path.string()}, {"digest", file_digest(path)}, {"deterministic", deterministic}});
}

json Recorder::manifest(const std::vector<std::string>& argv, const std::string& command, double seconds) const {
  json m;
  m["tool"] = "pcjoin";
  m["version"] = kVersion;
  m["command"] = command;
  m["argv"] = argv;
  m["parameters"] = parameters_;
  m["inputs"] = inputs_;
  m["outputs"] = outputs_;
  m["stdout"] = {{"digest", "fnv1a64:" + hex64(fnv1a(stdout_))}, {"bytes", stdout_.size()}, {"deterministic", stdout_deterministic_}};
  m["seed"] = seed_ ? json(*seed_) : json(nullptr);
  m["timing"] = {{"wall_seconds", seconds}};
  return m;
}

void emit(std::string_view text) {
  std::cout << text;
  Recorder::get().stdout_text(text);
}

void emit_json(const json& j) { emit(j.dump(2) + "\n"); }

std::vector<std::string> split_list(std::string_view text, char sep) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    std::string item(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    item = b == std::string::npos ? "" : item.substr(b, e - b + 1);
    if (item.empty()) fail(ErrorKind::Parse, "empty name in list '" + std::string(text) + "'");
    out.push_back(item);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::vector<std::string>> parse_families(std::string_view text) {
  std::vector<std::vector<std::string>> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(';', start);
    const std::string_view item = text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    if (item == "{}" || item == "-") {
      out.emplace_back();
    } else {
      out.push_back(split_list(item));
    }
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<fs::path> cache_dir() {
  const char* env = std::getenv("PCJOIN_CACHE_DIR");
  if (env == nullptr || *env == '\0') return std::nullopt;
  return fs::path(env);
}

namespace {

// Cache entry: magic, schema, first-seen dictionary, rows in dictionary ids.
constexpr std::string_view kMagic = "PCJREL1\n";

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(v >> (8 * i) & 0xff));
}

void put_string(std::string& out, std::string_view s) {
  put_u64(out, s.size());
  out.append(s);
}

struct Reader {
  std::string_view data;
  std::size_t at = 0;

  std::uint64_t u64() {
    if (at + 8 > data.size()) fail(ErrorKind::Io, "truncated cache entry");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{static_cast<unsigned char>(data[at + i])} << (8 * i);
    at += 8;
    return v;
  }
  std::string string() {
    const auto n = u64();
    if (at + n > data.size()) fail(ErrorKind::Io, "truncated cache entry");
    std::string s(data.substr(at, n));
    at += n;
    return s;
  }
};

struct Raw {
  std::vector<std::string> schema;
  std::vector<std::string> dictionary;
  std::vector<pcj::Value> rows;  // dictionary ids, canonical order
  std::size_t raw_rows = 0;
  std::size_t duplicates = 0;
};

std::string encode(const Raw& raw) {
  std::string out(kMagic);
  put_u64(out, raw.schema.size());
  for (const auto& s : raw.schema) put_string(out, s);
  put_u64(out, raw.dictionary.size());
  for (const auto& s : raw.dictionary) put_string(out, s);
  put_u64(out, raw.raw_rows);
  put_u64(out, raw.duplicates);
  put_u64(out, raw.rows.size());
  for (auto v : raw.rows) put_u64(out, v);
  return out;
}

Raw decode(std::string_view bytes) {
  if (bytes.substr(0, kMagic.size()) != kMagic) fail(ErrorKind::Io, "not a pcjoin cache entry");
  Reader r{bytes, kMagic.size()};
  Raw raw;
  raw.schema.resize(r.u64());
  for (auto& s : raw.schema) s = r.string();
  raw.dictionary.resize(r.u64());
  for (auto& s : raw.dictionary) s = r.string();
  raw.raw_rows = r.u64();
  raw.duplicates = r.u64();
  raw.rows.resize(r.u64());
  for (auto& v : raw.rows) {
    v = static_cast<pcj::Value>(r.u64());
    if (v >= raw.dictionary.size()) fail(ErrorKind::Io, "corrupt cache entry");
  }
  return raw;
}

Raw parse(const std::string& text, const std::string& name, const pcj::CsvOptions& options) {
  // A private catalog numbers values in first-seen order of this file alone.
  pcj::Catalog local;
  std::istringstream in(text);
  auto report = pcj::read_csv(in, name, local, options);
  Raw raw;
  raw.schema = report.relation.schema();
  for (std::size_t id = 0; id < local.size(); ++id) raw.dictionary.push_back(local.text(static_cast<pcj::Value>(id)));
  raw.rows = report.relation.data();
  raw.raw_rows = report.raw_rows;
  raw.duplicates = report.duplicates;
  return raw;
}

}  // namespace

Loaded load_relation(const fs::path& path, const std::string& name, pcj::Catalog& catalog,
                     const pcj::CsvOptions& options) {
  const std::string text = read_file(path);
  Recorder::get().input(path);
  Raw raw;
  bool hit = false;
  const auto dir = cache_dir();
  fs::path entry;
  if (dir) {
    std::string key = text;
    key.push_back(options.delimiter);
    key.push_back(options.header ? 'h' : 'n');
    entry = *dir / (hex64(fnv1a(key)) + ".pcjrel");
    std::error_code ec;
    if (fs::exists(entry, ec)) {
      raw = decode(read_file(entry));
      hit = true;
    }
  }
  if (!hit) {
    raw = parse(text, name, options);
    if (dir) {
      std::error_code ec;
      fs::create_directories(*dir, ec);
      // Write then rename so a concurrent reader never sees a partial entry.
      const fs::path tmp = entry.string() + ".tmp" + std::to_string(fnv1a(name));
      {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) fail(ErrorKind::Io, "cannot write cache entry in '" + dir->string() + "'");
        const auto bytes = encode(raw);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
      }
      fs::rename(tmp, entry, ec);
      if (ec) fail(ErrorKind::Io, "cannot write cache entry '" + entry.string() + "': " + ec.message());
    }
  }
  std::vector<pcj::Value> ids;
  ids.reserve(raw.dictionary.size());
  for (const auto& s : raw.dictionary) ids.push_back(catalog.intern(s));
  for (auto& v : raw.rows) v = ids[v];
  Loaded out;
  out.relation = pcj::Relation(name, raw.schema, std::move(raw.rows));
  out.raw_rows = raw.raw_rows;
  out.duplicates = raw.duplicates;
  out.from_cache = hit;
  return out;
}

void load_instance(pcj::Instance& instance, const pcj::Query& query, const std::optional<fs::path>& data_dir,
                   const std::vector<std::string>& overrides) {
  std::map<std::string, fs::path> files;
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) fail(ErrorKind::Parse, "--rel expects NAME=FILE, got '" + o + "'");
    files[o.substr(0, eq)] = o.substr(eq + 1);
  }
  for (const auto& atom : query.atoms()) {
    if (instance.contains(atom.relation)) continue;
    fs::path file;
    if (auto it = files.find(atom.relation); it != files.end()) {
      file = it->second;
    } else if (data_dir) {
      file = *data_dir / (atom.relation + ".csv");
    } else {
      fail(ErrorKind::Parameter, "no file for relation '" + atom.relation + "' (use --data or --rel)");
    }
    auto loaded = load_relation(file, atom.relation, instance.catalog());
    // Columns are positional in the query; the CSV header only fixes the arity.
    const auto arity = loaded.relation.arity();
    if (arity != atom.variables.size()) {
      fail(ErrorKind::Schema, "relation '" + atom.relation + "' has arity " + std::to_string(arity) +
                                  " but the query uses " + std::to_string(atom.variables.size()));
    }
    instance.bind(std::move(loaded.relation));
  }
  instance.check_binds(query);
}

pcj::Query load_query(const fs::path& path) {
  const std::string text = read_file(path);
  Recorder::get().input(path);
  return pcj::parse_query(text);
}

void write_text_file(const fs::path& path, std::string_view text, bool deterministic) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write '" + path.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) fail(ErrorKind::Io, "write failed for '" + path.string() + "'");
  }
  Recorder::get().output(path, deterministic);
}

void write_relation_file(const fs::path& path, const pcj::Relation& relation, const pcj::Catalog& catalog,
                         bool deterministic) {
  std::ostringstream out;
  pcj::write_csv(out, relation, catalog);
  write_text_file(path, out.str(), deterministic);
}

}  // namespace pcjcli
