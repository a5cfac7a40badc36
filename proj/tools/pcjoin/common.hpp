#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pcjoin/csv.hpp"
#include "pcjoin/query.hpp"
#include "pcjoin/relation.hpp"

namespace pcjcli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr std::string_view kVersion = "0.1.0";

/// 64-bit FNV-1a; used for manifests and cache keys, not for security.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 14695981039346656037ull);
std::string hex64(std::uint64_t value);
std::string read_file(const fs::path& path);
std::string file_digest(const fs::path& path);

/// What one invocation touched, for --manifest and replay.
class Recorder {
 public:
  static Recorder& get();

  void input(const fs::path& path);
  void output(const fs::path& path, bool deterministic = true);
  void parameter(const std::string& key, json value) { parameters_[key] = std::move(value); }
  void seed(std::uint64_t s) { seed_ = s; }
  void stdout_text(std::string_view text) { stdout_ += text; }
  /// Timings and similar: replay skips the stdout comparison.
  void volatile_stdout() { stdout_deterministic_ = false; }

  json manifest(const std::vector<std::string>& argv, const std::string& command, double seconds) const;

 private:
  json parameters_ = json::object();
  json inputs_ = json::array();
  json outputs_ = json::array();
  std::optional<std::uint64_t> seed_;
  std::string stdout_;
  bool stdout_deterministic_ = true;
};

/// Writes to stdout and records the bytes for the manifest digest.
void emit(std::string_view text);
void emit_json(const json& j);

/// Comma separated names; empty string gives an empty list.
std::vector<std::string> split_list(std::string_view text, char sep = ',');
/// "A;B,C" -> {{A}, {B, C}}; "{}" or "-" is the empty family.
std::vector<std::vector<std::string>> parse_families(std::string_view text);

/// Catalog cache directory from PCJOIN_CACHE_DIR, if set.
std::optional<fs::path> cache_dir();

struct Loaded {
  pcj::Relation relation;
  std::size_t raw_rows = 0;
  std::size_t duplicates = 0;
  bool from_cache = false;
};

/// CSV load through the binary cache. Interning order matches a direct
/// parse, so outputs do not depend on whether the cache was warm.
Loaded load_relation(const fs::path& path, const std::string& name, pcj::Catalog& catalog,
                     const pcj::CsvOptions& options = {});

/// Binds every relation of `query` from `data_dir/<name>.csv`, with explicit
/// NAME=FILE overrides taking precedence.
void load_instance(pcj::Instance& instance, const pcj::Query& query, const std::optional<fs::path>& data_dir,
                   const std::vector<std::string>& overrides);

pcj::Query load_query(const fs::path& path);

void write_relation_file(const fs::path& path, const pcj::Relation& relation, const pcj::Catalog& catalog,
                         bool deterministic = true);
void write_text_file(const fs::path& path, std::string_view text, bool deterministic = true);

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace pcjcli
