#pragma once

#include <CLI11.hpp>

namespace pcjcli {

struct Globals {
  std::size_t jobs = 1;
};

// Each registers a subcommand whose callback does the work.
void add_ingest(CLI::App& app, const Globals& g);
void add_stats(CLI::App& app, const Globals& g);
void add_decompose(CLI::App& app, const Globals& g);
void add_bound(CLI::App& app, const Globals& g);
void add_join(CLI::App& app, const Globals& g);
void add_gen(CLI::App& app, const Globals& g);
void add_bench(CLI::App& app, const Globals& g);

}  // namespace pcjcli
