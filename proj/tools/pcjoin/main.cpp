#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <fcntl.h>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "common.hpp"
#include "pcjoin/error.hpp"

extern char** environ;

namespace {

using namespace pcjcli;
using pcj::ErrorKind;
using pcj::fail;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse:
    case ErrorKind::Schema:
    case ErrorKind::WitnessShape:
    case ErrorKind::Coverage:
    case ErrorKind::Parameter:
      return 2;
    case ErrorKind::ConstraintViolation:
      return 3;
    case ErrorKind::ScaleExceeded:
      return 4;
    case ErrorKind::Io:
      return 5;
    case ErrorKind::Internal:
      return 1;
  }
  return 1;
}

int report(std::string_view kind, const std::string& message, int code) {
  std::cerr << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << "\n";
  return code;
}

// Runs this binary again with `args`, stdout to `out_path`; returns the exit status.
int respawn(const std::vector<std::string>& args, const std::string& out_path) {
  std::vector<char*> argv;
  std::string self = "/proc/self/exe";
  argv.push_back(self.data());
  std::vector<std::string> copy = args;
  for (auto& a : copy) argv.push_back(a.data());
  argv.push_back(nullptr);
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, out_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, self.c_str(), &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) fail(ErrorKind::Io, "cannot re-run pcjoin for replay");
  int status = 0;
  waitpid(pid, &status, 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : 1;
}

void add_replay(CLI::App& app) {
  auto path = std::make_shared<std::string>();
  auto* cmd = app.add_subcommand("replay", "Re-run a recorded manifest and check that its outputs are byte-identical");
  cmd->add_option("manifest", *path, "Manifest written by --manifest")->required();
  cmd->callback([path] {
    json old;
    try {
      old = json::parse(read_file(*path));
    } catch (const json::exception& e) {
      fail(ErrorKind::Parse, "manifest '" + *path + "': " + e.what());
    }
    for (const auto& in : old.at("inputs")) {
      const std::string p = in.at("path");
      if (file_digest(p) != in.at("digest")) fail(ErrorKind::Io, "input '" + p + "' changed since the manifest was written");
    }
    std::vector<std::string> args;
    for (std::size_t i = 0; i < old.at("argv").size(); ++i) {
      const std::string a = old["argv"][i];
      if (a == "--manifest") {
        ++i;
        continue;
      }
      if (a.rfind("--manifest=", 0) == 0) continue;
      args.push_back(a);
    }
    const fs::path tmp = fs::temp_directory_path() / ("pcjoin-replay-" + std::to_string(::getpid()));
    fs::create_directories(tmp);
    const std::string fresh = (tmp / "manifest.json").string();
    const std::string out = (tmp / "stdout").string();
    args.insert(args.begin(), {"--manifest", fresh});
    const int rc = respawn(args, out);
    if (rc != 0) fail(ErrorKind::Internal, "replayed command exited with status " + std::to_string(rc));
    const json now = json::parse(read_file(fresh));
    json checked = json::array();
    std::vector<std::string> mismatches;
    if (old["stdout"].value("deterministic", true)) {
      const bool same = now["stdout"]["digest"] == old["stdout"]["digest"];
      checked.push_back({{"output", "stdout"}, {"identical", same}});
      if (!same) mismatches.push_back("stdout");
    }
    for (const auto& o : old.at("outputs")) {
      if (!o.value("deterministic", true)) continue;
      bool same = false;
      for (const auto& n : now.at("outputs")) {
        if (n["path"] == o["path"]) same = n["digest"] == o["digest"];
      }
      checked.push_back({{"output", o["path"]}, {"identical", same}});
      if (!same) mismatches.push_back(o["path"]);
    }
    fs::remove_all(tmp);
    emit_json({{"replayed", old["command"]}, {"checked", checked}, {"identical", mismatches.empty()}});
    if (!mismatches.empty()) fail(ErrorKind::Internal, "replay produced different output: " + mismatches.front());
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pcjoin: partition-constraint statistics, bounds and joins"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  Globals globals;
  std::string manifest;
  app.add_option("--manifest", manifest, "Write a run manifest (inputs, outputs, digests, timing) here");
  app.add_option("--jobs", globals.jobs, "Worker threads for lifted-join combinations, bounds and bench sweeps")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_ingest(app, globals);
  add_stats(app, globals);
  add_decompose(app, globals);
  add_bound(app, globals);
  add_join(app, globals);
  add_gen(app, globals);
  add_bench(app, globals);
  add_replay(app);

  const std::vector<std::string> args(argv + 1, argv + argc);
  Stopwatch clock;
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("usage", e.what(), 2);
  } catch (const pcj::Error& e) {
    return report(pcj::to_string(e.kind()), e.what(), exit_code(e.kind()));
  } catch (const std::bad_alloc&) {
    return report("scale-exceeded", "out of memory", 4);
  } catch (const std::exception& e) {
    return report("internal", e.what(), 1);
  }
  std::cout.flush();
  if (!manifest.empty()) {
    const auto* sub = app.get_subcommands().front();
    const json m = Recorder::get().manifest(args, sub->get_name(), clock.seconds());
    std::ofstream out(manifest);
    if (!out) return report("io", "cannot write manifest '" + manifest + "'", 5);
    out << m.dump(2) << "\n";
  }
  return 0;
}
