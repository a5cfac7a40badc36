#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <sstream>

#include "common.hpp"
#include "pcjoin/bounds.hpp"
#include "pcjoin/constraints_io.hpp"
#include "pcjoin/decomposition.hpp"
#include "pcjoin/error.hpp"
#include "pcjoin/generators.hpp"
#include "pcjoin/hexagon.hpp"
#include "pcjoin/join.hpp"
#include "pcjoin/statistics.hpp"

namespace pcjcli {

using pcj::ErrorKind;
using pcj::fail;

namespace {

pcj::ConstraintSet load_constraint_file(const fs::path& path) {
  std::istringstream in(read_file(path));
  Recorder::get().input(path);
  return pcj::read_constraints(in);
}

pcj::ColumnSet columns(const pcj::Relation& r, const std::vector<std::string>& names) {
  return r.columns_of(names);
}

std::vector<pcj::ColumnSet> family_columns(const pcj::Relation& r, const std::vector<std::vector<std::string>>& fams) {
  std::vector<pcj::ColumnSet> out;
  for (const auto& f : fams) out.push_back(columns(r, f));
  return out;
}

void warn(const std::string& message) { std::cerr << json{{"warning", message}}.dump() << "\n"; }

}  // namespace

// ---------------------------------------------------------------------------

void add_ingest(CLI::App& app, const Globals&) {
  struct Opts {
    std::vector<std::string> files;
    std::string delimiter = ",";
    bool no_header = false;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("ingest", "Load CSV files into the catalog (and the cache, if PCJOIN_CACHE_DIR is set)");
  cmd->add_option("files", o->files, "CSV files; the relation is named after the file stem")->required();
  cmd->add_option("--delimiter", o->delimiter, "Field separator")->capture_default_str();
  cmd->add_flag("--no-header", o->no_header, "Files have no header; columns become c0, c1, ...");
  cmd->callback([o] {
    if (o->delimiter.size() != 1) fail(ErrorKind::Parameter, "--delimiter must be one character");
    pcj::CsvOptions options{o->delimiter[0], !o->no_header};
    pcj::Catalog catalog;
    json report = json::array();
    for (const auto& f : o->files) {
      const fs::path path(f);
      auto loaded = load_relation(path, path.stem().string(), catalog, options);
      report.push_back({{"relation", loaded.relation.name()},
                        {"path", path.string()},
                        {"schema", loaded.relation.schema()},
                        {"rows", loaded.relation.size()},
                        {"raw_rows", loaded.raw_rows},
                        {"duplicates", loaded.duplicates},
                        {"digest", file_digest(path)}});
    }
    emit_json({{"relations", report}, {"catalog_values", catalog.size()}});
  });
}

// ---------------------------------------------------------------------------

void add_stats(CLI::App& app, const Globals&) {
  struct Opts {
    std::string file;
    std::string x, y, families, key;
    bool profile = false;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("stats", "Degree constraint, partition constraint or non-key profile of one relation");
  cmd->add_option("file", o->file, "CSV file")->required();
  cmd->add_option("--x", o->x, "X columns of DC(X, Y), comma separated (empty: cardinality)");
  cmd->add_option("--y", o->y, "Y columns, comma separated (default: whole schema)");
  cmd->add_option("--families", o->families, "PC families, e.g. 'A;B' or 'A,B;C'; reports the optimal d");
  cmd->add_flag("--profile", o->profile, "Non-key profile: max DC, min DC, PC over singleton families");
  cmd->add_option("--key", o->key, "Key columns excluded by --profile, comma separated");
  cmd->callback([o] {
    pcj::Catalog catalog;
    const fs::path path(o->file);
    const auto rel = load_relation(path, path.stem().string(), catalog).relation;
    json out{{"relation", rel.name()}, {"rows", rel.size()}, {"schema", rel.schema()}};
    if (o->profile) {
      const auto keys = split_list(o->key);
      const auto p = pcj::nonkey_pc_profile(rel, keys);
      out["profile"] = {{"y", p.y}, {"dcs", p.dcs}, {"max_dc", p.max_dc}, {"min_dc", p.min_dc},
                        {"pc", p.pc}, {"num_families", p.num_families}};
    }
    const auto yv = o->y.empty() ? rel.schema() : split_list(o->y);
    const pcj::ColumnSet y = columns(rel, yv);
    if (!o->families.empty()) {
      const auto fams = parse_families(o->families);
      const auto cols = family_columns(rel, fams);
      out["pc"] = {{"families", fams}, {"y", yv}, {"d", pcj::pc_value(rel, cols, y)}};
    } else if (!o->profile || !o->x.empty()) {
      const auto xv = split_list(o->x);
      const pcj::ColumnSet x = columns(rel, xv);
      pcj::validate_dc_shape(rel, x, y);
      out["dc"] = {{"x", xv}, {"y", yv}, {"d", pcj::compute_dc(rel, x, y)}};
    }
    emit_json(out);
  });
}

// ---------------------------------------------------------------------------

void add_decompose(CLI::App& app, const Globals&) {
  struct Opts {
    std::string file, families, y, algo = "approx", out;
    std::size_t max_groups = 10;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("decompose", "Split a relation into one part per family with a small max degree");
  cmd->add_option("file", o->file, "CSV file")->required();
  cmd->add_option("--families", o->families, "Families, e.g. 'A;B' (default: one singleton per Y column)");
  cmd->add_option("--y", o->y, "Y columns, comma separated (default: whole schema)");
  cmd->add_option("--algo", o->algo, "approx | exact | brute")
      ->check(CLI::IsMember({"approx", "exact", "brute"}))
      ->capture_default_str();
  cmd->add_option("--max-groups", o->max_groups, "Group limit for --algo brute")->capture_default_str();
  cmd->add_option("--out", o->out, "Directory for manifest.json and part_<i>.csv");
  cmd->callback([o] {
    pcj::Catalog catalog;
    const fs::path path(o->file);
    const auto rel = load_relation(path, path.stem().string(), catalog).relation;
    const auto yv = o->y.empty() ? rel.schema() : split_list(o->y);
    std::vector<std::vector<std::string>> fams;
    if (o->families.empty()) {
      for (const auto& v : yv) fams.push_back({v});
    } else {
      fams = parse_families(o->families);
    }
    const auto cols = family_columns(rel, fams);
    const pcj::ColumnSet y = columns(rel, yv);
    Recorder::get().parameter("algo", o->algo);
    pcj::Partitioning p = o->algo == "approx" ? pcj::decompose_approx(rel, cols, y)
                          : o->algo == "exact" ? pcj::decompose_exact(rel, cols, y)
                                               : pcj::decompose_bruteforce(rel, cols, y, o->max_groups);
    json parts = json::array();
    for (std::size_t f = 0; f < p.parts.size(); ++f) {
      parts.push_back({{"family", fams[f]}, {"rows", p.parts[f].size()},
                       {"degree", pcj::compute_dc(p.parts[f], cols[f], y)}});
    }
    if (!o->out.empty()) {
      const fs::path dir(o->out);
      std::ostringstream manifest;
      pcj::write_partition_manifest(manifest, rel, p);
      write_text_file(dir / "manifest.json", manifest.str());
      for (std::size_t f = 0; f < p.parts.size(); ++f) {
        write_relation_file(dir / ("part_" + std::to_string(f) + ".csv"), p.parts[f], catalog);
      }
    }
    emit_json({{"relation", rel.name()}, {"algo", o->algo}, {"y", yv}, {"achieved_degree", p.achieved_degree},
               {"parts", parts}});
  });
}

// ---------------------------------------------------------------------------

void add_bound(CLI::App& app, const Globals& g) {
  struct Opts {
    std::string query, constraints, base = "chain";
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("bound", "Output-size bound from degree and partition constraints");
  cmd->add_option("--query", o->query, "Query file: Q(A,B) <- R(A,B), ...")->required();
  cmd->add_option("--constraints", o->constraints, "Constraint file, one JSON object per line")->required();
  cmd->add_option("--base", o->base, "agm | chain")->check(CLI::IsMember({"agm", "chain"}))->capture_default_str();
  cmd->callback([o, &g] {
    const auto query = load_query(o->query);
    const auto set = load_constraint_file(o->constraints);
    for (const auto& w : set.warnings()) warn(w);
    set.validate_coverage(query);
    const auto bound = set.bind(query);
    const auto base = pcj::make_estimator(o->base);
    const auto result = pcj::extended_bound(query, bound, *base, g.jobs);
    emit(pcj::bound_report_json(query, result) + "\n");
  });
}

// ---------------------------------------------------------------------------

void add_join(CLI::App& app, const Globals& g) {
  struct Opts {
    std::string query, data, constraints, engine = "generic", order, out, base = "generic";
    std::vector<std::string> rels;
    bool count_only = false, profile = false, exact = false;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("join", "Evaluate a full conjunctive query");
  cmd->add_option("--query", o->query, "Query file")->required();
  cmd->add_option("--data", o->data, "Directory holding <relation>.csv for every atom");
  cmd->add_option("--rel", o->rels, "NAME=FILE binding, overrides --data");
  cmd->add_option("--engine", o->engine, "generic | lifted | hexagon | oracle")
      ->check(CLI::IsMember({"generic", "lifted", "hexagon", "oracle"}))
      ->capture_default_str();
  cmd->add_option("--constraints", o->constraints, "Constraint file (lifted engine)");
  cmd->add_option("--base", o->base, "Base join of the lifted engine: generic | hexagon")
      ->check(CLI::IsMember({"generic", "hexagon"}))
      ->capture_default_str();
  cmd->add_flag("--exact", o->exact, "Lifted engine: split PC atoms with the exact decomposition");
  cmd->add_option("--order", o->order, "Variable order for the generic engine, comma separated");
  cmd->add_flag("--count-only", o->count_only, "Print the output size instead of the tuples");
  cmd->add_flag("--profile", o->profile, "Report prefix-join sizes along the order (generic engine)");
  cmd->add_option("--out", o->out, "Write output tuples as CSV here instead of stdout");
  cmd->callback([o, &g] {
    const auto query = load_query(o->query);
    pcj::Instance instance;
    load_instance(instance, query, o->data.empty() ? std::nullopt : std::optional<fs::path>(o->data), o->rels);
    if (o->profile && o->engine != "generic") fail(ErrorKind::Parameter, "--profile needs --engine generic");
    std::optional<pcj::VariableOrder> order;
    if (!o->order.empty()) {
      order = pcj::parse_order(query, split_list(o->order));
      pcj::validate_order(query, *order);
    }
    json report{{"engine", o->engine}};
    std::optional<pcj::Relation> output;
    std::uint64_t count = 0;

    if (o->engine == "generic") {
      const auto ord = order ? *order : pcj::default_order(query, instance);
      report["order"] = pcj::order_names(query, ord);
      pcj::VaatProfile profile;
      if (o->count_only) {
        count = pcj::generic_join_visit(query, instance, ord, [](std::span<const pcj::Value>) {},
                                        o->profile ? &profile : nullptr);
      } else {
        output = pcj::generic_join(query, instance, ord, o->profile ? &profile : nullptr);
      }
      if (o->profile) {
        report["prefix_sizes"] = profile.sizes;
        report["max_prefix"] = profile.max();
      }
    } else if (o->engine == "oracle") {
      output = pcj::nested_loop_join_oracle(query, instance);
    } else if (o->engine == "hexagon") {
      if (!pcj::is_hexagon_shape(query)) {
        fail(ErrorKind::Parameter, "the hexagon engine needs Q(...) <- R1(A,W,B), R2(B,U,C), R3(C,V,A), R4(U,V,W)");
      }
      const auto& atoms = query.atoms();
      pcj::HexagonStats stats;
      auto raw = pcj::hexagon_join(instance.relation(atoms[0].relation), instance.relation(atoms[1].relation),
                                   instance.relation(atoms[2].relation), instance.relation(atoms[3].relation), &stats);
      std::vector<std::size_t> cols;
      for (const auto& v : query.head()) cols.push_back(raw.column_index(v));
      output = pcj::project_columns(raw, cols).renamed("Q", query.head());
      report["r4_degree"] = stats.r4_degree;
      report["r4_parts"] = stats.part_sizes;
    } else {
      if (o->constraints.empty()) fail(ErrorKind::Parameter, "--engine lifted needs --constraints");
      const auto set = load_constraint_file(o->constraints);
      for (const auto& w : set.warnings()) warn(w);
      const auto bound = set.bind(query);
      pcj::LiftedOptions options;
      options.base = o->base == "hexagon" ? pcj::LiftedBase::Hexagon : pcj::LiftedBase::Generic;
      options.exact = o->exact;
      options.jobs = g.jobs;
      options.order = order;
      auto lifted = pcj::pc_lifted_join(query, instance, bound, options);
      if (lifted.combinations.size() > 64) {
        warn(std::to_string(lifted.combinations.size()) + " family combinations; consider fewer partition constraints");
      }
      json subs = json::array();
      for (std::size_t i = 0; i < lifted.combinations.size(); ++i) {
        subs.push_back({{"choice", lifted.combinations[i]}, {"rows", lifted.sub_outputs[i].size()}});
      }
      report["combinations"] = subs;
      output = std::move(lifted.output);
    }

    if (output) count = output->size();
    report["count"] = count;
    if (o->count_only) {
      emit_json(report);
      return;
    }
    if (!o->out.empty()) {
      write_relation_file(o->out, *output, instance.catalog());
      std::cerr << report.dump() << "\n";
    } else {
      std::ostringstream csv;
      pcj::write_csv(csv, *output, instance.catalog());
      emit(csv.str());
    }
  });
}

// ---------------------------------------------------------------------------

void add_gen(CLI::App& app, const Globals&) {
  struct Opts {
    std::string family, out, families = "c0;c1";
    std::uint64_t n = 27, seed = 1, d = 1;
    std::size_t groups = 100, y_arity = 2;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("gen", "Write a generated instance: CSVs, query.txt, constraints.jsonl, manifest.json");
  cmd->add_option("--family", o->family, "mod | hexagon-dc | vaat-hard | pc-hexagon | planted")
      ->check(CLI::IsMember({"mod", "hexagon-dc", "vaat-hard", "pc-hexagon", "planted"}))
      ->required();
  cmd->add_option("--n", o->n, "Size: odd cube for mod/hexagon, 7*s^2 for vaat-hard")->capture_default_str();
  cmd->add_option("--seed", o->seed, "Seed (pc-hexagon, planted)")->capture_default_str();
  cmd->add_option("--groups", o->groups, "planted: number of Y-groups")->capture_default_str();
  cmd->add_option("--y-arity", o->y_arity, "planted: number of columns")->capture_default_str();
  cmd->add_option("--families", o->families, "planted: families over c0..c{k-1}")->capture_default_str();
  cmd->add_option("--d", o->d, "planted: target degree")->capture_default_str();
  cmd->add_option("--out", o->out, "Output directory")->required();
  cmd->callback([o] {
    const fs::path dir(o->out);
    Recorder::get().seed(o->seed);
    json expected = json::object();
    pcj::Instance inst;
    std::string query_text;
    pcj::ConstraintSet constraints;
    if (o->family == "mod") {
      inst.bind(pcj::gen_mod_relation(inst.catalog(), o->n, {"X", "Y", "Z"}, "R"));
      const auto k = pcj::odd_cube_root(o->n);
      query_text = "Q(X,Y,Z) <- R(X,Y,Z).\n";
      constraints.add({"R", {{}}, {"X", "Y", "Z"}, o->n, std::nullopt});
      constraints.add({"R", {{"X", "Y"}}, {"X", "Y", "Z"}, 1, std::nullopt});
      constraints.add({"R", {{"Y", "Z"}}, {"X", "Y", "Z"}, 1, std::nullopt});
      expected = {{"rows", o->n}, {"dc_X_XYZ", k}, {"domain_X", k * k}, {"domain_Y", k}};
    } else if (o->family == "planted") {
      std::vector<std::string> schema;
      for (std::size_t c = 0; c < o->y_arity; ++c) schema.push_back("c" + std::to_string(c));
      const pcj::Relation probe("R", schema);
      const auto fams = parse_families(o->families);
      const auto cols = family_columns(probe, fams);
      inst.bind(pcj::gen_planted_pc(inst.catalog(), o->groups, cols, o->y_arity, o->d, o->seed));
      std::string head;
      for (const auto& s : schema) head += (head.empty() ? "" : ",") + s;
      const auto& rel = inst.relations().begin()->second;
      query_text = "Q(" + head + ") <- " + rel.name() + "(" + head + ").\n";
      constraints.add({rel.name(), {{}}, schema, rel.size(), std::nullopt});
      constraints.add({rel.name(), fams, schema, o->d, std::nullopt});
      expected = {{"rows", rel.size()}, {"pc_at_most", o->d}, {"families", fams}};
    } else {
      const bool pc = o->family == "pc-hexagon";
      if (o->family == "hexagon-dc") {
        inst = pcj::gen_hexagon_hard_dc(o->n);
        expected = {{"output_exponent", "4/3"}, {"satisfies_pc", false}};
      } else if (pc) {
        inst = pcj::gen_pc_hexagon(o->n, o->seed);
        expected = {{"output_exponent_at_most", 1.15}, {"r4_pc", 1}};
      } else {
        inst = pcj::gen_vaat_hard(o->n);
        expected = {{"rows_per_relation", o->n}, {"sub_databases", 7}, {"output_linear", true}};
      }
      query_text = pcj::hexagon_query().to_string() + "\n";
      constraints = pcj::hexagon_constraints(o->n, pc || o->family == "vaat-hard");
    }
    json rels = json::array();
    for (const auto& [name, rel] : inst.relations()) {
      write_relation_file(dir / (name + ".csv"), rel, inst.catalog());
      rels.push_back({{"name", name}, {"file", name + ".csv"}, {"rows", rel.size()}, {"schema", rel.schema()}});
    }
    write_text_file(dir / "query.txt", query_text);
    std::ostringstream cs;
    pcj::write_constraints(cs, constraints);
    write_text_file(dir / "constraints.jsonl", cs.str());
    json manifest{{"family", o->family}, {"n", o->n}, {"seed", o->seed}, {"relations", rels},
                  {"query", "query.txt"}, {"constraints", "constraints.jsonl"}, {"expected", expected}};
    write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
    emit_json(manifest);
  });
}

}  // namespace pcjcli
