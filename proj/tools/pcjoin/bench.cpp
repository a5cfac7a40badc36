#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "commands.hpp"
#include "common.hpp"
#include "pcjoin/bounds.hpp"
#include "pcjoin/decomposition.hpp"
#include "pcjoin/error.hpp"
#include "pcjoin/fit.hpp"
#include "pcjoin/generators.hpp"
#include "pcjoin/hexagon.hpp"
#include "pcjoin/join.hpp"

namespace pcjcli {

using pcj::ErrorKind;
using pcj::fail;

namespace {

struct Point {
  std::string series;
  std::uint64_t n = 0;
  double size = 0;
  double seconds = 0;
};

// One measurement: returns the size column, and the timed region is the call.
using Probe = std::function<double()>;

double timed(int repeat, const Probe& probe, double& size) {
  double best = 1e300;
  for (int r = 0; r < repeat; ++r) {
    Stopwatch sw;
    size = probe();
    best = std::min(best, sw.seconds());
  }
  return best;
}

pcj::Relation random_binary(pcj::Catalog& catalog, std::uint64_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ n);
  std::vector<pcj::Value> data;
  const std::uint64_t dom = std::max<std::uint64_t>(1, n / 4);
  for (std::uint64_t i = 0; i < n; ++i) {
    data.push_back(catalog.intern("a" + std::to_string(rng() % dom)));
    data.push_back(catalog.intern("b" + std::to_string(rng() % dom)));
  }
  return pcj::Relation("R", {"A", "B"}, std::move(data));
}

double bound_value(std::uint64_t n, bool with_pc) {
  const auto q = pcj::hexagon_query();
  const auto bound = pcj::hexagon_constraints(n, with_pc).bind(q);
  const pcj::ChainEstimator chain;
  return pcj::extended_bound(q, bound, chain).value.to_double();
}

// Builds the work items of a sweep; each item yields one point.
std::vector<std::function<Point()>> plan(const std::string& sweep, const std::vector<std::uint64_t>& sizes,
                                         int repeat, std::uint64_t seed) {
  std::vector<std::function<Point()>> items;
  for (auto n : sizes) {
    if (sweep == "decompose") {
      for (std::string algo : {"approx", "exact"}) {
        items.push_back([=] {
          pcj::Catalog catalog;
          const auto r = random_binary(catalog, n, seed);
          const std::vector<pcj::ColumnSet> fams = {pcj::column_bit(0), pcj::column_bit(1)};
          Point p{algo, n};
          p.seconds = timed(repeat, [&] {
            auto parts = algo == "approx" ? pcj::decompose_approx(r, fams, 3) : pcj::decompose_exact(r, fams, 3);
            return static_cast<double>(parts.achieved_degree);
          }, p.size);
          p.size = static_cast<double>(r.size());
          return p;
        });
      }
    } else if (sweep == "hexagon") {
      pcj::odd_cube_root(n);
      for (std::string engine : {"hexagon", "generic"}) {
        items.push_back([=] {
          const auto inst = pcj::gen_pc_hexagon(n, seed);
          Point p{engine, n};
          p.seconds = timed(repeat, [&] {
            if (engine == "hexagon") {
              return static_cast<double>(pcj::hexagon_join(inst.relation("R1"), inst.relation("R2"),
                                                           inst.relation("R3"), inst.relation("R4"))
                                             .size());
            }
            return static_cast<double>(pcj::generic_join(pcj::hexagon_query(), inst).size());
          }, p.size);
          return p;
        });
      }
    } else if (sweep == "bound") {
      pcj::odd_cube_root(n);
      for (std::string series : {"dc", "pc"}) {
        items.push_back([=] {
          Point p{series, n};
          p.seconds = timed(repeat, [&] { return bound_value(n, series == "pc"); }, p.size);
          return p;
        });
      }
    } else if (sweep == "output") {
      pcj::odd_cube_root(n);
      for (std::string series : {"hexagon-dc", "pc-hexagon"}) {
        items.push_back([=] {
          const auto inst = series == "pc-hexagon" ? pcj::gen_pc_hexagon(n, seed) : pcj::gen_hexagon_hard_dc(n);
          const auto q = pcj::hexagon_query();
          const auto order = pcj::default_order(q, inst);
          Point p{series, n};
          p.seconds = timed(repeat, [&] {
            return static_cast<double>(pcj::generic_join_visit(q, inst, order, [](std::span<const pcj::Value>) {}));
          }, p.size);
          return p;
        });
      }
    } else {
      fail(ErrorKind::Parameter, "unknown sweep '" + sweep + "'");
    }
  }
  return items;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

}  // namespace

void add_bench(CLI::App& app, const Globals& g) {
  struct Opts {
    std::string sweep = "decompose", sizes, out;
    int repeat = 3;
    std::uint64_t seed = 1;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("bench", "Scaling sweep; CSV of points plus least-squares power-law fits");
  cmd->add_option("--sweep", o->sweep, "decompose | hexagon | bound | output")
      ->check(CLI::IsMember({"decompose", "hexagon", "bound", "output"}))
      ->capture_default_str();
  cmd->add_option("--sizes", o->sizes, "Comma separated n values (defaults depend on the sweep)");
  cmd->add_option("--repeat", o->repeat, "Runs per point; the fastest is kept")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--seed", o->seed, "Generator seed")->capture_default_str();
  cmd->add_option("--out", o->out, "CSV path (default: stdout)");
  cmd->callback([o, &g] {
    Recorder::get().seed(o->seed);
    std::vector<std::uint64_t> sizes;
    if (o->sizes.empty()) {
      if (o->sweep == "decompose") sizes = {10000, 30000, 100000};
      if (o->sweep == "hexagon") sizes = {9261, 19683, 35937};
      if (o->sweep == "bound") sizes = {27, 125, 343, 729, 1331, 2197};
      if (o->sweep == "output") sizes = {27, 125, 343, 729};
    } else {
      for (const auto& s : split_list(o->sizes)) {
        try {
          sizes.push_back(std::stoull(s));
        } catch (const std::exception&) {
          fail(ErrorKind::Parse, "bad size '" + s + "'");
        }
      }
    }
    const auto items = plan(o->sweep, sizes, o->repeat, o->seed);
    std::vector<Point> points(items.size());
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(std::max<std::size_t>(1, g.jobs));
    const auto worker = [&](std::size_t w) {
      try {
        for (std::size_t i; (i = next.fetch_add(1)) < items.size();) points[i] = items[i]();
      } catch (...) {
        errors[w] = std::current_exception();
      }
    };
    if (g.jobs <= 1) {
      worker(0);
    } else {
      std::vector<std::thread> threads;
      for (std::size_t w = 0; w < g.jobs; ++w) threads.emplace_back(worker, w);
      for (auto& t : threads) t.join();
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }

    std::ostringstream csv;
    csv << "record,sweep,series,n,size,seconds,exponent,residual\n";
    std::vector<std::string> series;
    for (const auto& p : points) {
      csv << "point," << o->sweep << "," << p.series << "," << p.n << "," << fmt(p.size) << "," << fmt(p.seconds) << ",,\n";
      if (std::find(series.begin(), series.end(), p.series) == series.end()) series.push_back(p.series);
    }
    for (const auto& s : series) {
      std::vector<double> x, t, y;
      for (const auto& p : points) {
        if (p.series != s) continue;
        x.push_back(static_cast<double>(p.n));
        t.push_back(std::max(p.seconds, 1e-9));
        y.push_back(p.size);
      }
      if (x.size() < 2) continue;
      const auto ft = pcj::fit_power_law(x, t);
      csv << "fit-seconds," << o->sweep << "," << s << ",,,," << fmt(ft.exponent) << "," << fmt(ft.residual) << "\n";
      if (std::all_of(y.begin(), y.end(), [](double v) { return v > 0; })) {
        const auto fy = pcj::fit_power_law(x, y);
        csv << "fit-size," << o->sweep << "," << s << ",,,," << fmt(fy.exponent) << "," << fmt(fy.residual) << "\n";
      }
    }
    if (o->out.empty()) {
      Recorder::get().volatile_stdout();
      emit(csv.str());
    } else {
      write_text_file(o->out, csv.str(), false);
    }
  });
}

}  // namespace pcjcli
