// alm-bench: batch solver benchmarking for the toolkit.
//
//   alm-bench run     --suite <path> --out <dir> --seed <u64> [--jobs N]
//                     [--solvers name,...]
//   alm-bench profile --in <results.csv> --metric {time|inner_iters}
//                     --tau-max <float> --out <path>
//   alm-bench gen     --kind {bp|lp|qp|ip|sdp|portfolio} --seed <u64>
//                     --out <path>
//
// `run` executes every (problem, solver) cell of a suite file and writes
// results.csv / results.json plus one trace CSV per cell.  `profile` turns a
// results.csv into performance-profile curves in a plot-friendly columnar
// file.  `gen` writes a ready-made suite file for one problem family.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "almkit/almkit.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, ','))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

int cmd_run(const std::string& suite_path, const std::string& out_dir,
            std::uint64_t seed, int jobs, const std::string& solvers_csv) {
  almkit::bench::RunSpec spec = almkit::bench::parse_suite(slurp(suite_path));
  spec.seed = seed;

  if (!solvers_csv.empty()) {
    const std::vector<std::string> want = split_csv_list(solvers_csv);
    std::vector<almkit::bench::SolverSpec> kept;
    for (const std::string& name : want) {
      bool found = false;
      for (const auto& s : spec.solvers)
        if (s.name == name) {
          kept.push_back(s);
          found = true;
          break;
        }
      if (!found)
        throw std::invalid_argument("--solvers names '" + name +
                                    "' which is not in the suite");
    }
    spec.solvers = std::move(kept);
  }

  const almkit::bench::SuiteResult res = almkit::bench::run_suite(spec, jobs);
  almkit::bench::write_outputs(out_dir, res);

  std::printf("%-16s %-14s %-20s %12s %10s\n", "problem", "solver", "status",
              "f_final", "wall_ms");
  for (const auto& c : res.cells)
    std::printf("%-16s %-14s %-20s %12.5g %10.1f\n", c.problem.c_str(),
                c.solver.c_str(), c.status.c_str(), c.f_final, c.wall_ms);
  std::printf("wrote %zu cells to %s\n", res.cells.size(), out_dir.c_str());
  return 0;
}

int cmd_profile(const std::string& in_path, const std::string& metric,
                double tau_max, const std::string& out_path) {
  const std::vector<almkit::bench::CellResult> cells =
      almkit::bench::parse_results_csv(slurp(in_path));
  const almkit::bench::ProfileResult pr =
      almkit::bench::profile_from_cells(cells, metric, tau_max);

  std::ostringstream os;
  os << "# tau";
  for (const auto& c : pr.curves) os << " " << c.solver;
  os << "\n";
  if (!pr.curves.empty()) {
    const std::size_t grid = pr.curves.front().samples.size();
    char buf[64];
    for (std::size_t g = 0; g < grid; ++g) {
      std::snprintf(buf, sizeof buf, "%.10g", pr.curves.front().samples[g].first);
      os << buf;
      for (const auto& c : pr.curves) {
        std::snprintf(buf, sizeof buf, "%.10g", c.samples[g].second);
        os << " " << buf;
      }
      os << "\n";
    }
  }
  almkit::bench::write_text_file(out_path, os.str());
  std::printf("profile on '%s': %lld problems used, %lld all-fail rows "
              "excluded, %zu curves -> %s\n",
              metric.c_str(), static_cast<long long>(pr.problems_used),
              static_cast<long long>(pr.rows_excluded), pr.curves.size(),
              out_path.c_str());
  return 0;
}

int cmd_gen(const std::string& kind, std::uint64_t seed,
            const std::string& out_path) {
  const almkit::bench::RunSpec spec = almkit::bench::default_suite(kind, seed);
  almkit::bench::write_text_file(out_path, almkit::bench::suite_to_json(spec));
  std::printf("wrote %s suite (%zu problems x %zu solvers) to %s\n",
              kind.c_str(), spec.problems.size(), spec.solvers.size(),
              out_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"augmented-Lagrangian solver benchmark harness"};
  app.require_subcommand(1);

  std::string suite_path, out_dir, solvers_csv;
  std::uint64_t seed = 0;
  int jobs = 1;
  CLI::App* run = app.add_subcommand("run", "execute a suite file");
  run->add_option("--suite", suite_path, "suite JSON file")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--seed", seed, "master seed")->required();
  run->add_option("--jobs", jobs, "worker threads")->check(CLI::Range(1, 256));
  run->add_option("--solvers", solvers_csv,
                  "comma-separated subset of the suite's solvers");

  std::string in_path, metric = "time", prof_out;
  double tau_max = 8.0;
  CLI::App* prof = app.add_subcommand("profile", "performance profile");
  prof->add_option("--in", in_path, "results.csv from a run")->required();
  prof->add_option("--metric", metric, "time or inner_iters")
      ->check(CLI::IsMember({"time", "inner_iters"}));
  prof->add_option("--tau-max", tau_max, "log2 ratio grid end")->required();
  prof->add_option("--out", prof_out, "columnar output file")->required();

  std::string kind, gen_out;
  std::uint64_t gen_seed = 0;
  CLI::App* gen = app.add_subcommand("gen", "write a default suite file");
  gen->add_option("--kind", kind, "bp|lp|qp|ip|sdp|portfolio")->required();
  gen->add_option("--seed", gen_seed, "suite seed")->required();
  gen->add_option("--out", gen_out, "suite file to write")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(suite_path, out_dir, seed, jobs, solvers_csv);
    if (prof->parsed()) return cmd_profile(in_path, metric, tau_max, prof_out);
    if (gen->parsed()) return cmd_gen(kind, gen_seed, gen_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
