#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "almkit/bench.hpp"

using namespace almkit;
using namespace almkit::bench;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Everything except timing must agree between two runs of the same spec.
void require_cells_equal_modulo_time(const std::vector<CellResult>& a,
                                     const std::vector<CellResult>& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].problem == b[i].problem);
    REQUIRE(a[i].solver == b[i].solver);
    REQUIRE(a[i].status == b[i].status);
    REQUIRE(a[i].outer_iters == b[i].outer_iters);
    REQUIRE(a[i].inner_iters_total == b[i].inner_iters_total);
    if (std::isnan(a[i].f_final)) {
      REQUIRE(std::isnan(b[i].f_final));
    } else {
      REQUIRE(a[i].f_final == b[i].f_final);
    }
    REQUIRE(a[i].stat_sigma == b[i].stat_sigma);
    REQUIRE(a[i].feas_theta == b[i].feas_theta);
    REQUIRE(a[i].rho_final == b[i].rho_final);
    REQUIRE(a[i].trace.size() == b[i].trace.size());
  }
}
}  // namespace

TEST_CASE("performance profile on a hand matrix", "[bench][profile]") {
  const std::vector<std::vector<double>> t = {{1.0, 2.0}, {3.0, 1.0}};
  const ProfileResult pr = perf_profile(t, {"s1", "s2"}, 2.0);

  REQUIRE(pr.problems_used == 2);
  REQUIRE(pr.rows_excluded == 0);
  REQUIRE(pr.curves.size() == 2);

  // each solver wins one problem, so both start at one half
  REQUIRE(pr.curves[0].value(0.0) == 0.5);
  REQUIRE(pr.curves[1].value(0.0) == 0.5);
  // solver one is within a factor two everywhere
  REQUIRE(pr.curves[0].value(1.0) == 1.0);
  // solver two needs log2(3) to cover its losing problem — exactly
  const double l3 = std::log2(3.0);
  REQUIRE(pr.curves[1].value(l3) == 1.0);
  REQUIRE(pr.curves[1].value(std::nextafter(l3, 0.0)) == 0.5);

  // the sampled grid spans [0, tau_max] and ends at full coverage
  REQUIRE(pr.curves[0].samples.front().first == 0.0);
  REQUIRE(pr.curves[0].samples.back().first == 2.0);
  REQUIRE(pr.curves[0].samples.back().second == 1.0);
}

TEST_CASE("profiles are invariant to per-problem rescaling",
          "[bench][profile]") {
  Rng rng(99);
  const std::size_t S = 3, P = 8;
  std::vector<std::vector<double>> t(S, std::vector<double>(P));
  for (auto& row : t)
    for (auto& v : row) v = std::exp(rng.normal());

  std::vector<std::vector<double>> scaled = t;
  for (std::size_t p = 0; p < P; ++p) {
    const double c = std::ldexp(1.0, rng.uniform_int(-3, 3));
    for (std::size_t s = 0; s < S; ++s) scaled[s][p] = c * t[s][p];
  }

  const ProfileResult a = perf_profile(t, {"a", "b", "c"}, 4.0);
  const ProfileResult b = perf_profile(scaled, {"a", "b", "c"}, 4.0);
  for (std::size_t s = 0; s < S; ++s) {
    REQUIRE(a.curves[s].log2_ratios.size() == b.curves[s].log2_ratios.size());
    for (std::size_t i = 0; i < a.curves[s].log2_ratios.size(); ++i)
      REQUIRE(a.curves[s].log2_ratios[i] == b.curves[s].log2_ratios[i]);
  }
}

TEST_CASE("profile failure handling", "[bench][profile]") {
  SECTION("problems every solver fails are excluded from the denominator") {
    const std::vector<std::vector<double>> t = {{1.0, kInf, 2.0},
                                                {2.0, kNaN, kInf}};
    const ProfileResult pr = perf_profile(t, {"s1", "s2"}, 8.0);
    REQUIRE(pr.problems_used == 2);
    REQUIRE(pr.rows_excluded == 1);
    // the terminal curve value is each solver's success fraction
    REQUIRE(pr.curves[0].value(1e9) == 1.0);
    REQUIRE(pr.curves[1].value(1e9) == 0.5);
  }
  SECTION("nonpositive metrics count as failures too") {
    const std::vector<std::vector<double>> t = {{0.0, 1.0}, {1.0, 1.0}};
    const ProfileResult pr = perf_profile(t, {"s1", "s2"}, 2.0);
    REQUIRE(pr.problems_used == 2);
    REQUIRE(pr.curves[0].value(1e9) == 0.5);
  }
  SECTION("validation") {
    REQUIRE_THROWS_AS(perf_profile({}, {}, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(perf_profile({{1.0}, {1.0, 2.0}}, {"a", "b"}, 1.0),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(perf_profile({{1.0}}, {"a", "b"}, 1.0),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(perf_profile({{1.0}}, {"a"}, 0.0),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(perf_profile({{1.0}}, {"a"}, 1.0, 1),
                      std::invalid_argument);
  }
}

TEST_CASE("profile assembly from finished cells", "[bench][profile]") {
  std::vector<CellResult> cells;
  auto cell = [&](const std::string& p, const std::string& s,
                  const std::string& status, double ms, long inner) {
    CellResult c;
    c.problem = p;
    c.solver = s;
    c.status = status;
    c.wall_ms = ms;
    c.inner_iters_total = inner;
    cells.push_back(c);
  };
  cell("p1", "fast", "converged", 1.0, 10);
  cell("p1", "slow", "converged", 4.0, 80);
  cell("p2", "fast", "max_outer", 1.0, 10);  // failure despite low cost
  cell("p2", "slow", "converged", 2.0, 20);

  const ProfileResult pt = profile_from_cells(cells, "time", 8.0);
  REQUIRE(pt.problems_used == 2);
  REQUIRE(pt.curves[0].solver == "fast");
  REQUIRE(pt.curves[0].value(0.0) == 0.5);   // wins p1, fails p2
  REQUIRE(pt.curves[0].value(1e9) == 0.5);
  REQUIRE(pt.curves[1].value(2.0) == 1.0);   // within 4x on p1, wins p2

  const ProfileResult pi = profile_from_cells(cells, "inner_iters", 8.0);
  REQUIRE(pi.curves[1].value(3.0) == 1.0);  // 80/10 = 8 = 2^3 on p1

  REQUIRE_THROWS_AS(profile_from_cells(cells, "energy", 8.0),
                    std::invalid_argument);
}

TEST_CASE("results CSV round-trips bit for bit", "[bench][io]") {
  std::vector<CellResult> cells(2);
  cells[0].problem = "lp-a";
  cells[0].solver = "alm-bb";
  cells[0].status = "converged";
  cells[0].outer_iters = 7;
  cells[0].inner_iters_total = 1234;
  cells[0].f_final = -0.12345678901234567;
  cells[0].stat_sigma = 3.5e-11;
  cells[0].feas_theta = 1.0 / 3.0;
  cells[0].rho_final = 1e6;
  cells[0].wall_ms = 12.5;
  cells[1].problem = "lp-b";
  cells[1].solver = "alm-nag";
  cells[1].status = "error";
  cells[1].f_final = kNaN;
  cells[1].stat_sigma = kInf;
  cells[1].feas_theta = -kInf;
  cells[1].rho_final = 2.0;

  const std::string text = results_csv(cells);
  const std::vector<CellResult> back = parse_results_csv(text);
  REQUIRE(back.size() == 2);
  REQUIRE(back[0].problem == "lp-a");
  REQUIRE(back[0].solver == "alm-bb");
  REQUIRE(back[0].status == "converged");
  REQUIRE(back[0].outer_iters == 7);
  REQUIRE(back[0].inner_iters_total == 1234);
  REQUIRE(back[0].f_final == cells[0].f_final);
  REQUIRE(back[0].stat_sigma == cells[0].stat_sigma);
  REQUIRE(back[0].feas_theta == cells[0].feas_theta);
  REQUIRE(back[0].rho_final == cells[0].rho_final);
  REQUIRE(back[0].wall_ms == cells[0].wall_ms);
  REQUIRE(std::isnan(back[1].f_final));
  REQUIRE(back[1].stat_sigma == kInf);
  REQUIRE(back[1].feas_theta == -kInf);

  REQUIRE_THROWS_AS(parse_results_csv(""), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_results_csv("wrong,header\n1,2\n"),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(
      parse_results_csv(std::string(kResultsHeader) + "\nonly,three,cols\n"),
      std::invalid_argument);
}

TEST_CASE("trace emission", "[bench][io]") {
  std::vector<IterRecord> tr(2);
  tr[0].k = 0;
  tr[0].f_val = 1.5;
  tr[0].sigma = 0.25;
  tr[0].theta = 0.125;
  tr[0].rho = 2.0;
  tr[0].inner_iters = 11;
  tr[1].k = 1;
  tr[1].f_val = 0.75;
  tr[1].sigma = 0.1;
  tr[1].theta = 0.01;
  tr[1].rho = 2.0;
  tr[1].inner_iters = 9;

  const std::string csv = trace_csv(tr);
  std::istringstream is(csv);
  std::string line;
  REQUIRE(std::getline(is, line));
  REQUIRE(line == std::string(kTraceHeader));
  int rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    ++rows;
    REQUIRE(std::count(line.begin(), line.end(), ',') == 6);
  }
  REQUIRE(rows == 2);

  const std::string pd = plot_data(tr);
  REQUIRE(pd.rfind("# k f sigma theta rho inner_iters wall_ms", 0) == 0);
  REQUIRE(std::count(pd.begin(), pd.end(), '\n') == 3);  // header + two rows
}

TEST_CASE("suite files round-trip", "[bench][io]") {
  RunSpec spec;
  spec.seed = 20260817;
  spec.budgets.max_outer = 40;
  spec.budgets.max_inner = 500;
  spec.budgets.wall_ms = 123.0;
  ProblemSpec ps;
  ps.kind = "lp";
  ps.name = "lp-tiny";
  ps.params = {{"n", 4.0}, {"m", 2.0}};
  spec.problems.push_back(ps);
  SolverSpec ss;
  ss.name = "alm-bb";
  ss.params = {{"rho0", 2.0}};
  spec.solvers.push_back(ss);

  const std::string text = suite_to_json(spec);
  const RunSpec back = parse_suite(text);
  REQUIRE(back.seed == spec.seed);
  REQUIRE(back.budgets.max_outer == 40);
  REQUIRE(back.budgets.max_inner == 500);
  REQUIRE(back.budgets.wall_ms == 123.0);
  REQUIRE(back.problems.size() == 1);
  REQUIRE(back.problems[0].kind == "lp");
  REQUIRE(back.problems[0].name == "lp-tiny");
  REQUIRE(back.problems[0].params.at("n") == 4.0);
  REQUIRE(back.solvers.size() == 1);
  REQUIRE(back.solvers[0].params.at("rho0") == 2.0);

  // solvers may be given as bare strings; problems get names assigned
  const RunSpec lax = parse_suite(
      R"({"problems":[{"kind":"toy"}],"solvers":["alm-bb","alm-nag"]})");
  REQUIRE(lax.problems[0].name == "toy-0");
  REQUIRE(lax.solvers.size() == 2);
  REQUIRE(lax.solvers[1].name == "alm-nag");

  REQUIRE_THROWS_AS(parse_suite("this is not json"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_suite(R"({"solvers":["alm-bb"]})"),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(
      parse_suite(R"({"problems":[{"name":"x"}],"solvers":["alm-bb"]})"),
      std::invalid_argument);
}

TEST_CASE("spec validation happens before any solve", "[bench][runner]") {
  RunSpec spec;
  spec.seed = 1;
  ProblemSpec ps;
  ps.kind = "toy";
  ps.name = "t";
  spec.problems.push_back(ps);
  SolverSpec ss;
  ss.name = "no-such-solver";
  spec.solvers.push_back(ss);
  REQUIRE_THROWS_WITH(run_suite(spec), Catch::Matchers::ContainsSubstring(
                                           "unknown solver"));

  spec.solvers[0].name = "alm-bb";
  spec.solvers.push_back(spec.solvers[0]);  // duplicate
  REQUIRE_THROWS_AS(run_suite(spec), std::invalid_argument);

  spec.solvers.pop_back();
  spec.problems.push_back(spec.problems[0]);  // duplicate problem name
  REQUIRE_THROWS_AS(run_suite(spec), std::invalid_argument);

  RunSpec empty;
  REQUIRE_THROWS_AS(validate_spec(empty), std::invalid_argument);
}

TEST_CASE("instance construction is seed- and name-deterministic",
          "[bench][runner]") {
  ProblemSpec ps;
  ps.kind = "lp";
  ps.name = "alpha";
  ps.params = {{"n", 5.0}, {"m", 2.0}};

  const Instance a = build_instance(ps, 7);
  const Instance b = build_instance(ps, 7);
  const CompositeProblem& pa = *as_composite(a);
  const CompositeProblem& pb = *as_composite(b);
  const Vec probe = Vec::LinSpaced(5, -1.0, 1.0);
  REQUIRE((pa.A.apply(probe) - pb.A.apply(probe)).norm() == 0.0);
  REQUIRE((pa.f.grad(probe) - pb.f.grad(probe)).norm() == 0.0);
  REQUIRE((a.x0 - b.x0).norm() == 0.0);

  // a different name or seed draws a different generator stream
  ProblemSpec ps2 = ps;
  ps2.name = "beta";
  const Instance c = build_instance(ps2, 7);
  REQUIRE((pa.f.grad(probe) - as_composite(c)->f.grad(probe)).norm() > 0.0);
  const Instance d = build_instance(ps, 8);
  REQUIRE((pa.f.grad(probe) - as_composite(d)->f.grad(probe)).norm() > 0.0);

  ProblemSpec bad;
  bad.kind = "mystery";
  bad.name = "m";
  REQUIRE_THROWS_AS(build_instance(bad, 1), std::invalid_argument);
}

TEST_CASE("suite runs are deterministic and job-count independent",
          "[bench][runner]") {
  RunSpec spec;
  spec.seed = 4242;
  spec.budgets.max_outer = 40;
  spec.budgets.max_inner = 4000;
  auto add_prob = [&](const std::string& kind, const std::string& name,
                      std::map<std::string, double> params) {
    ProblemSpec ps;
    ps.kind = kind;
    ps.name = name;
    ps.params = std::move(params);
    spec.problems.push_back(std::move(ps));
  };
  add_prob("toy", "toy-0", {});
  add_prob("lp", "lp-tiny", {{"n", 4.0}, {"m", 2.0}});
  add_prob("lasso", "lasso-tiny", {{"m", 8.0}, {"n", 12.0}});
  SolverSpec bb;
  bb.name = "alm-bb";
  spec.solvers.push_back(bb);
  SolverSpec pg;
  pg.name = "alm-proxgrad";
  spec.solvers.push_back(pg);

  const SuiteResult r1 = run_suite(spec, 1);
  const SuiteResult r2 = run_suite(spec, 1);
  require_cells_equal_modulo_time(r1.cells, r2.cells);

  const SuiteResult r3 = run_suite(spec, 2);
  require_cells_equal_modulo_time(r1.cells, r3.cells);

  // cells arrive problems-major in spec order
  REQUIRE(r1.cells.size() == 6);
  REQUIRE(r1.cells[0].problem == "toy-0");
  REQUIRE(r1.cells[0].solver == "alm-bb");
  REQUIRE(r1.cells[1].solver == "alm-proxgrad");
  REQUIRE(r1.cells[2].problem == "lp-tiny");

  // the toy problem must actually be solved, traces recorded
  REQUIRE(r1.cells[0].status == "converged");
  REQUIRE(!r1.cells[0].trace.empty());
  REQUIRE(r1.cells[0].outer_iters ==
          static_cast<long>(r1.cells[0].trace.size()));
}

TEST_CASE("registry covers primal-dual and discrete solvers",
          "[bench][runner]") {
  SECTION("a primal-dual cell on a tiny planted recovery") {
    RunSpec spec;
    spec.seed = 11;
    spec.budgets.max_inner = 30000;
    ProblemSpec ps;
    ps.kind = "bp";
    ps.name = "bp-tiny";
    ps.params = {{"m", 6.0}, {"n", 12.0}, {"k", 2.0}, {"d", 0.0}};
    spec.problems.push_back(ps);
    SolverSpec ss;
    ss.name = "updf-cp";
    ss.params = {{"tau", 0.45}, {"sigma", 0.45}, {"rho", 1.0}, {"tol", 1e-7}};
    spec.solvers.push_back(ss);
    const SuiteResult res = run_suite(spec);
    REQUIRE(res.cells.size() == 1);
    const CellResult& c = res.cells[0];
    REQUIRE(c.status == "converged");
    REQUIRE(std::isfinite(c.rel_err));  // planted problems report recovery
    REQUIRE(c.rel_err <= 1e-5);
    // trace rows are strided checkpoints, monotone in k
    for (std::size_t i = 1; i < c.trace.size(); ++i)
      REQUIRE(c.trace[i].k > c.trace[i - 1].k);
  }
  SECTION("a discrete cell through the block-coordinate path") {
    RunSpec spec;
    spec.seed = 5;
    ProblemSpec ps;
    ps.kind = "ip";
    ps.name = "ip-tiny";
    ps.params = {{"blocks", 2.0}, {"block_dim", 3.0}, {"m", 2.0}};
    spec.problems.push_back(ps);
    SolverSpec ss;
    ss.name = "bcd-classical";
    spec.solvers.push_back(ss);
    const SuiteResult res = run_suite(spec);
    REQUIRE(res.cells[0].status == "converged");
  }
  SECTION("class mismatches surface as error cells, not crashes") {
    RunSpec spec;
    spec.seed = 3;
    ProblemSpec ps;
    ps.kind = "toy";
    ps.name = "t";
    spec.problems.push_back(ps);
    SolverSpec ss;
    ss.name = "updf-gda";  // needs a composite problem
    spec.solvers.push_back(ss);
    const SuiteResult res = run_suite(spec);
    REQUIRE(res.cells[0].status == "error");
    REQUIRE(!res.cells[0].note.empty());
  }
}

TEST_CASE("default suites are valid and kind-specific", "[bench][runner]") {
  for (const std::string kind :
       {"bp", "lp", "qp", "ip", "sdp", "portfolio"}) {
    const RunSpec spec = default_suite(kind, 123);
    REQUIRE(spec.seed == 123);
    REQUIRE(!spec.problems.empty());
    REQUIRE(!spec.solvers.empty());
    validate_spec(spec);  // registered solvers, unique names
    for (const auto& p : spec.problems) REQUIRE(p.kind == kind);
  }
  REQUIRE_THROWS_AS(default_suite("vertex-cover", 1), std::invalid_argument);
}

TEST_CASE("parameter lookup helper", "[bench][runner]") {
  std::map<std::string, double> m = {{"rho", 2.5}};
  REQUIRE(param_or(m, "rho", 1.0) == 2.5);
  REQUIRE(param_or(m, "tau", 0.7) == 0.7);
}
