#pragma once

// Benchmark harness: declarative suites of (problem, solver) cells, a
// deterministic runner, performance profiles, and stable CSV/JSON emission.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "numcore.hpp"
#include "prox.hpp"
#include "alfn.hpp"
#include "subsolve.hpp"
#include "alm.hpp"
#include "variants.hpp"
#include "problems.hpp"

#include "json.hpp"

namespace almkit {
namespace bench {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Suite description
// ---------------------------------------------------------------------------

struct Budgets {
  long max_outer = 100;
  long max_inner = 2000;
  double wall_ms = 10000.0;  // advisory per-cell budget, recorded not enforced
};

struct ProblemSpec {
  std::string kind;                      // bp | lp | qp | ip | sdp | portfolio | lasso | lasso-dual | toy
  std::string name;                      // unique within the suite
  std::map<std::string, double> params;  // generator knobs, all numeric
};

struct SolverSpec {
  std::string name;                      // registry key
  std::map<std::string, double> params;  // solver knobs, all numeric
};

struct RunSpec {
  std::uint64_t seed = 0;
  Budgets budgets;
  std::vector<ProblemSpec> problems;
  std::vector<SolverSpec> solvers;
};

inline double param_or(const std::map<std::string, double>& m,
                       const std::string& key, double dflt) {
  auto it = m.find(key);
  return it == m.end() ? dflt : it->second;
}

// ---------------------------------------------------------------------------
// Cell results
// ---------------------------------------------------------------------------

struct CellResult {
  std::string problem;
  std::string solver;
  std::string status;  // converged | max_outer | inner_stalled |
                       // infeasible_suspected | error
  long outer_iters = 0;
  long inner_iters_total = 0;
  double f_final = std::numeric_limits<double>::quiet_NaN();
  double stat_sigma = std::numeric_limits<double>::quiet_NaN();
  double feas_theta = std::numeric_limits<double>::quiet_NaN();
  double rho_final = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;
  double rel_err = std::numeric_limits<double>::quiet_NaN();  // planted only
  std::string note;                                           // error detail
  std::vector<IterRecord> trace;

  bool failed() const { return status != "converged"; }
};

inline std::string status_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxOuter: return "max_outer";
    case SolveStatus::InnerStalled: return "inner_stalled";
    case SolveStatus::InfeasibleSuspected: return "infeasible_suspected";
  }
  return "error";
}

namespace detail {

inline void fill_from_report(CellResult& cell, const SolveReport& rep) {
  cell.status = status_string(rep.status);
  cell.trace = rep.trace;
  cell.outer_iters = static_cast<long>(rep.trace.size());
  cell.inner_iters_total = 0;
  for (const auto& row : rep.trace) cell.inner_iters_total += row.inner_iters;
  if (!rep.trace.empty()) {
    const IterRecord& last = rep.trace.back();
    cell.f_final = last.f_val;
    cell.stat_sigma = last.sigma;
    cell.feas_theta = last.theta;
    cell.rho_final = last.rho;
  } else {
    cell.rho_final = rep.rho;
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Instance construction (deterministic per problem name)
// ---------------------------------------------------------------------------

inline Instance build_instance(const ProblemSpec& ps, std::uint64_t suite_seed) {
  Rng rng(mix_seed(suite_seed, "prob/" + ps.name));
  const auto& P = ps.params;

  if (ps.kind == "toy") {
    Instance inst = toy_nlp();
    inst.name = ps.name;
    return inst;
  }
  if (ps.kind == "bp") {
    const Index m = static_cast<Index>(param_or(P, "m", 32));
    const Index n = static_cast<Index>(param_or(P, "n", 128));
    const Index k = static_cast<Index>(param_or(P, "k", 4));
    const double d = param_or(P, "d", 20.0);
    Instance inst = basis_pursuit_instance(rng, m, n, k, d);
    inst.name = ps.name;
    return inst;
  }
  if (ps.kind == "lasso" || ps.kind == "lasso-dual") {
    const Index m = static_cast<Index>(param_or(P, "m", 20));
    const Index n = static_cast<Index>(param_or(P, "n", 50));
    const double gamma_rel = param_or(P, "gamma_rel", 0.1);
    Mat A(m, n);
    for (Index i = 0; i < m; ++i)
      A.row(i) = rng.gaussian(n).transpose() / std::sqrt(double(m));
    Vec xs = Vec::Zero(n);
    const Index nnz = std::max<Index>(1, n / 10);
    for (Index t = 0; t < nnz; ++t)
      xs[rng.uniform_int(0, static_cast<int>(n) - 1)] = rng.normal();
    const Vec b = A * xs + 0.01 * rng.gaussian(m);
    const double gamma = gamma_rel * (A.transpose() * b).cwiseAbs().maxCoeff();
    Instance inst = (ps.kind == "lasso") ? lasso(A, b, gamma)
                                         : lasso_dual(A, b, gamma);
    inst.name = ps.name;
    return inst;
  }
  if (ps.kind == "lp") {
    const Index n = static_cast<Index>(param_or(P, "n", 6));
    const Index m = static_cast<Index>(param_or(P, "m", 3));
    const Vec c = rng.gaussian(n);
    Mat A(m, n);
    for (Index i = 0; i < m; ++i) A.row(i) = rng.gaussian(n).transpose();
    const Vec lk = Vec::Constant(n, -1.0), uk = Vec::Constant(n, 1.0);
    Vec xt(n);
    for (Index j = 0; j < n; ++j) xt[j] = rng.uniform(-1.0, 1.0);
    const Vec mid = A * xt;
    const Vec lq = mid.array() - 0.5, uq = mid.array() + 0.5;
    Instance inst = lp_box(c, A, lq, uq, lk, uk);
    inst.name = ps.name;
    return inst;
  }
  if (ps.kind == "qp") {
    const Index n = static_cast<Index>(param_or(P, "n", 10));
    const Index m = static_cast<Index>(param_or(P, "m", 4));
    QpBox qb = qp_box(rng, n, m);
    qb.inst.name = ps.name;
    return qb.inst;
  }
  if (ps.kind == "ip") {
    const Index pb = static_cast<Index>(param_or(P, "blocks", 3));
    const Index nj = static_cast<Index>(param_or(P, "block_dim", 4));
    const Index m = static_cast<Index>(param_or(P, "m", 3));
    Instance inst = ip_block_toy(rng, pb, nj, m);
    inst.name = ps.name;
    return inst;
  }
  if (ps.kind == "sdp") {
    const Index n = static_cast<Index>(param_or(P, "n", 6));
    const Index m = static_cast<Index>(param_or(P, "m", 3));
    require(m >= 1, "sdp spec: need m >= 1 constraints");
    // Planted strictly feasible point keeps the problem solvable; the trace
    // constraint keeps it bounded.
    Mat V(n, n);
    for (Index i = 0; i < n; ++i) V.row(i) = rng.gaussian(n).transpose();
    const Mat Xhat = V * V.transpose() / double(n) + 0.1 * Mat::Identity(n, n);
    std::vector<Mat> As;
    As.push_back(Mat::Identity(n, n));
    for (Index i = 1; i < m; ++i) {
      Mat G(n, n);
      for (Index r = 0; r < n; ++r) G.row(r) = rng.gaussian(n).transpose();
      As.push_back(Mat(0.5 * (G + G.transpose())));
    }
    Vec b(m);
    for (Index i = 0; i < m; ++i) b[i] = (As[static_cast<std::size_t>(i)].array() * Xhat.array()).sum();
    Mat G(n, n);
    for (Index r = 0; r < n; ++r) G.row(r) = rng.gaussian(n).transpose();
    const Mat C = 0.5 * (G + G.transpose());
    Instance inst = sdp_eq(C, As, b);
    inst.name = ps.name;
    return inst;
  }
  if (ps.kind == "portfolio") {
    const Index n = static_cast<Index>(param_or(P, "n", 5));
    const int reg = static_cast<int>(param_or(P, "reg", 0));  // 0 none, 1 l1, 2 l0
    const double w = param_or(P, "w", 0.01);
    Mat M(n, n);
    for (Index i = 0; i < n; ++i) M.row(i) = rng.gaussian(n).transpose();
    const Mat Q = M * M.transpose() / double(n) + 0.1 * Mat::Identity(n, n);
    Vec gam(n);
    for (Index j = 0; j < n; ++j) gam[j] = rng.uniform(0.0, 0.2);
    PortfolioReg r = reg == 1 ? PortfolioReg::L1
                   : reg == 2 ? PortfolioReg::L0
                              : PortfolioReg::None;
    Instance inst = portfolio(Q, gam, r, w);
    inst.name = ps.name;
    return inst;
  }
  throw std::invalid_argument("unknown problem kind '" + ps.kind + "'");
}

// ---------------------------------------------------------------------------
// Solver registry
// ---------------------------------------------------------------------------

using SolverFn = std::function<SolveReport(const Instance&, const SolverSpec&,
                                           const Budgets&, std::uint64_t)>;

namespace detail {

inline AlmConfig alm_config_from(const SolverSpec& ss, const Budgets& b) {
  AlmConfig cfg;
  cfg.rho0 = param_or(ss.params, "rho0", cfg.rho0);
  cfg.kappa_pen = param_or(ss.params, "kappa", cfg.kappa_pen);
  cfg.final_eta = param_or(ss.params, "final_eta", cfg.final_eta);
  cfg.final_eps = param_or(ss.params, "final_eps", cfg.final_eps);
  cfg.max_outer = b.max_outer;
  cfg.inner.max_iter = b.max_inner;
  return cfg;
}

inline SolveReport run_practical_any(const Instance& inst, InnerKind kind,
                                     const SolverSpec& ss, const Budgets& b) {
  const AlmConfig cfg = alm_config_from(ss, b);
  if (const CompositeProblem* p = as_composite(inst))
    return solve_practical(*p, inst.x0, cfg, kind);
  if (const NlpProblem* p = as_nlp(inst))
    return solve_practical(*p, inst.x0, cfg, kind);
  if (const NcCompositeProblem* p = as_nc(inst))
    return solve_practical(*p, inst.x0, cfg, kind);
  throw std::invalid_argument("solver '" + ss.name +
                              "' does not apply to this problem class");
}

inline SolveReport run_updf(const Instance& inst, PdParams pd,
                            const SolverSpec& ss, const Budgets& b) {
  const CompositeProblem* p = as_composite(inst);
  if (!p)
    throw std::invalid_argument(
        "primal-dual solvers apply to composite problems only");
  const double rho = param_or(ss.params, "rho", 1.0);
  pd.tau = param_or(ss.params, "tau", pd.tau);
  pd.sigma = param_or(ss.params, "sigma", pd.sigma);
  const double tol = param_or(ss.params, "tol", 1e-6);
  pd.validate();
  almkit::detail::check_rho(rho);

  SaddleOracle sad = saddle_from_composite(*p, rho);
  const long iters = std::max<long>(1, b.max_inner);
  const auto t0 = std::chrono::steady_clock::now();
  const long stride = std::max<long>(1, iters / 200);

  SolveReport rep;
  rep.rho = rho;
  double sig = std::numeric_limits<double>::infinity();
  double th = std::numeric_limits<double>::infinity();
  Vec x_mark = inst.x0;  // last iterate a trace row was emitted for
  const PdObserver probe = [&](int k, const Vec& xk, const Vec& lk) {
    if (k % stride != 0 && k != iters) return true;
    sig = sad.grad_x(xk, lk).norm();
    th = sad.grad_dual(xk, lk).norm();
    const CompositeEval ev =
        al_composite_smooth(*p, xk, split_dual(*p, lk), rho);
    IterRecord row;
    row.k = k;
    row.f_val = p->f.value(xk) + prox_value(p->h, xk);
    row.sigma = sig;
    row.theta = th;
    row.rho = rho;
    row.inner_iters = stride;
    row.wall_ms = almkit::detail::ms_since(t0);
    row.grad_rho = ev.d_rho;
    row.al_val = ev.value;
    row.x_change = (xk - x_mark).norm();
    row.accepted = true;
    row.inner_status = InnerStatus::Converged;
    rep.trace.push_back(row);
    x_mark = xk;
    return !(sig <= tol && th <= tol);
  };
  const PdTrace tr = updf(sad, inst.x0, Vec::Zero(saddle_dual_dim(*p)), pd,
                          static_cast<int>(iters), probe, /*keep_trace=*/false);
  rep.x = tr.x.back();
  rep.L = split_dual(*p, tr.lam.back());
  rep.status = (sig <= tol && th <= tol) ? SolveStatus::Converged
                                         : SolveStatus::MaxOuter;
  return rep;
}

}  // namespace detail

inline const std::map<std::string, SolverFn>& solver_registry() {
  static const std::map<std::string, SolverFn> reg = [] {
    std::map<std::string, SolverFn> r;
    r["alm-bb"] = [](const Instance& i, const SolverSpec& s, const Budgets& b,
                     std::uint64_t) {
      return detail::run_practical_any(i, InnerKind::BB, s, b);
    };
    r["alm-nag"] = [](const Instance& i, const SolverSpec& s, const Budgets& b,
                      std::uint64_t) {
      return detail::run_practical_any(i, InnerKind::NAG, s, b);
    };
    r["alm-ssn"] = [](const Instance& i, const SolverSpec& s, const Budgets& b,
                      std::uint64_t) {
      return detail::run_practical_any(i, InnerKind::SSN, s, b);
    };
    r["alm-proxgrad"] = [](const Instance& i, const SolverSpec& s,
                           const Budgets& b, std::uint64_t) {
      return detail::run_practical_any(i, InnerKind::ProxGrad, s, b);
    };
    r["updf-pdhg"] = [](const Instance& i, const SolverSpec& s,
                        const Budgets& b, std::uint64_t) {
      return detail::run_updf(i, pd_pdhg(0.2, 0.2), s, b);
    };
    r["updf-gda"] = [](const Instance& i, const SolverSpec& s,
                       const Budgets& b, std::uint64_t) {
      return detail::run_updf(i, pd_gda(0.2, 0.2), s, b);
    };
    r["updf-cp"] = [](const Instance& i, const SolverSpec& s, const Budgets& b,
                      std::uint64_t) {
      return detail::run_updf(i, pd_cp(0.2, 0.2), s, b);
    };
    r["updf-ogda"] = [](const Instance& i, const SolverSpec& s,
                        const Budgets& b, std::uint64_t) {
      return detail::run_updf(i, pd_ogda(0.2, 0.2), s, b);
    };
    r["accel-dual"] = [](const Instance& i, const SolverSpec& s,
                         const Budgets& b, std::uint64_t) {
      const CompositeProblem* p = as_composite(i);
      if (!p)
        throw std::invalid_argument(
            "accel-dual applies to composite problems only");
      AccelDualConfig cfg;
      cfg.rho = param_or(s.params, "rho", cfg.rho);
      cfg.t0 = param_or(s.params, "t0", cfg.t0);
      cfg.max_outer = b.max_outer;
      cfg.inner.max_iter = b.max_inner;
      return accel_dual_alm(*p, i.x0, cfg);
    };
    r["bcd-classical"] = [](const Instance& i, const SolverSpec& s,
                            const Budgets& b, std::uint64_t) {
      const IpProblem* p = as_ip(i);
      if (!p)
        throw std::invalid_argument(
            "bcd solvers apply to block integer programs only");
      BcdConfig cfg;
      cfg.rho0 = param_or(s.params, "rho0", cfg.rho0);
      cfg.max_outer = b.max_outer;
      return alm_bcd_ip(*p, i.x0, cfg, BcdUpdate::Classical);
    };
    r["bcd-proxlinear"] = [](const Instance& i, const SolverSpec& s,
                             const Budgets& b, std::uint64_t) {
      const IpProblem* p = as_ip(i);
      if (!p)
        throw std::invalid_argument(
            "bcd solvers apply to block integer programs only");
      BcdConfig cfg;
      cfg.rho0 = param_or(s.params, "rho0", cfg.rho0);
      cfg.tau = param_or(s.params, "tau", cfg.tau);
      cfg.max_outer = b.max_outer;
      return alm_bcd_ip(*p, i.x0, cfg, BcdUpdate::ProxLinear);
    };
    return r;
  }();
  return reg;
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

struct SuiteResult {
  std::vector<CellResult> cells;  // fixed order: problems major, solvers minor
};

inline void validate_spec(const RunSpec& spec) {
  require(!spec.problems.empty(), "suite: needs at least one problem");
  require(!spec.solvers.empty(), "suite: needs at least one solver");
  std::set<std::string> pn, sn;
  for (const auto& p : spec.problems) {
    require(!p.name.empty(), "suite: every problem needs a name");
    require(pn.insert(p.name).second,
            "suite: duplicate problem name '" + p.name + "'");
  }
  const auto& reg = solver_registry();
  for (const auto& s : spec.solvers) {
    require(sn.insert(s.name).second,
            "suite: duplicate solver name '" + s.name + "'");
    if (reg.find(s.name) == reg.end())
      throw std::invalid_argument("unknown solver '" + s.name + "'");
  }
  require(spec.budgets.max_outer > 0 && spec.budgets.max_inner > 0,
          "suite: budgets must be positive");
}

inline CellResult run_cell(const Instance& inst, const SolverSpec& ss,
                           const Budgets& budgets, std::uint64_t cell_seed) {
  CellResult cell;
  cell.problem = inst.name;
  cell.solver = ss.name;
  const auto& reg = solver_registry();
  auto it = reg.find(ss.name);
  if (it == reg.end()) {
    cell.status = "error";
    cell.note = "unknown solver";
    return cell;
  }
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const SolveReport rep = it->second(inst, ss, budgets, cell_seed);
    cell.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
    detail::fill_from_report(cell, rep);
    if (inst.x_star.size() > 0 && inst.x_star.size() == rep.x.size())
      cell.rel_err = rel_err(rep.x, inst.x_star);
  } catch (const std::exception& e) {
    cell.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
    cell.status = "error";
    cell.note = e.what();
  }
  return cell;
}

inline SuiteResult run_suite(const RunSpec& spec, int jobs = 1) {
  validate_spec(spec);

  // Instances are built once per problem so that every solver sees identical
  // data; the generator stream depends only on (suite seed, problem name).
  std::vector<Instance> instances;
  instances.reserve(spec.problems.size());
  for (const auto& ps : spec.problems)
    instances.push_back(build_instance(ps, spec.seed));

  const std::size_t cells_n = spec.problems.size() * spec.solvers.size();
  SuiteResult out;
  out.cells.resize(cells_n);

  auto run_index = [&](std::size_t idx) {
    const std::size_t pi = idx / spec.solvers.size();
    const std::size_t si = idx % spec.solvers.size();
    const std::uint64_t cell_seed = mix_seed(
        spec.seed, instances[pi].name + "/" + spec.solvers[si].name);
    out.cells[idx] =
        run_cell(instances[pi], spec.solvers[si], spec.budgets, cell_seed);
  };

  if (jobs <= 1) {
    for (std::size_t i = 0; i < cells_n; ++i) run_index(i);
  } else {
    // Cells are independent; each writes only its own slot, so the result is
    // identical to the sequential order regardless of scheduling.
    std::vector<std::future<void>> futs;
    std::size_t next = 0;
    const std::size_t lanes = std::min<std::size_t>(
        static_cast<std::size_t>(jobs), cells_n == 0 ? 1 : cells_n);
    std::mutex mtx;
    auto worker = [&]() {
      while (true) {
        std::size_t idx;
        {
          std::lock_guard<std::mutex> lock(mtx);
          if (next >= cells_n) return;
          idx = next++;
        }
        run_index(idx);
      }
    };
    futs.reserve(lanes);
    for (std::size_t l = 0; l < lanes; ++l)
      futs.push_back(std::async(std::launch::async, worker));
    for (auto& f : futs) f.get();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Performance profiles
//
// Input layout: per_solver[s][p] is solver s's metric on problem p (a
// positive number; +inf or NaN marks a failure).  For each problem the best
// finite metric sets the ratio r = t / min; a solver's curve value at tau is
// the fraction of problems with log2(r) <= tau.  Problems where every solver
// failed are dropped from the denominator and counted in rows_excluded.
// ---------------------------------------------------------------------------

struct ProfileCurve {
  std::string solver;
  std::vector<double> log2_ratios;                 // one per retained problem
  std::vector<std::pair<double, double>> samples;  // (tau, pi) on the grid

  double value(double tau) const {
    if (log2_ratios.empty()) return 0.0;
    std::size_t cnt = 0;
    for (double r : log2_ratios)
      if (r <= tau) ++cnt;
    return static_cast<double>(cnt) / static_cast<double>(log2_ratios.size());
  }
};

struct ProfileResult {
  std::vector<ProfileCurve> curves;
  Index problems_used = 0;
  Index rows_excluded = 0;
};

inline ProfileResult perf_profile(
    const std::vector<std::vector<double>>& per_solver,
    const std::vector<std::string>& names, double tau_max,
    Index grid_points = 256) {
  require(!per_solver.empty(), "perf_profile: need at least one solver");
  require(names.size() == per_solver.size(),
          "perf_profile: one name per solver row");
  require(tau_max > 0.0, "perf_profile: tau_max must be positive");
  require(grid_points >= 2, "perf_profile: grid needs at least two samples");
  const std::size_t S = per_solver.size();
  const std::size_t P = per_solver[0].size();
  for (const auto& row : per_solver)
    require(row.size() == P, "perf_profile: ragged metric matrix");

  auto is_fail = [](double t) { return !std::isfinite(t) || t <= 0.0; };

  ProfileResult out;
  out.curves.resize(S);
  for (std::size_t s = 0; s < S; ++s) out.curves[s].solver = names[s];

  for (std::size_t p = 0; p < P; ++p) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < S; ++s)
      if (!is_fail(per_solver[s][p])) best = std::min(best, per_solver[s][p]);
    if (!std::isfinite(best)) {
      ++out.rows_excluded;
      continue;
    }
    ++out.problems_used;
    for (std::size_t s = 0; s < S; ++s) {
      const double t = per_solver[s][p];
      out.curves[s].log2_ratios.push_back(
          is_fail(t) ? std::numeric_limits<double>::infinity()
                     : std::log2(t / best));
    }
  }

  for (std::size_t s = 0; s < S; ++s) {
    auto& c = out.curves[s];
    c.samples.reserve(static_cast<std::size_t>(grid_points));
    for (Index j = 0; j < grid_points; ++j) {
      const double tau = tau_max * static_cast<double>(j) /
                         static_cast<double>(grid_points - 1);
      c.samples.emplace_back(tau, c.value(tau));
    }
  }
  return out;
}

// Assemble the metric matrix from finished cells.  metric is "time" or
// "inner_iters"; any non-converged cell counts as a failure.
inline ProfileResult profile_from_cells(const std::vector<CellResult>& cells,
                                        const std::string& metric,
                                        double tau_max,
                                        Index grid_points = 256) {
  require(metric == "time" || metric == "inner_iters",
          "profile metric must be 'time' or 'inner_iters'");
  std::vector<std::string> problems, solvers;
  for (const auto& c : cells) {
    if (std::find(problems.begin(), problems.end(), c.problem) ==
        problems.end())
      problems.push_back(c.problem);
    if (std::find(solvers.begin(), solvers.end(), c.solver) == solvers.end())
      solvers.push_back(c.solver);
  }
  std::vector<std::vector<double>> t(
      solvers.size(),
      std::vector<double>(problems.size(),
                          std::numeric_limits<double>::infinity()));
  for (const auto& c : cells) {
    const auto pi = static_cast<std::size_t>(
        std::find(problems.begin(), problems.end(), c.problem) -
        problems.begin());
    const auto si = static_cast<std::size_t>(
        std::find(solvers.begin(), solvers.end(), c.solver) - solvers.begin());
    if (c.failed()) continue;
    const double v = metric == "time" ? c.wall_ms
                                      : static_cast<double>(c.inner_iters_total);
    t[si][pi] = v > 0.0 ? v : 1e-9;  // zero-cost cells still rank first
  }
  return perf_profile(t, solvers, tau_max, grid_points);
}

// ---------------------------------------------------------------------------
// Emission: CSV / JSON / plot data
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::stod(s);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

inline constexpr const char* kResultsHeader =
    "problem,solver,status,outer_iters,inner_iters_total,f_final,stat_sigma,"
    "feas_theta,rho_final,wall_ms";

inline std::string results_csv(const std::vector<CellResult>& cells) {
  std::ostringstream os;
  os << kResultsHeader << "\n";
  for (const auto& c : cells) {
    os << c.problem << ',' << c.solver << ',' << c.status << ','
       << c.outer_iters << ',' << c.inner_iters_total << ','
       << detail::fmt(c.f_final) << ',' << detail::fmt(c.stat_sigma) << ','
       << detail::fmt(c.feas_theta) << ',' << detail::fmt(c.rho_final) << ','
       << detail::fmt(c.wall_ms) << "\n";
  }
  return os.str();
}

inline std::vector<CellResult> parse_results_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), "results csv: empty file");
  // tolerate trailing carriage returns
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
    line.pop_back();
  require(line == kResultsHeader, "results csv: unexpected header");
  std::vector<CellResult> cells;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    require(f.size() == 10, "results csv: expected 10 columns");
    CellResult c;
    c.problem = f[0];
    c.solver = f[1];
    c.status = f[2];
    c.outer_iters = std::stol(f[3]);
    c.inner_iters_total = std::stol(f[4]);
    c.f_final = detail::parse_double(f[5]);
    c.stat_sigma = detail::parse_double(f[6]);
    c.feas_theta = detail::parse_double(f[7]);
    c.rho_final = detail::parse_double(f[8]);
    c.wall_ms = detail::parse_double(f[9]);
    cells.push_back(std::move(c));
  }
  return cells;
}

inline constexpr const char* kTraceHeader =
    "k,f,sigma,theta,rho,inner_iters,wall_ms";

inline std::string trace_csv(const std::vector<IterRecord>& trace) {
  std::ostringstream os;
  os << kTraceHeader << "\n";
  for (const auto& r : trace) {
    os << r.k << ',' << detail::fmt(r.f_val) << ',' << detail::fmt(r.sigma)
       << ',' << detail::fmt(r.theta) << ',' << detail::fmt(r.rho) << ','
       << r.inner_iters << ',' << detail::fmt(r.wall_ms) << "\n";
  }
  return os.str();
}

// Whitespace-separated columns for external plotting tools.
inline std::string plot_data(const std::vector<IterRecord>& trace) {
  std::ostringstream os;
  os << "# k f sigma theta rho inner_iters wall_ms\n";
  for (const auto& r : trace) {
    os << r.k << ' ' << detail::fmt(r.f_val) << ' ' << detail::fmt(r.sigma)
       << ' ' << detail::fmt(r.theta) << ' ' << detail::fmt(r.rho) << ' '
       << r.inner_iters << ' ' << detail::fmt(r.wall_ms) << "\n";
  }
  return os.str();
}

inline json cell_to_json(const CellResult& c) {
  json j;
  j["problem"] = c.problem;
  j["solver"] = c.solver;
  j["status"] = c.status;
  j["outer_iters"] = c.outer_iters;
  j["inner_iters_total"] = c.inner_iters_total;
  j["f_final"] = c.f_final;
  j["stat_sigma"] = c.stat_sigma;
  j["feas_theta"] = c.feas_theta;
  j["rho_final"] = c.rho_final;
  j["wall_ms"] = c.wall_ms;
  if (std::isfinite(c.rel_err)) j["rel_err"] = c.rel_err;
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

inline std::string results_json(const std::vector<CellResult>& cells) {
  json arr = json::array();
  for (const auto& c : cells) arr.push_back(cell_to_json(c));
  return arr.dump(2) + "\n";
}

inline std::string profile_csv(const ProfileResult& pr) {
  std::ostringstream os;
  os << "tau";
  for (const auto& c : pr.curves) os << ',' << c.solver;
  os << "\n";
  if (pr.curves.empty()) return os.str();
  const std::size_t rows = pr.curves[0].samples.size();
  for (std::size_t j = 0; j < rows; ++j) {
    os << detail::fmt(pr.curves[0].samples[j].first);
    for (const auto& c : pr.curves) os << ',' << detail::fmt(c.samples[j].second);
    os << "\n";
  }
  return os.str();
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& text) {
  std::filesystem::create_directories(path.parent_path().empty()
                                          ? std::filesystem::path(".")
                                          : path.parent_path());
  std::ofstream os(path, std::ios::binary);
  require(os.good(), "cannot open output file: " + path.string());
  os << text;
  require(os.good(), "failed writing output file: " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), "cannot open input file: " + path.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// Writes results.csv, results.json and one trace CSV per cell under out_dir.
inline void write_outputs(const std::filesystem::path& out_dir,
                          const SuiteResult& res) {
  std::filesystem::create_directories(out_dir / "trace");
  write_text_file(out_dir / "results.csv", results_csv(res.cells));
  write_text_file(out_dir / "results.json", results_json(res.cells));
  for (const auto& c : res.cells)
    write_text_file(out_dir / "trace" / (c.problem + "__" + c.solver + ".csv"),
                    trace_csv(c.trace));
}

// ---------------------------------------------------------------------------
// Suite files (JSON): parse / serialize / defaults
// ---------------------------------------------------------------------------

inline RunSpec parse_suite(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("suite file: invalid JSON: ") +
                                e.what());
  }
  RunSpec spec;
  spec.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("budgets")) {
    const auto& b = j.at("budgets");
    spec.budgets.max_outer = b.value("max_outer", spec.budgets.max_outer);
    spec.budgets.max_inner = b.value("max_inner", spec.budgets.max_inner);
    spec.budgets.wall_ms = b.value("wall_ms", spec.budgets.wall_ms);
  }
  require(j.contains("problems") && j.at("problems").is_array(),
          "suite file: missing 'problems' array");
  require(j.contains("solvers") && j.at("solvers").is_array(),
          "suite file: missing 'solvers' array");
  int auto_idx = 0;
  for (const auto& pj : j.at("problems")) {
    ProblemSpec ps;
    ps.kind = pj.value("kind", std::string());
    require(!ps.kind.empty(), "suite file: problem entry without 'kind'");
    ps.name = pj.value("name", ps.kind + "-" + std::to_string(auto_idx));
    ++auto_idx;
    if (pj.contains("params"))
      for (auto it = pj.at("params").begin(); it != pj.at("params").end(); ++it)
        ps.params[it.key()] = it.value().get<double>();
    spec.problems.push_back(std::move(ps));
  }
  for (const auto& sj : j.at("solvers")) {
    SolverSpec ss;
    if (sj.is_string()) {
      ss.name = sj.get<std::string>();
    } else {
      ss.name = sj.value("name", std::string());
      if (sj.contains("params"))
        for (auto it = sj.at("params").begin(); it != sj.at("params").end();
             ++it)
          ss.params[it.key()] = it.value().get<double>();
    }
    require(!ss.name.empty(), "suite file: solver entry without 'name'");
    spec.solvers.push_back(std::move(ss));
  }
  return spec;
}

inline std::string suite_to_json(const RunSpec& spec) {
  json j;
  j["seed"] = spec.seed;
  j["budgets"] = {{"max_outer", spec.budgets.max_outer},
                  {"max_inner", spec.budgets.max_inner},
                  {"wall_ms", spec.budgets.wall_ms}};
  j["problems"] = json::array();
  for (const auto& p : spec.problems) {
    json pj;
    pj["kind"] = p.kind;
    pj["name"] = p.name;
    if (!p.params.empty()) pj["params"] = p.params;
    j["problems"].push_back(pj);
  }
  j["solvers"] = json::array();
  for (const auto& s : spec.solvers) {
    json sj;
    sj["name"] = s.name;
    if (!s.params.empty()) sj["params"] = s.params;
    j["solvers"].push_back(sj);
  }
  return j.dump(2) + "\n";
}

// Ready-made suites for the generator CLI: one per problem kind, with a
// solver lineup appropriate to that problem class.
inline RunSpec default_suite(const std::string& kind, std::uint64_t seed) {
  RunSpec spec;
  spec.seed = seed;
  auto prob = [&](const std::string& name,
                  std::map<std::string, double> params) {
    ProblemSpec ps;
    ps.kind = kind;
    ps.name = name;
    ps.params = std::move(params);
    spec.problems.push_back(std::move(ps));
  };
  auto solver = [&](const std::string& name,
                    std::map<std::string, double> params = {}) {
    SolverSpec ss;
    ss.name = name;
    ss.params = std::move(params);
    spec.solvers.push_back(std::move(ss));
  };

  if (kind == "bp") {
    prob("bp-flat", {{"m", 32}, {"n", 128}, {"k", 4}, {"d", 0}});
    prob("bp-range", {{"m", 32}, {"n", 128}, {"k", 4}, {"d", 20}});
    spec.budgets.max_inner = 20000;
    solver("alm-bb");
    solver("alm-nag");
    solver("updf-cp", {{"tau", 0.45}, {"sigma", 0.45}, {"rho", 1.0}});
    solver("updf-ogda", {{"tau", 0.3}, {"sigma", 0.3}, {"rho", 1.0}});
    solver("accel-dual", {{"rho", 10.0}});
  } else if (kind == "lp") {
    prob("lp-a", {{"n", 6}, {"m", 3}});
    prob("lp-b", {{"n", 6}, {"m", 3}});
    prob("lp-c", {{"n", 8}, {"m", 4}});
    solver("alm-bb");
    solver("alm-nag");
    solver("alm-proxgrad");
  } else if (kind == "qp") {
    prob("qp-a", {{"n", 10}, {"m", 4}});
    prob("qp-b", {{"n", 15}, {"m", 5}});
    prob("qp-c", {{"n", 20}, {"m", 5}});
    solver("alm-bb");
    solver("alm-nag");
    solver("alm-ssn");
  } else if (kind == "ip") {
    prob("ip-a", {{"blocks", 3}, {"block_dim", 4}, {"m", 3}});
    prob("ip-b", {{"blocks", 4}, {"block_dim", 3}, {"m", 4}});
    prob("ip-c", {{"blocks", 2}, {"block_dim", 5}, {"m", 2}});
    solver("bcd-classical");
    solver("bcd-proxlinear");
  } else if (kind == "sdp") {
    prob("sdp-a", {{"n", 6}, {"m", 3}});
    prob("sdp-b", {{"n", 8}, {"m", 4}});
    spec.budgets.max_inner = 5000;
    solver("alm-bb");
    solver("alm-nag");
  } else if (kind == "portfolio") {
    prob("port-plain", {{"n", 5}, {"reg", 0}});
    prob("port-l1", {{"n", 5}, {"reg", 1}, {"w", 0.01}});
    prob("port-l0", {{"n", 5}, {"reg", 2}, {"w", 0.001}});
    solver("alm-bb");
    solver("alm-nag");
  } else {
    throw std::invalid_argument("unknown generator kind '" + kind +
                                "' (expected bp|lp|qp|ip|sdp|portfolio)");
  }
  return spec;
}

}  // namespace bench
}  // namespace almkit
