#pragma once

// Outer augmented-Lagrangian engine: the practical double-loop method with
// multiplicative or supergradient penalty growth, per-class optimality
// measures and dual-ascent steps, proximal-point inexactness predicates, and
// a linearly convergent loop for strongly convex objectives under linear
// inequality constraints.

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "almkit/alfn.hpp"
#include "almkit/subsolve.hpp"

namespace almkit {

enum class PenaltyRule { Multiplicative, SupergradientAscent };
enum class StopRule {
  GradNormPair,   // sigma = |grad_x AL|, theta = |grad_dual AL|
  RelChange,      // inner stop on relative iterate change (heuristic)
  RockafellarA,   // dist <= sqrt(sc/rho) * eps_k
  RockafellarB,   // dist <= sqrt(sc/rho) * delta_k * |dual change|^2
  RockafellarC,   // dist <= (delta_k / rho) * |dual change|
  ExactDiscrete   // block-coordinate integer solver: stop on a full no-move sweep
};
enum class SolveStatus { Converged, MaxOuter, InnerStalled, InfeasibleSuspected };
enum class InnerKind { BB, NAG, ProxGrad, SSN };

struct AlmConfig {
  double rho0 = 10.0;
  double kappa_pen = 10.0;
  double alpha_tol = 0.5;
  double beta_tol = 0.9;
  double final_eta = 1e-8;
  double final_eps = 1e-8;
  int max_outer = 100;
  PenaltyRule penalty_rule = PenaltyRule::Multiplicative;
  StopRule stop_rule = StopRule::GradNormPair;
  InnerOpts inner;
  double inner_sc_modulus = 0.0;  // strong-convexity hint for the NAG inner solver
  double rock_sc_modulus = 1.0;   // subproblem strong convexity for the A/B predicates
  double rock_sched0 = 1.0;       // leading coefficient of the geometric schedules
  double rho_limit = 1e16;        // beyond this the run is flagged infeasible-suspected

  void validate() const {
    require(rho0 > 0.0 && std::isfinite(rho0), "AlmConfig: rho0 must be positive");
    require(kappa_pen > 1.0, "AlmConfig: kappa_pen must exceed 1");
    require(alpha_tol > 0.0 && alpha_tol <= beta_tol && beta_tol <= 1.0,
            "AlmConfig: need 0 < alpha_tol <= beta_tol <= 1");
    require(final_eta > 0.0 && final_eps > 0.0,
            "AlmConfig: final tolerances must be positive");
    require(max_outer >= 1, "AlmConfig: max_outer must be >= 1");
    require(rock_sched0 > 0.0, "AlmConfig: rock_sched0 must be positive");
    require(rho_limit > rho0, "AlmConfig: rho_limit must exceed rho0");
  }
};

struct AlmState {
  Vec x;
  Multipliers L;
  double rho = 0.0;
  double eta_k = 0.0;
  double eps_k = 0.0;
  int k = 0;
};

struct IterRecord {
  int k = 0;
  double f_val = 0.0;
  double sigma = 0.0;   // stationarity measure of the inner problem
  double theta = 0.0;   // constraint-violation measure
  double rho = 0.0;
  long inner_iters = 0;
  double wall_ms = 0.0;
  // Auditing extras so invariants can be re-verified mechanically.
  double eta_k = 0.0;
  double eps_k = 0.0;
  double grad_rho = 0.0;       // penalty supergradient at the logged point
  double dual_sign_min = 0.0;  // min signed slack of sign-constrained duals
  double al_val = 0.0;         // AL value at (x, L, rho) after the inner solve
  double x_change = 0.0;       // |x_k+1 - x_k| across the inner solve
  bool accepted = false;       // theta <= eps_k branch taken
  bool rho_capped = false;     // supergradient step was clipped entering this row
  bool rel_stop = false;       // inner stopped on the relative-change surrogate
  InnerStatus inner_status = InnerStatus::MaxIter;
};

struct SolveReport {
  SolveStatus status = SolveStatus::MaxOuter;
  Vec x;
  Multipliers L;
  double rho = 0.0;
  std::vector<IterRecord> trace;
};

// ---------------------------------------------------------------------------
// Optimality measures per problem class: sigma bounds the distance from 0 to
// the x-subdifferential of the AL, theta is the norm of the dual gradient
// blocks (anchor minus prox/projection), which vanishes exactly when the
// shifted slack point is feasible.

inline std::pair<double, double> measures(const NlpProblem& p, const Vec& x,
                                          const Multipliers& L, double rho) {
  const auto e = al_nlp(p, x, L.lam, L.mu, rho);
  const auto d = al_nlp_dual(p, x, L.lam, L.mu, rho);
  const double theta =
      std::sqrt(d.d_lam.squaredNorm() + d.d_mu.squaredNorm());
  return {e.grad_x.norm(), theta};
}

inline std::pair<double, double> measures(const CompositeProblem& p,
                                          const Vec& x, const Multipliers& L,
                                          double rho) {
  const auto e = al_composite_smooth(p, x, L, rho);
  const double theta = std::sqrt(e.d_nu.squaredNorm() + e.d_lam.squaredNorm() +
                                 e.d_mu.squaredNorm());
  return {e.grad_x.norm(), theta};
}

// Retained-h form: sigma is the prox-gradient mapping norm at step 1/rho.
inline std::pair<double, double> measures_retained(const CompositeProblem& p,
                                                   const Vec& x, const Vec& lam,
                                                   const Vec& mu, double rho) {
  const auto e = al_composite_retained(p, x, lam, mu, rho);
  const Vec pm = x - prox(p.h, rho, x - e.smooth_grad_x / rho);
  const double theta =
      std::sqrt(e.d_lam.squaredNorm() + e.d_mu.squaredNorm());
  return {rho * pm.norm(), theta};
}

inline std::pair<double, double> measures(const NcCompositeProblem& p,
                                          const Vec& x, const Multipliers& L,
                                          double rho) {
  Vec v(0);
  if (p.m > 0) v = project(p.Q, p.c(x) + L.lam / rho);
  const auto e = al_nonconvex(p, x, v, L.nu, L.lam, L.mu, rho);
  const double theta = std::sqrt(e.sg_nu.squaredNorm() +
                                 e.sg_lam.squaredNorm() +
                                 e.sg_mu.squaredNorm());
  return {e.grad_x.norm(), theta};
}

// Discrete block class: stationarity is the no-move criterion between two
// consecutive sweeps, feasibility is the squared norm of the positive part.
inline std::pair<double, double> measures(const IpProblem& p, const Vec& x_prev,
                                          const Vec& x, const Vec& mu,
                                          double rho) {
  const auto e = al_ip(p, x, mu, rho);
  (void)e;
  const Vec rp = (p.A.apply(x) - p.b).cwiseMax(0.0);
  return {(x - x_prev).norm(), rp.squaredNorm()};
}

// ---------------------------------------------------------------------------
// Dual ascent steps with sigma_k = rho_k. Each block update equals rho times
// the shifted residual (anchor + w/rho minus its prox/projection), which
// keeps sign-constrained multipliers feasible without any explicit clipping.

namespace detail {

inline Vec hat_update(const ProxFn& S, const Vec& anchor, const Vec& w,
                      double rho) {
  const Vec y = anchor + w / rho;
  return rho * (y - prox(S, rho, y));
}

// Minimum signed slack over multiplier entries whose block is one-sided
// (upper bound only: entry must be >= 0; lower bound only: entry <= 0).
inline void box_sign_min(const ProxFn& S, const Vec& w, double* acc) {
  if (w.size() == 0) return;
  double lo, hi;
  if (S.kind == ProxKind::Nonneg) {
    lo = 0.0;
    hi = std::numeric_limits<double>::infinity();
  } else if (S.kind == ProxKind::Box) {
    for (Index i = 0; i < w.size(); ++i) {
      const bool lb = std::isfinite(S.lower[i]);
      const bool ub = std::isfinite(S.upper[i]);
      if (ub && !lb) *acc = std::min(*acc, w[i]);
      if (lb && !ub) *acc = std::min(*acc, -w[i]);
    }
    return;
  } else {
    return;
  }
  const bool lb = std::isfinite(lo);
  const bool ub = std::isfinite(hi);
  if (ub && !lb) *acc = std::min(*acc, w.minCoeff());
  if (lb && !ub) *acc = std::min(*acc, -w.maxCoeff());
}

inline double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace detail

inline Multipliers dual_update(const NlpProblem& p, const Vec& x,
                               const Multipliers& L, double rho) {
  detail::check_rho(rho);
  Multipliers out = L;
  if (p.m > 0) out.lam = detail::hat_update(p.Qc, p.c(x), L.lam, rho);
  if (p.Kx.kind != ProxKind::Zero)
    out.mu = detail::hat_update(p.Kx, x, L.mu, rho);
  return out;
}

inline Multipliers dual_update(const CompositeProblem& p, const Vec& x,
                               const Multipliers& L, double rho) {
  detail::check_rho(rho);
  Multipliers out = L;
  if (p.h.kind != ProxKind::Zero)
    out.nu = detail::hat_update(p.h, x, L.nu, rho);
  if (!p.A.empty()) out.lam = detail::hat_update(p.Q, p.A.apply(x), L.lam, rho);
  if (p.K.kind != ProxKind::Zero)
    out.mu = detail::hat_update(p.K, x, L.mu, rho);
  return out;
}

inline Multipliers dual_update_retained(const CompositeProblem& p, const Vec& x,
                                        const Vec& lam, const Vec& mu,
                                        double rho) {
  detail::check_rho(rho);
  Multipliers out;
  out.lam = lam;
  out.mu = mu;
  if (!p.A.empty()) out.lam = detail::hat_update(p.Q, p.A.apply(x), lam, rho);
  if (p.K.kind != ProxKind::Zero)
    out.mu = detail::hat_update(p.K, x, mu, rho);
  return out;
}

inline Multipliers dual_update(const NcCompositeProblem& p, const Vec& x,
                               const Multipliers& L, double rho) {
  detail::check_rho(rho);
  Multipliers out = L;
  if (p.h.kind != ProxKind::Zero)
    out.nu = detail::hat_update(p.h, x, L.nu, rho);
  if (p.m > 0) {
    const Vec cx = p.c(x);
    const Vec v = project(p.Q, cx + L.lam / rho);
    out.lam = L.lam + rho * (cx - v);
  }
  if (p.K.kind != ProxKind::Zero)
    out.mu = detail::hat_update(p.K, x, L.mu, rho);
  return out;
}

inline Vec dual_update_ip(const IpProblem& p, const Vec& x, const Vec& mu,
                          double rho) {
  detail::check_rho(rho);
  return (mu + rho * (p.A.apply(x) - p.b)).cwiseMax(0.0);
}

// AlmState conveniences matching the outer-loop calling shape.
inline Multipliers dual_update(const NlpProblem& p, const AlmState& s) {
  return dual_update(p, s.x, s.L, s.rho);
}
inline Multipliers dual_update(const CompositeProblem& p, const AlmState& s) {
  return dual_update(p, s.x, s.L, s.rho);
}
inline Multipliers dual_update(const NcCompositeProblem& p, const AlmState& s) {
  return dual_update(p, s.x, s.L, s.rho);
}

// ---------------------------------------------------------------------------
// Inexactness predicates for the proximal-point style inner criteria.

enum class Rockafellar { A, B, C };

inline bool rockafellar_stop(Rockafellar which, double sc_modulus, double rho_k,
                             double dist0_subgrad, double dual_change,
                             double sched) {
  require(rho_k > 0.0 && std::isfinite(rho_k),
          "rockafellar_stop: rho must be positive");
  require(dist0_subgrad >= 0.0 && dual_change >= 0.0 && sched >= 0.0,
          "rockafellar_stop: distances and schedules must be nonnegative");
  switch (which) {
    case Rockafellar::A:
      require(sc_modulus > 0.0,
              "rockafellar_stop: variant A needs a positive strong-convexity modulus");
      return dist0_subgrad <= std::sqrt(sc_modulus / rho_k) * sched;
    case Rockafellar::B:
      require(sc_modulus > 0.0,
              "rockafellar_stop: variant B needs a positive strong-convexity modulus");
      return dist0_subgrad <=
             std::sqrt(sc_modulus / rho_k) * sched * dual_change * dual_change;
    default:
      return dist0_subgrad <= (sched / rho_k) * dual_change;
  }
}

inline double multiplier_change(const Multipliers& a, const Multipliers& b) {
  require(a.nu.size() == b.nu.size() && a.lam.size() == b.lam.size() &&
              a.mu.size() == b.mu.size(),
          "multiplier_change: block size mismatch");
  return std::sqrt((a.nu - b.nu).squaredNorm() + (a.lam - b.lam).squaredNorm() +
                   (a.mu - b.mu).squaredNorm());
}

// ---------------------------------------------------------------------------
// Generic outer loop. The adapter supplies the per-class pieces; the loop
// owns the branch logic, tolerance ledger, and trace bookkeeping.

namespace detail {

template <class Adapter>
SolveReport run_practical(const Adapter& ad, Vec x, const AlmConfig& cfg) {
  cfg.validate();
  if (cfg.stop_rule == StopRule::ExactDiscrete)
    throw VariantMismatch(
        "solve_practical: the exact-discrete stop belongs to the block-coordinate "
        "integer solver");

  SolveReport rep;
  double rho = cfg.rho0;
  double eta = std::max(1.0 / rho, cfg.final_eta);
  double eps = std::max(std::pow(rho, -cfg.alpha_tol), cfg.final_eps);
  Multipliers L = ad.init_multipliers();
  bool pending_cap = false;

  const bool rock = cfg.stop_rule == StopRule::RockafellarA ||
                    cfg.stop_rule == StopRule::RockafellarB ||
                    cfg.stop_rule == StopRule::RockafellarC;

  for (int k = 0; k < cfg.max_outer; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    const Vec x_before = x;
    InnerOpts io = cfg.inner;
    io.tol_grad = eta;
    if (cfg.stop_rule == StopRule::RelChange) io.rel_change_tol = eta;

    InnerReport ir;
    long inner_total = 0;
    double sigma = 0.0;

    if (!rock) {
      ir = ad.inner_solve(x, L, rho, io);
      x = ir.x;
      inner_total = ir.iters;
      sigma = ad.stationarity(x, L, rho);
    } else {
      const double sched = cfg.rock_sched0 * std::pow(0.5, k);
      const Rockafellar which =
          cfg.stop_rule == StopRule::RockafellarA   ? Rockafellar::A
          : cfg.stop_rule == StopRule::RockafellarB ? Rockafellar::B
                                                    : Rockafellar::C;
      double tol = eta;
      for (int r = 0;; ++r) {
        io.tol_grad = tol;
        ir = ad.inner_solve(x, L, rho, io);
        x = ir.x;
        inner_total += ir.iters;
        sigma = ad.stationarity(x, L, rho);
        if (ir.status != InnerStatus::Converged) break;
        const Multipliers Lp = ad.dual_update(x, L, rho);
        const double dchg = multiplier_change(Lp, L);
        if (rockafellar_stop(which, cfg.rock_sc_modulus, rho, sigma, dchg,
                             sched))
          break;
        if (r >= 40 || tol <= 1e-14) break;
        tol *= 0.25;
      }
    }

    const bool inner_ok =
        ir.status == InnerStatus::Converged ||
        (cfg.stop_rule == StopRule::RelChange && ir.rel_change_stop);

    const double theta = ad.feasibility(x, L, rho);
    const double grho = ad.grad_rho(x, L, rho);

    IterRecord row;
    row.k = k;
    row.f_val = ad.f_value(x);
    row.sigma = sigma;
    row.theta = theta;
    row.rho = rho;
    row.inner_iters = inner_total;
    row.eta_k = eta;
    row.eps_k = eps;
    row.grad_rho = grho;
    row.dual_sign_min = ad.dual_sign_min(L);
    row.al_val = ad.al_value(x, L, rho);
    row.x_change = (x - x_before).norm();
    row.rel_stop = ir.rel_change_stop;
    row.inner_status = ir.status;
    row.rho_capped = pending_cap;
    pending_cap = false;

    if (!inner_ok) {
      row.wall_ms = ms_since(t0);
      rep.trace.push_back(row);
      rep.status = SolveStatus::InnerStalled;
      break;
    }

    const bool accepted = theta <= eps;
    row.accepted = accepted;

    if (accepted) {
      const bool sigma_final =
          cfg.stop_rule == StopRule::RelChange && ir.rel_change_stop
              ? eta <= cfg.final_eta
              : sigma <= cfg.final_eta;
      if (theta <= cfg.final_eps && sigma_final) {
        row.wall_ms = ms_since(t0);
        rep.trace.push_back(row);
        rep.status = SolveStatus::Converged;
        break;
      }
      L = ad.dual_update(x, L, rho);
      eta = std::max(eta / rho, cfg.final_eta);
      eps = std::max(eps / std::pow(rho, cfg.beta_tol), cfg.final_eps);
    } else {
      double rho_next = cfg.kappa_pen * rho;
      if (cfg.penalty_rule == PenaltyRule::SupergradientAscent) {
        const double cand = rho + rho * grho;  // dual step sigma_k = rho_k
        const double cap = cfg.kappa_pen * rho;
        if (cand > cap) {
          rho_next = cap;
          pending_cap = true;
        } else if (cand > rho) {
          rho_next = cand;
        } else {
          rho_next = cap;  // degenerate supergradient: fall back to kappa growth
        }
      }
      rho = rho_next;
      eta = std::max(1.0 / rho, cfg.final_eta);
      eps = std::max(std::pow(rho, -cfg.alpha_tol), cfg.final_eps);
    }

    row.wall_ms = ms_since(t0);
    rep.trace.push_back(row);

    if (rho > cfg.rho_limit) {
      rep.status = SolveStatus::InfeasibleSuspected;
      break;
    }
  }

  rep.x = x;
  rep.L = L;
  rep.rho = rho;
  return rep;
}

struct NlpAdapter {
  const NlpProblem& p;
  InnerKind kind;
  double sc_hint;

  Multipliers init_multipliers() const {
    Multipliers L;
    L.lam = Vec::Zero(p.m);
    if (p.Kx.kind != ProxKind::Zero) L.mu = Vec::Zero(p.n);
    return L;
  }
  SmoothOracle oracle(const Multipliers& L, double rho) const {
    SmoothOracle o;
    const NlpProblem* pp = &p;
    const Vec lam = L.lam, mu = L.mu;
    o.value_grad = [pp, lam, mu, rho](const Vec& z) {
      auto e = al_nlp(*pp, z, lam, mu, rho);
      return std::make_pair(e.value, std::move(e.grad_x));
    };
    if (kind == InnerKind::SSN) {
      auto cache = std::make_shared<std::pair<Vec, LinOp>>();
      o.hess_vec = [pp, lam, mu, rho, cache](const Vec& z, const Vec& v) {
        if (cache->second.empty() || cache->first.size() != z.size() ||
            cache->first != z) {
          cache->first = z;
          cache->second = gen_hessian_nlp(*pp, z, lam, mu, rho);
        }
        return cache->second.apply(v);
      };
    }
    return o;
  }
  InnerReport inner_solve(const Vec& x0, const Multipliers& L, double rho,
                          const InnerOpts& io) const {
    const SmoothOracle o = oracle(L, rho);
    switch (kind) {
      case InnerKind::BB: return gd_bb(o, x0, io);
      case InnerKind::NAG: return nag(o, x0, io, sc_hint);
      case InnerKind::SSN: return ssn(o, x0, io);
      default:
        throw VariantMismatch(
            "solve_practical(nlp): the proximal-gradient inner solver applies to "
            "the retained composite form");
    }
  }
  double stationarity(const Vec& x, const Multipliers& L, double rho) const {
    return al_nlp(p, x, L.lam, L.mu, rho).grad_x.norm();
  }
  double feasibility(const Vec& x, const Multipliers& L, double rho) const {
    return measures(p, x, L, rho).second;
  }
  Multipliers dual_update(const Vec& x, const Multipliers& L, double rho) const {
    return almkit::dual_update(p, x, L, rho);
  }
  double grad_rho(const Vec& x, const Multipliers& L, double rho) const {
    return al_nlp_dual(p, x, L.lam, L.mu, rho).d_rho;
  }
  double f_value(const Vec& x) const { return p.f.value(x); }
  double al_value(const Vec& x, const Multipliers& L, double rho) const {
    return al_nlp(p, x, L.lam, L.mu, rho).value;
  }
  double dual_sign_min(const Multipliers& L) const {
    double acc = std::numeric_limits<double>::infinity();
    if (p.m > 0) box_sign_min(p.Qc, L.lam, &acc);
    if (p.Kx.kind != ProxKind::Zero) box_sign_min(p.Kx, L.mu, &acc);
    return std::isfinite(acc) ? acc : 0.0;
  }
};

struct CompositeSmoothAdapter {
  const CompositeProblem& p;
  InnerKind kind;
  double sc_hint;

  Multipliers init_multipliers() const {
    Multipliers L;
    if (p.h.kind != ProxKind::Zero) L.nu = Vec::Zero(p.n);
    if (!p.A.empty()) L.lam = Vec::Zero(p.A.rows);
    if (p.K.kind != ProxKind::Zero) L.mu = Vec::Zero(p.n);
    return L;
  }
  InnerReport inner_solve(const Vec& x0, const Multipliers& L, double rho,
                          const InnerOpts& io) const {
    const CompositeProblem* pp = &p;
    const Multipliers Lc = L;
    SmoothOracle o;
    o.value_grad = [pp, Lc, rho](const Vec& z) {
      auto e = al_composite_smooth(*pp, z, Lc, rho);
      return std::make_pair(e.value, std::move(e.grad_x));
    };
    switch (kind) {
      case InnerKind::BB: return gd_bb(o, x0, io);
      case InnerKind::NAG: return nag(o, x0, io, sc_hint);
      case InnerKind::SSN: return ssn(o, x0, io);  // surfaces MissingOracle
      default:
        throw VariantMismatch(
            "solve_practical(composite, smoothed): proximal-gradient pairs with "
            "the retained form");
    }
  }
  double stationarity(const Vec& x, const Multipliers& L, double rho) const {
    return al_composite_smooth(p, x, L, rho).grad_x.norm();
  }
  double feasibility(const Vec& x, const Multipliers& L, double rho) const {
    return measures(p, x, L, rho).second;
  }
  Multipliers dual_update(const Vec& x, const Multipliers& L, double rho) const {
    return almkit::dual_update(p, x, L, rho);
  }
  double grad_rho(const Vec& x, const Multipliers& L, double rho) const {
    return al_composite_smooth(p, x, L, rho).d_rho;
  }
  double f_value(const Vec& x) const {
    const double hv = prox_value(p.h, x);
    return p.f.value(x) + (std::isfinite(hv) ? hv : 0.0);
  }
  double al_value(const Vec& x, const Multipliers& L, double rho) const {
    return al_composite_smooth(p, x, L, rho).value;
  }
  double dual_sign_min(const Multipliers& L) const {
    double acc = std::numeric_limits<double>::infinity();
    if (!p.A.empty()) box_sign_min(p.Q, L.lam, &acc);
    if (p.K.kind != ProxKind::Zero) box_sign_min(p.K, L.mu, &acc);
    return std::isfinite(acc) ? acc : 0.0;
  }
};

struct CompositeRetainedAdapter {
  const CompositeProblem& p;

  Multipliers init_multipliers() const {
    Multipliers L;
    if (!p.A.empty()) L.lam = Vec::Zero(p.A.rows);
    if (p.K.kind != ProxKind::Zero) L.mu = Vec::Zero(p.n);
    return L;
  }
  SmoothOracle smooth_part(const Multipliers& L, double rho) const {
    const CompositeProblem* pp = &p;
    const Vec lam = L.lam, mu = L.mu;
    SmoothOracle o;
    o.value_grad = [pp, lam, mu, rho](const Vec& z) {
      double val = pp->f.value(z);
      Vec g = pp->f.grad(z);
      if (!pp->A.empty()) {
        const auto b = env_block(pp->Q, pp->A.apply(z), lam, rho);
        val += b.value;
        g.noalias() += pp->A.adjoint(rho * b.residual);
      }
      if (pp->K.kind != ProxKind::Zero) {
        const auto b = env_block(pp->K, z, mu, rho);
        val += b.value;
        g += rho * b.residual;
      }
      return std::make_pair(val, std::move(g));
    };
    return o;
  }
  InnerReport inner_solve(const Vec& x0, const Multipliers& L, double rho,
                          const InnerOpts& io) const {
    InnerOpts io2 = io;
    // Keep the inner step at most 1/rho so the reported mapping residual
    // dominates the canonical one measured at step 1/rho.
    io2.lipschitz = std::max(io.lipschitz, rho);
    return prox_grad(smooth_part(L, rho), p.h, x0, io2);
  }
  double stationarity(const Vec& x, const Multipliers& L, double rho) const {
    return measures_retained(p, x, L.lam, L.mu, rho).first;
  }
  double feasibility(const Vec& x, const Multipliers& L, double rho) const {
    return measures_retained(p, x, L.lam, L.mu, rho).second;
  }
  Multipliers dual_update(const Vec& x, const Multipliers& L, double rho) const {
    return dual_update_retained(p, x, L.lam, L.mu, rho);
  }
  double grad_rho(const Vec& x, const Multipliers& L, double rho) const {
    return al_composite_retained(p, x, L.lam, L.mu, rho).d_rho;
  }
  double f_value(const Vec& x) const {
    const double hv = prox_value(p.h, x);
    return p.f.value(x) + (std::isfinite(hv) ? hv : 0.0);
  }
  double al_value(const Vec& x, const Multipliers& L, double rho) const {
    return al_composite_retained(p, x, L.lam, L.mu, rho).value;
  }
  double dual_sign_min(const Multipliers& L) const {
    double acc = std::numeric_limits<double>::infinity();
    if (!p.A.empty()) box_sign_min(p.Q, L.lam, &acc);
    if (p.K.kind != ProxKind::Zero) box_sign_min(p.K, L.mu, &acc);
    return std::isfinite(acc) ? acc : 0.0;
  }
};

struct NcAdapter {
  const NcCompositeProblem& p;
  InnerKind kind;

  Multipliers init_multipliers() const {
    Multipliers L;
    if (p.h.kind != ProxKind::Zero) L.nu = Vec::Zero(p.n);
    L.lam = Vec::Zero(p.m);
    if (p.K.kind != ProxKind::Zero) L.mu = Vec::Zero(p.n);
    return L;
  }
  NonconvexEval eval_at_slack_opt(const Vec& x, const Multipliers& L,
                                  double rho) const {
    Vec v(0);
    if (p.m > 0) v = project(p.Q, p.c(x) + L.lam / rho);
    return al_nonconvex(p, x, v, L.nu, L.lam, L.mu, rho);
  }
  InnerReport inner_solve(const Vec& x0, const Multipliers& L, double rho,
                          const InnerOpts& io) const {
    const NcAdapter* self = this;
    const Multipliers Lc = L;
    SmoothOracle o;
    o.value_grad = [self, Lc, rho](const Vec& z) {
      auto e = self->eval_at_slack_opt(z, Lc, rho);
      return std::make_pair(e.value, std::move(e.grad_x));
    };
    switch (kind) {
      case InnerKind::BB: return gd_bb(o, x0, io);
      case InnerKind::NAG: return nag(o, x0, io, 0.0);
      default:
        throw VariantMismatch(
            "solve_practical(nonconvex): only the gradient inner solvers apply");
    }
  }
  double stationarity(const Vec& x, const Multipliers& L, double rho) const {
    return eval_at_slack_opt(x, L, rho).grad_x.norm();
  }
  double feasibility(const Vec& x, const Multipliers& L, double rho) const {
    return measures(p, x, L, rho).second;
  }
  Multipliers dual_update(const Vec& x, const Multipliers& L, double rho) const {
    return almkit::dual_update(p, x, L, rho);
  }
  double grad_rho(const Vec& x, const Multipliers& L, double rho) const {
    return eval_at_slack_opt(x, L, rho).sg_rho;
  }
  double f_value(const Vec& x) const {
    const double hv = prox_value(p.h, x);
    return p.f.value(x) + (std::isfinite(hv) ? hv : 0.0);
  }
  double al_value(const Vec& x, const Multipliers& L, double rho) const {
    return eval_at_slack_opt(x, L, rho).value;
  }
  double dual_sign_min(const Multipliers& L) const {
    double acc = std::numeric_limits<double>::infinity();
    if (p.m > 0) box_sign_min(p.Q, L.lam, &acc);
    if (p.K.kind != ProxKind::Zero) box_sign_min(p.K, L.mu, &acc);
    return std::isfinite(acc) ? acc : 0.0;
  }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Public drivers. The inner-solver choice also selects the AL form for the
// composite class: proximal gradient pairs with the retained-h function, the
// smooth solvers pair with the fully enveloped one.

inline SolveReport solve_practical(const NlpProblem& p, const Vec& x0,
                                   const AlmConfig& cfg,
                                   InnerKind kind = InnerKind::BB) {
  detail::NlpAdapter ad{p, kind, cfg.inner_sc_modulus};
  return detail::run_practical(ad, x0, cfg);
}

inline SolveReport solve_practical(const CompositeProblem& p, const Vec& x0,
                                   const AlmConfig& cfg,
                                   InnerKind kind = InnerKind::BB) {
  if (kind == InnerKind::ProxGrad) {
    detail::CompositeRetainedAdapter ad{p};
    return detail::run_practical(ad, x0, cfg);
  }
  detail::CompositeSmoothAdapter ad{p, kind, cfg.inner_sc_modulus};
  return detail::run_practical(ad, x0, cfg);
}

inline SolveReport solve_practical(const NcCompositeProblem& p, const Vec& x0,
                                   const AlmConfig& cfg,
                                   InnerKind kind = InnerKind::BB) {
  detail::NcAdapter ad{p, kind};
  return detail::run_practical(ad, x0, cfg);
}

// ---------------------------------------------------------------------------
// Mechanical audit of a finished run: penalty monotonicity, the exact
// tolerance ledger (with both schedules floored at the final tolerances),
// multiplier sign feasibility, and nonnegativity of the penalty supergradient.
// Returns an empty string when every check passes. tol_ledger = false skips
// the recursion checks for solvers that do not carry the eta/eps ladder.

inline std::string check_trace_invariants(const SolveReport& rep,
                                          const AlmConfig& cfg,
                                          bool tol_ledger = true) {
  const auto& tr = rep.trace;
  auto fail = [](int k, const std::string& what) {
    return "trace row " + std::to_string(k) + ": " + what;
  };
  for (size_t i = 0; i < tr.size(); ++i) {
    const auto& r = tr[i];
    if (!(r.rho > 0.0) || !std::isfinite(r.rho))
      return fail(r.k, "penalty must be positive and finite");
    if (r.sigma < 0.0 || r.theta < 0.0)
      return fail(r.k, "measures must be nonnegative");
    if (r.grad_rho < -1e-12)
      return fail(r.k, "penalty supergradient must be nonnegative");
    if (r.dual_sign_min < -1e-12)
      return fail(r.k, "sign-constrained multiplier went infeasible");
    if (tol_ledger && (!(r.eta_k > 0.0) || !(r.eps_k > 0.0)))
      return fail(r.k, "tolerances must stay positive");
  }
  for (size_t i = 0; i + 1 < tr.size(); ++i) {
    const auto& a = tr[i];
    const auto& b = tr[i + 1];
    if (b.rho < a.rho) return fail(b.k, "penalty decreased");
    if (!a.accepted) {
      if (!(b.rho > a.rho))
        return fail(b.k, "penalty must strictly increase after a reject");
      if (b.rho > cfg.kappa_pen * a.rho * (1.0 + 1e-15))
        return fail(b.k, "penalty grew beyond the kappa cap");
    } else if (b.rho != a.rho) {
      return fail(b.k, "penalty changed on an accept step");
    }
    if (tol_ledger) {
      const double eta_want =
          a.accepted ? std::max(a.eta_k / b.rho, cfg.final_eta)
                     : std::max(1.0 / b.rho, cfg.final_eta);
      const double eps_want =
          a.accepted
              ? std::max(a.eps_k / std::pow(b.rho, cfg.beta_tol), cfg.final_eps)
              : std::max(std::pow(b.rho, -cfg.alpha_tol), cfg.final_eps);
      if (b.eta_k != eta_want)
        return fail(b.k, "stationarity tolerance broke its recursion");
      if (b.eps_k != eps_want)
        return fail(b.k, "feasibility tolerance broke its recursion");
    }
  }
  if (rep.status == SolveStatus::Converged) {
    if (tr.empty()) return "converged with an empty trace";
    const auto& last = tr.back();
    if (!(last.theta <= cfg.final_eps))
      return fail(last.k, "converged but final feasibility exceeds the target");
    if (cfg.stop_rule != StopRule::RelChange &&
        !(last.sigma <= cfg.final_eta))
      return fail(last.k, "converged but final stationarity exceeds the target");
  }
  return std::string();
}

// ---------------------------------------------------------------------------
// Linearly convergent loop for a mu_f-strongly convex, L_f-smooth objective
// under Ax <= b with A of full row rank. Each subproblem is solved by NAG to
// the certified radius delta_k = (1 - mu_A^2 rho / (12 L_f))^{k/2} D via the
// strong-convexity bound |x - x*| <= |grad AL| / mu_f.

struct ScProblem {
  SmoothFn f;
  double mu_f = 0.0;
  double L_f = 0.0;
  Mat A;
  Vec b;
};

struct ScConfig {
  double rho = 0.0;  // 0 selects the largest admissible value L_f / mu_A^2
  double D = 1.0;
  int max_outer = 100;
  double delta_target = 1e-10;
  InnerOpts inner;
};

inline SolveReport solve_sc_inexact(const ScProblem& p, const Vec& x0,
                                    const ScConfig& cfg) {
  if (!p.f.value || !p.f.grad)
    throw MissingOracle("solve_sc_inexact: f needs value and gradient oracles");
  if (!(p.mu_f > 0.0) || !(p.L_f >= p.mu_f))
    throw MissingOracle(
        "solve_sc_inexact: strong convexity and smoothness constants are required");
  require_finite(x0, "solve_sc_inexact x0");
  require(p.A.rows() >= 1 && p.A.cols() == x0.size() &&
              p.b.size() == p.A.rows(),
          "solve_sc_inexact: A/b dimensions");
  require(cfg.D > 0.0, "solve_sc_inexact: D must be positive");
  require(cfg.max_outer >= 1, "solve_sc_inexact: max_outer must be >= 1");

  const SymMat gram = symmetrize(p.A * p.A.transpose());
  const EigResult eg = jacobi_eig(gram);
  const double muA2 = eg.eigenvalues.minCoeff();
  const double LA2 = eg.eigenvalues.maxCoeff();
  if (!(muA2 > 0.0))
    throw MissingOracle("solve_sc_inexact: A must have full row rank");

  const double rho_max = p.L_f / muA2;
  const double rho = cfg.rho == 0.0 ? rho_max : cfg.rho;
  require(rho > 0.0 && rho <= rho_max * (1.0 + 1e-12),
          "solve_sc_inexact: rho must satisfy rho <= L_f / mu_A^2");

  const double rate = muA2 * rho / (12.0 * p.L_f);
  const double L_smooth = p.L_f + rho * LA2;

  SolveReport rep;
  Vec x = x0;
  Vec lam = Vec::Zero(p.A.rows());

  for (int k = 0; k < cfg.max_outer; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    const Vec x_before = x;
    const double delta_k = std::pow(1.0 - rate, 0.5 * k) * cfg.D;

    const Mat* Am = &p.A;
    const Vec* bv = &p.b;
    const SmoothFn* f = &p.f;
    const Vec lam_c = lam;
    SmoothOracle o;
    o.value_grad = [Am, bv, f, lam_c, rho](const Vec& z) {
      const Vec shifted = *Am * z - *bv + lam_c / rho;
      const Vec rp = shifted.cwiseMax(0.0);
      const double val = f->value(z) + 0.5 * rho * rp.squaredNorm() -
                         lam_c.squaredNorm() / (2.0 * rho);
      Vec g = f->grad(z);
      g.noalias() += rho * (Am->transpose() * rp);
      return std::make_pair(val, std::move(g));
    };

    InnerOpts io = cfg.inner;
    io.tol_grad = p.mu_f * delta_k;
    io.lipschitz = L_smooth;
    const InnerReport ir = nag(o, x, io, p.mu_f);
    x = ir.x;

    const Vec resid = p.A * x - p.b;
    lam = (lam + rho * resid).cwiseMax(0.0);

    IterRecord row;
    row.k = k;
    row.f_val = p.f.value(x);
    row.sigma = ir.grad_norm / p.mu_f;  // certified distance to the subproblem optimum
    row.theta = resid.cwiseMax(0.0).norm();
    row.rho = rho;
    row.inner_iters = ir.iters;
    row.eta_k = io.tol_grad;
    row.eps_k = delta_k;
    row.grad_rho = 0.5 * resid.cwiseMax(0.0).squaredNorm();
    row.dual_sign_min = lam.size() ? lam.minCoeff() : 0.0;
    row.al_val = o.value(x);
    row.x_change = (x - x_before).norm();
    row.accepted = true;
    row.inner_status = ir.status;
    row.wall_ms = detail::ms_since(t0);
    rep.trace.push_back(row);

    if (ir.status != InnerStatus::Converged) {
      rep.status = SolveStatus::InnerStalled;
      break;
    }
    if (delta_k <= cfg.delta_target) {
      rep.status = SolveStatus::Converged;
      break;
    }
  }

  rep.x = x;
  rep.L.lam = lam;
  rep.rho = rho;
  return rep;
}

}  // namespace almkit
