#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "almkit/alm.hpp"

namespace almkit {

// Thrown when a request exceeds what an exact combinatorial routine can do
// (e.g. enumerating a block that is too large), as opposed to bad input.
struct CapabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Unified primal-dual framework.
//
// One parameterized recursion covers the classical saddle-point methods:
//   x+ = x - tau ((1+a) Gx(x,Y)  - a Gx(x-,Y-))
//   Y+ = Y + sigma [ g ((1+b) Gy(x,Y)  - b Gy(x-,Y-))
//                  + (1-g) ((1+b) Gy(x+,Y) - b Gy(x,Y)) ]
// where Gx/Gy are the primal/dual gradients of the saddle function, (x-,Y-)
// is the previous iterate pair, g = 1 evaluates the dual step at the old
// primal point (Jacobi) and g = 0 at the fresh one (Gauss-Seidel).  The
// k = -1 gradient slots are initialized by copying the k = 0 gradients.

struct PdParams {
  double tau = 0.1;            // primal step
  double sigma = 0.1;          // dual step
  double extrap_primal = 0.0;  // a, weight on the lagged primal gradient
  double extrap_dual = 0.0;    // b, weight on the lagged dual gradient
  double gs_ratio = 1.0;       // g, Jacobi (1) vs Gauss-Seidel (0) dual blend

  void validate() const {
    require(tau > 0.0 && std::isfinite(tau), "PdParams: tau must be positive");
    require(sigma > 0.0 && std::isfinite(sigma),
            "PdParams: sigma must be positive");
    require(extrap_primal >= 0.0 && extrap_primal <= 1.0,
            "PdParams: extrap_primal must lie in [0,1]");
    require(std::isfinite(extrap_dual), "PdParams: extrap_dual must be finite");
    require(gs_ratio >= 0.0 && gs_ratio <= 1.0,
            "PdParams: gs_ratio must lie in [0,1]");
  }
};

// Named settings. PDHG and CP take the dual step at the fresh primal point;
// GDA and OGDA update both sides from the old one.
inline PdParams pd_pdhg(double tau, double sigma) {
  return PdParams{tau, sigma, 0.0, 0.0, 0.0};
}
inline PdParams pd_gda(double tau, double sigma) {
  return PdParams{tau, sigma, 0.0, 0.0, 1.0};
}
inline PdParams pd_cp(double tau, double sigma) {
  return PdParams{tau, sigma, 0.0, 1.0, 0.0};
}
inline PdParams pd_ogda(double tau, double sigma) {
  return PdParams{tau, sigma, 1.0, 1.0, 1.0};
}

struct SaddleOracle {
  std::function<Vec(const Vec&, const Vec&)> grad_x;     // d/dx L(x, Y)
  std::function<Vec(const Vec&, const Vec&)> grad_dual;  // d/dY L(x, Y)
};

struct PdTrace {
  std::vector<Vec> x;    // x[0] = x0, x[k] after k steps
  std::vector<Vec> lam;  // same indexing for the dual iterates
};

// Optional per-step observer: called with (step, x, lam) after each update;
// returning false stops the run early.
using PdObserver = std::function<bool(int, const Vec&, const Vec&)>;

// keep_trace = false records only the seed pair and the pair at exit, which
// keeps long runs at O(1) memory; the observer still sees every step.
inline PdTrace updf(const SaddleOracle& o, const Vec& x0, const Vec& lam0,
                    const PdParams& pd, int iters, const PdObserver& observe,
                    bool keep_trace) {
  pd.validate();
  require(static_cast<bool>(o.grad_x) && static_cast<bool>(o.grad_dual),
          "updf: saddle oracle incomplete");
  require(iters >= 0, "updf: iters must be nonnegative");
  require_finite(x0, "updf x0");
  require_finite(lam0, "updf lam0");

  PdTrace tr;
  if (keep_trace) {
    tr.x.reserve(static_cast<std::size_t>(iters) + 1);
    tr.lam.reserve(static_cast<std::size_t>(iters) + 1);
  }
  tr.x.push_back(x0);
  tr.lam.push_back(lam0);

  Vec x = x0, lam = lam0;
  Vec gx_prev, gd_prev;
  const double a = pd.extrap_primal;
  const double b = pd.extrap_dual;
  const double g = pd.gs_ratio;

  bool stepped = false;
  for (int k = 0; k < iters; ++k) {
    const Vec gx = o.grad_x(x, lam);
    const Vec gd = o.grad_dual(x, lam);
    if (k == 0) {
      gx_prev = gx;
      gd_prev = gd;
    }

    const Vec x_next = x - pd.tau * ((1.0 + a) * gx - a * gx_prev);

    Vec dir = Vec::Zero(lam.size());
    if (g > 0.0) dir += g * ((1.0 + b) * gd - b * gd_prev);
    if (g < 1.0) {
      const Vec gd_fresh = o.grad_dual(x_next, lam);
      dir += (1.0 - g) * ((1.0 + b) * gd_fresh - b * gd);
    }
    const Vec lam_next = lam + pd.sigma * dir;

    gx_prev = gx;
    gd_prev = gd;
    x = x_next;
    lam = lam_next;
    stepped = true;
    if (keep_trace) {
      tr.x.push_back(x);
      tr.lam.push_back(lam);
    }
    if (observe && !observe(k + 1, x, lam)) break;
  }
  if (!keep_trace && stepped) {
    tr.x.push_back(x);
    tr.lam.push_back(lam);
  }
  return tr;
}

inline PdTrace updf(const SaddleOracle& o, const Vec& x0, const Vec& lam0,
                    const PdParams& pd, int iters) {
  return updf(o, x0, lam0, pd, iters, PdObserver(), /*keep_trace=*/true);
}

// Adapter: the fully smoothed composite AL as a saddle function, with the
// multiplier blocks stacked [nu; lam; mu] in that order (absent blocks skipped).
inline Index saddle_dual_dim(const CompositeProblem& p) {
  Index d = 0;
  if (p.h.kind != ProxKind::Zero) d += p.n;
  if (!p.A.empty()) d += p.A.rows;
  if (p.K.kind != ProxKind::Zero) d += p.n;
  return d;
}

inline Multipliers split_dual(const CompositeProblem& p, const Vec& packed) {
  require(packed.size() == saddle_dual_dim(p),
          "split_dual: packed multiplier length mismatch");
  Multipliers L;
  Index off = 0;
  if (p.h.kind != ProxKind::Zero) {
    L.nu = packed.segment(off, p.n);
    off += p.n;
  }
  if (!p.A.empty()) {
    L.lam = packed.segment(off, p.A.rows);
    off += p.A.rows;
  }
  if (p.K.kind != ProxKind::Zero) L.mu = packed.segment(off, p.n);
  return L;
}

inline Vec stack_dual(const CompositeProblem& p, const Vec& nu, const Vec& lam,
                      const Vec& mu) {
  Vec out(saddle_dual_dim(p));
  Index off = 0;
  if (p.h.kind != ProxKind::Zero) {
    out.segment(off, p.n) = nu;
    off += p.n;
  }
  if (!p.A.empty()) {
    out.segment(off, p.A.rows) = lam;
    off += p.A.rows;
  }
  if (p.K.kind != ProxKind::Zero) out.segment(off, p.n) = mu;
  return out;
}

inline SaddleOracle saddle_from_composite(const CompositeProblem& p,
                                          double rho) {
  require(rho > 0.0 && std::isfinite(rho),
          "saddle_from_composite: rho must be positive");
  SaddleOracle o;
  o.grad_x = [p, rho](const Vec& x, const Vec& packed) {
    return al_composite_smooth(p, x, split_dual(p, packed), rho).grad_x;
  };
  o.grad_dual = [p, rho](const Vec& x, const Vec& packed) {
    const CompositeEval e = al_composite_smooth(p, x, split_dual(p, packed), rho);
    return stack_dual(p, e.d_nu, e.d_lam, e.d_mu);
  };
  return o;
}

// ---------------------------------------------------------------------------
// Linearized ALM: single prox-gradient step on the h-retained AL, then the
// dual step. The penalty is left alone, so the method is single-loop.

inline AlmState linearized_alm_step(const CompositeProblem& p,
                                    const AlmState& s, double eta) {
  require(eta > 0.0 && std::isfinite(eta),
          "linearized_alm_step: eta must be positive");
  const RetainedEval e = al_composite_retained(p, s.x, s.L.lam, s.L.mu, s.rho);
  AlmState out = s;
  out.x = prox(p.h, 1.0 / eta, s.x - eta * e.smooth_grad_x);
  const Multipliers up = dual_update_retained(p, out.x, s.L.lam, s.L.mu, s.rho);
  out.L.lam = up.lam;
  out.L.mu = up.mu;
  out.k = s.k + 1;
  return out;
}

// ---------------------------------------------------------------------------
// Proximal ALM: one outer step where the subproblem carries an extra
// (rho m / 2) |x - x_k|^2 regularizer (the M = m I case of the general
// self-adjoint weighting), followed by the usual dual step. With m = 0 this
// is exactly the plain practical outer step. Inner failures are reported
// through inner_out; the step still returns the best iterate found.

inline AlmState proximal_alm_step(const NlpProblem& p, const AlmState& s,
                                  double m, InnerKind kind = InnerKind::BB,
                                  const InnerOpts& opts = InnerOpts{},
                                  InnerReport* inner_out = nullptr) {
  require(m >= 0.0 && std::isfinite(m),
          "proximal_alm_step: m must be nonnegative");
  require(s.rho > 0.0 && std::isfinite(s.rho),
          "proximal_alm_step: state rho must be positive");
  require(kind != InnerKind::ProxGrad,
          "proximal_alm_step: smooth inner solvers only (BB, NAG, SSN)");

  const Vec xk = s.x;
  const Multipliers L = s.L;
  const double rho = s.rho;
  const double w = rho * m;

  SmoothOracle o;
  o.value_grad = [pp = &p, xk, L, rho, w](const Vec& x) {
    const AlValueGrad e = al_nlp(*pp, x, L.lam, L.mu, rho);
    const Vec d = x - xk;
    return std::make_pair(e.value + 0.5 * w * d.squaredNorm(),
                          Vec(e.grad_x + w * d));
  };
  if (kind == InnerKind::SSN) {
    o.hess_vec = [pp = &p, L, rho, w](const Vec& x, const Vec& d) {
      const LinOp W = gen_hessian_nlp(*pp, x, L.lam, L.mu, rho);
      return Vec(W.apply(d) + w * d);
    };
  }

  InnerOpts io = opts;
  if (s.eta_k > 0.0) io.tol_grad = s.eta_k;

  InnerReport ir;
  switch (kind) {
    case InnerKind::BB: ir = gd_bb(o, s.x, io); break;
    case InnerKind::NAG: ir = nag(o, s.x, io); break;
    case InnerKind::SSN: ir = ssn(o, s.x, io); break;
    default: throw VariantMismatch("proximal_alm_step: unsupported inner kind");
  }
  if (inner_out != nullptr) *inner_out = ir;

  AlmState out = s;
  out.x = ir.x;
  out.L = dual_update(p, out.x, L, rho);
  out.k = s.k + 1;
  return out;
}

// ---------------------------------------------------------------------------
// Accelerated dual ALM for equality-coupled convex composites
//   min f(x) + h(x)  s.t.  A x = b  (x in K when h is absent),
// i.e. gradient ascent with Nesterov momentum on the differentiable dual of
// the classical AL. Each outer pass solves the x-subproblem by proximal
// gradient, reads off the dual gradient A x - b, and advances
//   y+ = lam + eta (A x - b),  t+ = (1 + sqrt(1 + 4 t^2)) / 2,
//   lam+ = y+ + ((t - 1) / t+) (y+ - y).

inline double accel_t_next(double t) {
  return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
}

// Per-iteration snapshots for auditing the momentum recursion.
struct AccelDualLog {
  std::vector<Vec> x, y, lam;
};

struct AccelDualConfig {
  double rho = 10.0;       // penalty of the classical AL (fixed)
  double eta = 0.0;        // dual step; 0 picks rho, the inverse dual Lipschitz bound
  double t0 = 1.0;         // momentum seed, in (0, 1]
  int max_outer = 200;
  double final_eta = 1e-8;  // inner stationarity target
  double final_eps = 1e-8;  // feasibility target on |A x - b|
  InnerOpts inner;
  AccelDualLog* log = nullptr;  // optional

  void validate() const {
    require(rho > 0.0 && std::isfinite(rho),
            "AccelDualConfig: rho must be positive");
    require(eta >= 0.0 && std::isfinite(eta),
            "AccelDualConfig: eta must be nonnegative");
    require(t0 > 0.0 && t0 <= 1.0, "AccelDualConfig: t0 must lie in (0,1]");
    require(max_outer >= 1, "AccelDualConfig: max_outer must be positive");
    require(final_eta > 0.0 && final_eps > 0.0,
            "AccelDualConfig: tolerances must be positive");
  }
};

inline SolveReport accel_dual_alm(const CompositeProblem& p, const Vec& x0,
                                  const AccelDualConfig& cfg) {
  cfg.validate();
  require(!p.A.empty(), "accel_dual_alm: coupling operator required");
  require(p.Q.kind == ProxKind::Point,
          "accel_dual_alm: equality coupling A x = b required");
  require(x0.size() == p.n, "accel_dual_alm: x0 dimension mismatch");
  const bool has_h = p.h.kind != ProxKind::Zero;
  const bool has_k = p.K.kind != ProxKind::Zero;
  if (has_h && has_k)
    throw VariantMismatch(
        "accel_dual_alm: at most one nonsmooth block (h or the x-set)");
  if (has_h && !p.h.convex())
    throw VariantMismatch("accel_dual_alm: h must be convex");
  if (has_k && !(p.K.is_set() && p.K.convex()))
    throw VariantMismatch("accel_dual_alm: x-set must be a convex set");
  const ProxFn& nonsmooth = has_h ? p.h : (has_k ? p.K : p.h);
  const Vec& b = p.Q.target;
  const double eta_step = cfg.eta > 0.0 ? cfg.eta : cfg.rho;
  const double rho = cfg.rho;

  SolveReport rep;
  Vec x = x0;
  Vec lam = Vec::Zero(p.A.rows);
  Vec y_prev = lam;  // y_0 coincides with the dual seed
  double t = cfg.t0;
  Vec x_prev = x;

  for (int k = 0; k < cfg.max_outer; ++k) {
    const auto t_start = std::chrono::steady_clock::now();
    const double tol_k =
        std::max(cfg.final_eta, std::pow(0.5, k) / rho);

    SmoothOracle o;
    o.value_grad = [pp = &p, lam, rho, &b](const Vec& z) {
      const Vec r = pp->A.apply(z) - b;
      const double val = pp->f.value(z) + lam.dot(r) + 0.5 * rho * r.squaredNorm();
      Vec g = pp->f.grad(z) + pp->A.adjoint(lam + rho * r);
      return std::make_pair(val, std::move(g));
    };
    InnerOpts io = cfg.inner;
    io.tol_grad = tol_k;
    const InnerReport ir = prox_grad(o, nonsmooth, x, io);
    x = ir.x;

    const Vec r = p.A.apply(x) - b;
    const double theta = r.norm();

    const Vec y_next = lam + eta_step * r;
    const double t_next = accel_t_next(t);
    const Vec lam_next = y_next + ((t - 1.0) / t_next) * (y_next - y_prev);

    if (cfg.log != nullptr) {
      cfg.log->x.push_back(x);
      cfg.log->y.push_back(y_next);
      cfg.log->lam.push_back(lam_next);
    }

    IterRecord row;
    row.k = k;
    row.f_val = p.f.value(x) + (has_h ? prox_value(p.h, x) : 0.0);
    row.sigma = ir.grad_norm;
    row.theta = theta;
    row.rho = rho;
    row.inner_iters = ir.iters;
    row.eta_k = tol_k;
    row.eps_k = cfg.final_eps;
    row.grad_rho = 0.5 * r.squaredNorm();
    row.dual_sign_min = 0.0;  // equality multipliers carry no sign constraint
    row.al_val = ir.f_final + (has_h ? prox_value(p.h, x) : 0.0);
    row.x_change = (x - x_prev).norm();
    row.accepted = true;
    row.inner_status = ir.status;
    row.wall_ms = detail::ms_since(t_start);
    rep.trace.push_back(row);

    if (ir.status != InnerStatus::Converged) {
      rep.status = SolveStatus::InnerStalled;
      lam = lam_next;
      y_prev = y_next;
      t = t_next;
      break;
    }
    if (theta <= cfg.final_eps && ir.grad_norm <= cfg.final_eta) {
      rep.status = SolveStatus::Converged;
      lam = lam_next;
      break;
    }

    lam = lam_next;
    y_prev = y_next;
    t = t_next;
    x_prev = x;
  }

  rep.x = x;
  rep.L.lam = lam;
  rep.rho = rho;
  return rep;
}

// ---------------------------------------------------------------------------
// Two-block ADMM for  min f1(x1) + f2(x2)  s.t.  A1 x1 + A2 x2 = b.
// Each block supplies its AL argmin against a shifted target:
//   minimize(v, rho) = argmin_z f(z) + (rho/2) |A z - v|^2.
// The multiplier moves by exactly tau_admm * rho times the primal residual.

struct AdmmParams {
  double rho = 1.0;
  double tau_admm = 1.0;  // relaxation, in (0, (1 + sqrt 5)/2)

  void validate() const {
    require(rho > 0.0 && std::isfinite(rho), "AdmmParams: rho must be positive");
    const double golden = 0.5 * (1.0 + std::sqrt(5.0));
    require(tau_admm > 0.0 && tau_admm < golden,
            "AdmmParams: tau_admm must lie in (0, (1+sqrt5)/2)");
  }
};

struct AdmmBlock {
  // argmin_z f(z) + (rho/2) |A z - v|^2 for this block's f and A.
  std::function<Vec(const Vec& v, double rho)> minimize;
  // Optional objective oracle, used only for trace reporting.
  std::function<double(const Vec&)> value;
};

// Quadratic block f(z) = 1/2 z'P z + q'z with a dense coupling matrix.
inline AdmmBlock admm_block_quadratic(Mat P, Vec q, Mat A) {
  require_symmetric(P, "admm_block_quadratic P");
  require(P.rows() == q.size(), "admm_block_quadratic: P/q size mismatch");
  require(A.cols() == P.rows(), "admm_block_quadratic: A/P size mismatch");
  auto Ps = std::make_shared<Mat>(std::move(P));
  auto qs = std::make_shared<Vec>(std::move(q));
  auto As = std::make_shared<Mat>(std::move(A));
  AdmmBlock blk;
  blk.minimize = [Ps, qs, As](const Vec& v, double rho) {
    const Mat H = *Ps + rho * As->transpose() * (*As);
    const Vec rhs = rho * As->transpose() * v - *qs;
    Eigen::LDLT<Mat> fac(H);
    require(fac.info() == Eigen::Success,
            "admm_block_quadratic: singular block system");
    return Vec(fac.solve(rhs));
  };
  blk.value = [Ps, qs](const Vec& z) {
    return 0.5 * z.dot(*Ps * z) + qs->dot(z);
  };
  return blk;
}

// Prox-friendly block with A = sign * I (sign in {+1, -1}).
inline AdmmBlock admm_block_prox(ProxFn h, double sign = 1.0) {
  require(sign == 1.0 || sign == -1.0, "admm_block_prox: sign must be +-1");
  AdmmBlock blk;
  blk.minimize = [h, sign](const Vec& v, double rho) {
    return prox(h, rho, sign * v);
  };
  blk.value = [h](const Vec& z) { return prox_value(h, z); };
  return blk;
}

struct AdmmConfig {
  AdmmParams params;
  int max_iter = 500;
  double tol = 1e-8;  // on both primal and dual residual norms

  void validate() const {
    params.validate();
    require(max_iter >= 1, "AdmmConfig: max_iter must be positive");
    require(tol > 0.0 && std::isfinite(tol), "AdmmConfig: tol must be positive");
  }
};

struct AdmmResult {
  SolveReport report;  // x stacks [x1; x2], L.lam holds the multiplier
  Vec x1, x2;
  std::vector<double> primal_resid, dual_resid;
};

inline AdmmResult admm2(const AdmmBlock& b1, const AdmmBlock& b2,
                        const LinOp& A1, const LinOp& A2, const Vec& b,
                        const AdmmConfig& cfg, const Vec& x1_0,
                        const Vec& x2_0) {
  cfg.validate();
  require(static_cast<bool>(b1.minimize) && static_cast<bool>(b2.minimize),
          "admm2: block minimizers required");
  require(!A1.empty() && !A2.empty(), "admm2: coupling operators required");
  require(A1.rows == b.size() && A2.rows == b.size(),
          "admm2: coupling row mismatch");
  require(x1_0.size() == A1.cols && x2_0.size() == A2.cols,
          "admm2: block seed dimension mismatch");
  const double rho = cfg.params.rho;
  const double tau = cfg.params.tau_admm;

  AdmmResult res;
  Vec x1 = x1_0, x2 = x2_0;
  Vec lam = Vec::Zero(b.size());
  res.report.status = SolveStatus::MaxOuter;
  const bool have_values =
      static_cast<bool>(b1.value) && static_cast<bool>(b2.value);

  for (int k = 0; k < cfg.max_iter; ++k) {
    const auto t_start = std::chrono::steady_clock::now();

    const Vec v1 = b - A2.apply(x2) - lam / rho;
    x1 = b1.minimize(v1, rho);
    const Vec v2 = b - A1.apply(x1) - lam / rho;
    const Vec x2_new = b2.minimize(v2, rho);
    if (!x1.allFinite() || !x2_new.allFinite()) {
      res.report.status = SolveStatus::InnerStalled;
      break;
    }

    const Vec r = A1.apply(x1) + A2.apply(x2_new) - b;
    const Vec s = rho * A1.adjoint(A2.apply(x2_new - x2));
    x2 = x2_new;
    lam += tau * rho * r;

    const double pr = r.norm();
    const double dr = s.norm();
    res.primal_resid.push_back(pr);
    res.dual_resid.push_back(dr);

    IterRecord row;
    row.k = k;
    row.f_val = have_values ? b1.value(x1) + b2.value(x2)
                            : std::numeric_limits<double>::quiet_NaN();
    row.sigma = dr;
    row.theta = pr;
    row.rho = rho;
    row.inner_iters = 2;  // two exact block solves
    row.eta_k = cfg.tol;
    row.eps_k = cfg.tol;
    row.grad_rho = 0.5 * r.squaredNorm();
    row.dual_sign_min = 0.0;
    row.al_val = row.f_val + lam.dot(r) + 0.5 * rho * r.squaredNorm();
    row.accepted = true;
    row.inner_status = InnerStatus::Converged;
    row.wall_ms = detail::ms_since(t_start);
    res.report.trace.push_back(row);

    if (pr <= cfg.tol && dr <= cfg.tol) {
      res.report.status = SolveStatus::Converged;
      break;
    }
  }

  res.x1 = x1;
  res.x2 = x2;
  res.report.x = Vec(x1.size() + x2.size());
  res.report.x << x1, x2;
  res.report.L.lam = lam;
  res.report.rho = rho;
  return res;
}

inline AdmmResult admm2(const AdmmBlock& b1, const AdmmBlock& b2,
                        const LinOp& A1, const LinOp& A2, const Vec& b,
                        const AdmmConfig& cfg) {
  return admm2(b1, b2, A1, A2, b, cfg, Vec::Zero(A1.cols), Vec::Zero(A2.cols));
}

// ---------------------------------------------------------------------------
// ALM with block-coordinate descent for block-structured binary programs
//   min c'x  s.t.  A x <= b,  x_j in X_j,
// where each X_j is {0,1}^{n_j} or the "pick at most one" set {0, e_1, ...}.
// Inner sweeps cycle the blocks in order (Gauss-Seidel); each block either
// takes the exact enumerated argmin (Classical) or a projected gradient step
// on the block model (ProxLinear). The outer layer runs the standard
// shifted-residual multiplier step and grows the penalty along its
// supergradient: mu+ = max(mu + rho (A x - b), 0), rho+ = rho + (rho/2)
// |(A x - b)+|^2.

enum class BcdUpdate { Classical, ProxLinear };

struct BcdConfig {
  double rho0 = 1.0;
  double tau = 0.25;     // ProxLinear step
  int max_outer = 100;
  int max_sweeps = 200;  // fallback cap when a sweep keeps moving
  double final_eps = 1e-8;  // on |(A x - b)+|^2
  double rho_limit = 1e16;

  void validate() const {
    require(rho0 > 0.0 && std::isfinite(rho0), "BcdConfig: rho0 must be positive");
    require(tau > 0.0 && std::isfinite(tau), "BcdConfig: tau must be positive");
    require(max_outer >= 1, "BcdConfig: max_outer must be positive");
    require(max_sweeps >= 1, "BcdConfig: max_sweeps must be positive");
    require(final_eps > 0.0, "BcdConfig: final_eps must be positive");
    require(rho_limit > rho0, "BcdConfig: rho_limit must exceed rho0");
  }
};

// Euclidean projection onto a block's feasible set. BinaryBox rounds each
// coordinate, sending the 0.5 tie down; PickAtMostOne selects the largest
// coordinate when it exceeds 0.5 (first index wins ties), else all zeros.
inline Vec project_block(const BlockSet& bs, const Vec& y) {
  require(y.size() == bs.dim, "project_block: dimension mismatch");
  Vec z = Vec::Zero(bs.dim);
  if (bs.kind == BlockKind::BinaryBox) {
    for (Index i = 0; i < bs.dim; ++i) z[i] = y[i] > 0.5 ? 1.0 : 0.0;
  } else {
    Index best = 0;
    for (Index i = 1; i < bs.dim; ++i)
      if (y[i] > y[best]) best = i;
    if (y[best] > 0.5) z[best] = 1.0;
  }
  return z;
}

namespace detail {

constexpr Index kBcdEnumCap = 16;

template <class F>
inline void for_each_block_point(const BlockSet& bs, F&& fn) {
  if (bs.dim > kBcdEnumCap)
    throw CapabilityError("block enumeration capped at " +
                          std::to_string(kBcdEnumCap) + " variables per block");
  if (bs.kind == BlockKind::BinaryBox) {
    const std::uint32_t count = 1u << bs.dim;
    Vec z(bs.dim);
    for (std::uint32_t mask = 0; mask < count; ++mask) {
      for (Index i = 0; i < bs.dim; ++i)
        z[i] = (mask >> static_cast<unsigned>(i)) & 1u ? 1.0 : 0.0;
      fn(z);
    }
  } else {
    Vec z = Vec::Zero(bs.dim);
    fn(z);
    for (Index i = 0; i < bs.dim; ++i) {
      z.setZero();
      z[i] = 1.0;
      fn(z);
    }
  }
}

}  // namespace detail

inline SolveReport alm_bcd_ip(const IpProblem& p, const Vec& x0,
                              const BcdConfig& cfg, BcdUpdate update) {
  cfg.validate();
  require(!p.A.empty(), "alm_bcd_ip: coupling operator required");
  require(p.A.cols == p.n() && p.A.rows == p.m(),
          "alm_bcd_ip: coupling dimensions mismatch");
  require(p.m() >= 1, "alm_bcd_ip: at least one constraint row required");
  require(x0.size() == p.n(), "alm_bcd_ip: x0 dimension mismatch");
  Index dim_sum = 0;
  for (const BlockSet& bs : p.blocks) {
    require(bs.dim >= 1, "alm_bcd_ip: empty block");
    dim_sum += bs.dim;
  }
  require(dim_sum == p.n(), "alm_bcd_ip: block dims must tile the variables");

  const Index n = p.n(), m = p.m();

  // Materialize the coupling once; the sweeps need explicit column blocks.
  Mat A(m, n);
  {
    Vec e = Vec::Zero(n);
    for (Index j = 0; j < n; ++j) {
      e[j] = 1.0;
      A.col(j) = p.A.apply(e);
      e[j] = 0.0;
    }
  }
  std::vector<Index> offset(p.blocks.size());
  {
    Index off = 0;
    for (std::size_t j = 0; j < p.blocks.size(); ++j) {
      offset[j] = off;
      off += p.blocks[j].dim;
    }
  }

  // Snap the seed onto the discrete sets so every iterate is block-feasible.
  Vec x(n);
  for (std::size_t j = 0; j < p.blocks.size(); ++j)
    x.segment(offset[j], p.blocks[j].dim) =
        project_block(p.blocks[j], x0.segment(offset[j], p.blocks[j].dim));

  Vec mu = Vec::Zero(m);
  double rho = cfg.rho0;
  Vec r = A * x - p.b;

  SolveReport rep;
  rep.status = SolveStatus::MaxOuter;

  for (int k = 0; k < cfg.max_outer; ++k) {
    const auto t_start = std::chrono::steady_clock::now();
    const Vec x_outer_prev = x;

    int sweeps = 0;
    bool settled = false;
    double last_move = 0.0;
    while (sweeps < cfg.max_sweeps) {
      ++sweeps;
      double move_sq = 0.0;
      for (std::size_t j = 0; j < p.blocks.size(); ++j) {
        const BlockSet& bs = p.blocks[j];
        const auto Aj = A.middleCols(offset[j], bs.dim);
        const Vec cj = p.c.segment(offset[j], bs.dim);
        const Vec zj = x.segment(offset[j], bs.dim);
        const Vec r_base = r - Aj * zj;

        Vec z_new = zj;
        if (update == BcdUpdate::Classical) {
          // Exact block argmin of the AL over the block's discrete set,
          // seeded with the incumbent so ties never move the block.
          const auto score = [&](const Vec& z) {
            const Vec rz = r_base + Aj * z;
            return cj.dot(z) + mu.dot(Aj * z) +
                   0.5 * rho * rz.cwiseMax(0.0).squaredNorm();
          };
          double best = score(zj);
          detail::for_each_block_point(bs, [&](const Vec& z) {
            const double sc = score(z);
            if (sc < best) {
              best = sc;
              z_new = z;
            }
          });
        } else {
          const Vec gj = cj + Aj.transpose() * mu +
                         rho * (Aj.transpose() * r.cwiseMax(0.0));
          z_new = project_block(bs, zj - cfg.tau * gj);
        }

        const double dsq = (z_new - zj).squaredNorm();
        if (dsq > 0.0) {
          x.segment(offset[j], bs.dim) = z_new;
          r = r_base + Aj * z_new;
          move_sq += dsq;
        }
      }
      r = A * x - p.b;  // shed the incremental rounding once per sweep
      last_move = std::sqrt(move_sq);
      if (move_sq == 0.0) {
        settled = true;
        break;
      }
    }

    const double theta = r.cwiseMax(0.0).squaredNorm();
    const double f_val = p.c.dot(x);

    IterRecord row;
    row.k = k;
    row.f_val = f_val;
    row.sigma = settled ? 0.0 : last_move;
    row.theta = theta;
    row.rho = rho;
    row.inner_iters = sweeps;
    row.eta_k = 0.0;  // the inner criterion is the exact no-move sweep
    row.eps_k = cfg.final_eps;
    row.grad_rho = 0.5 * theta;
    row.dual_sign_min = mu.minCoeff();
    row.al_val = f_val + mu.dot(r) + 0.5 * rho * theta;
    row.x_change = (x - x_outer_prev).norm();
    const bool feas_ok = theta <= cfg.final_eps;
    row.accepted = feas_ok;
    row.inner_status =
        settled ? InnerStatus::Converged : InnerStatus::MaxIter;
    row.wall_ms = detail::ms_since(t_start);
    rep.trace.push_back(row);

    if (feas_ok && settled) {
      rep.status = SolveStatus::Converged;
      break;
    }

    mu = (mu + rho * r).cwiseMax(0.0);
    if (!feas_ok) {
      // supergradient ascent in rho with step sigma = rho (grad is theta / 2);
      // feasible rounds leave the penalty alone so the accept/reject branch
      // structure stays mechanically auditable from the trace.
      rho = rho + 0.5 * rho * theta;
      if (!(rho <= cfg.rho_limit)) {
        rep.status = SolveStatus::InfeasibleSuspected;
        break;
      }
    }
  }

  rep.x = x;
  rep.L.mu = mu;
  rep.rho = rho;
  return rep;
}

}  // namespace almkit
