#pragma once

#include <almkit/prox.hpp>

#include <memory>
#include <vector>

namespace almkit {

// Smooth function bundle. hess_vec is optional; solvers that need it check.
struct SmoothFn {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
  std::function<Vec(const Vec&, const Vec&)> hess_vec;  // d -> H(x) d
};

// min f(x) + h(x)  s.t.  A x in Q,  x in K.
// h.kind == Zero means no nonsmooth term, A.empty() means no coupling,
// K.kind == Zero means the whole space; absent blocks carry no multiplier.
struct CompositeProblem {
  Index n = 0;
  SmoothFn f;
  ProxFn h;
  LinOp A;
  ProxFn Q;
  ProxFn K;
};

// min f(x)  s.t.  lc <= c(x) <= uc,  lx <= x <= ux  (boxes, sentinels allowed).
struct NlpProblem {
  Index n = 0, m = 0;
  SmoothFn f;
  std::function<Vec(const Vec&)> c;
  std::function<Mat(const Vec&)> jac_c;
  // (x, y, d) -> sum_i y_i Hess(c_i)(x) d; supply a zero map for affine c
  std::function<Vec(const Vec&, const Vec&, const Vec&)> hess_c_vec;
  ProxFn Qc;  // Box over the c-range; Zero when m == 0
  ProxFn Kx;  // Box over x; Zero when absent
};

// min f(x) + h(x)  s.t.  c(x) in Q,  x in K, where h and Q may be nonconvex;
// the Q-block keeps an explicit slack v in Q.
struct NcCompositeProblem {
  Index n = 0, m = 0;
  SmoothFn f;
  ProxFn h;  // possibly nonconvex; Zero = absent
  std::function<Vec(const Vec&)> c;
  std::function<Mat(const Vec&)> jac_c;
  ProxFn Q;  // projection oracle, possibly nonconvex
  ProxFn K;  // convex set; Zero = absent
};

enum class BlockKind { BinaryBox, PickAtMostOne };

struct BlockSet {
  BlockKind kind = BlockKind::BinaryBox;
  Index dim = 0;
};

// min c^T x  s.t.  A x <= b,  x_j in X_j (discrete block sets).
struct IpProblem {
  Vec c;
  LinOp A;
  Vec b;
  std::vector<BlockSet> blocks;

  Index n() const { return c.size(); }
  Index m() const { return b.size(); }
};

struct Multipliers {
  Vec nu;   // h block
  Vec lam;  // Q block (A x in Q, or c(x) in Q, or c(x) = v)
  Vec mu;   // K block / inequality block

  double squared_norm() const {
    return nu.squaredNorm() + lam.squaredNorm() + mu.squaredNorm();
  }
};

namespace detail {

inline void check_rho(double rho) {
  require(rho > 0.0 && std::isfinite(rho), "al: rho must be positive and finite");
}

// Per-block ingredients of a Moreau-envelope penalty at base point y with
// multiplier w: value contribution, residual y - prox(y), and h(prox).
struct EnvBlock {
  double value = 0.0;  // -|w|^2/(2 rho) + e_rho h(y)
  Vec residual;        // y - prox_{h/rho}(y), scaled by rho gives the gradient
  Vec dual_grad;       // derivative of the AL w.r.t. w
};

inline EnvBlock env_block(const ProxFn& h, const Vec& anchor, const Vec& w, double rho) {
  EnvBlock b;
  const Vec y = anchor + w / rho;
  const Vec p = prox(h, rho, y);
  double hp = 0.0;
  if (h.kind == ProxKind::L1)
    hp = h.gamma * p.lpNorm<1>();
  else if (h.kind == ProxKind::L0)
    hp = prox_value(h, p);
  else if (h.kind == ProxKind::Custom)
    hp = h.custom_value(p);
  b.value = -w.squaredNorm() / (2.0 * rho) + hp + 0.5 * rho * (y - p).squaredNorm();
  b.residual = y - p;
  b.dual_grad = anchor - p;
  return b;
}

}  // namespace detail

struct AlValueGrad {
  double value = 0.0;
  Vec grad_x;
};

struct NlpDualGrads {
  Vec d_lam;
  Vec d_mu;
  double d_rho = 0.0;
};

// Box-form NLP augmented Lagrangian:
//   f(x) + (rho/2) dist^2(c + lam/rho, Qc) + (rho/2) dist^2(x + mu/rho, Kx)
//   - (|lam|^2 + |mu|^2)/(2 rho).
inline AlValueGrad al_nlp(const NlpProblem& p, const Vec& x, const Vec& lam,
                          const Vec& mu, double rho) {
  detail::check_rho(rho);
  require_finite(x, "al_nlp x");
  require(x.size() == p.n, "al_nlp: x dimension mismatch");
  const bool has_c = p.m > 0;
  const bool has_box = p.Kx.kind != ProxKind::Zero;
  require(lam.size() == (has_c ? p.m : 0), "al_nlp: lam dimension mismatch");
  require(mu.size() == (has_box ? p.n : 0), "al_nlp: mu dimension mismatch");

  AlValueGrad out;
  out.value = p.f.value(x);
  out.grad_x = p.f.grad(x);
  if (has_c) {
    const Vec cx = p.c(x);
    const Vec y = cx + lam / rho;
    const Vec res = y - project(p.Qc, y);
    out.value += 0.5 * rho * res.squaredNorm() - lam.squaredNorm() / (2.0 * rho);
    out.grad_x.noalias() += p.jac_c(x).transpose() * (rho * res);
  }
  if (has_box) {
    const Vec y = x + mu / rho;
    const Vec res = y - project(p.Kx, y);
    out.value += 0.5 * rho * res.squaredNorm() - mu.squaredNorm() / (2.0 * rho);
    out.grad_x += rho * res;
  }
  return out;
}

inline NlpDualGrads al_nlp_dual(const NlpProblem& p, const Vec& x, const Vec& lam,
                                const Vec& mu, double rho) {
  detail::check_rho(rho);
  NlpDualGrads out;
  if (p.m > 0) {
    const Vec cx = p.c(x);
    out.d_lam = cx - project(p.Qc, cx + lam / rho);
  } else {
    out.d_lam = Vec(0);
  }
  if (p.Kx.kind != ProxKind::Zero) {
    out.d_mu = x - project(p.Kx, x + mu / rho);
  } else {
    out.d_mu = Vec(0);
  }
  out.d_rho = 0.5 * (out.d_lam.squaredNorm() + out.d_mu.squaredNorm());
  return out;
}

struct CompositeEval {
  double value = 0.0;
  Vec grad_x;
  Vec d_nu, d_lam, d_mu;
  double d_rho = 0.0;
};

// Fully smoothed composite AL: every block replaced by its Moreau envelope.
//   f(x) - (|nu|^2+|lam|^2+|mu|^2)/(2 rho)
//   + e_rho h(x + nu/rho) + e_rho d_Q(Ax + lam/rho) + e_rho d_K(x + mu/rho)
inline CompositeEval al_composite_smooth(const CompositeProblem& p, const Vec& x,
                                         const Multipliers& L, double rho) {
  detail::check_rho(rho);
  require_finite(x, "al_composite x");
  require(x.size() == p.n, "al_composite: x dimension mismatch");
  if (!p.h.convex())
    throw VariantMismatch("al_composite_smooth: nonconvex h, use al_nonconvex");
  if (!p.Q.is_set() || !p.Q.convex() || !p.K.is_set() || !p.K.convex())
    throw VariantMismatch("al_composite_smooth: Q/K must be convex sets");
  const bool has_h = p.h.kind != ProxKind::Zero;
  const bool has_q = !p.A.empty();
  const bool has_k = p.K.kind != ProxKind::Zero;
  require(L.nu.size() == (has_h ? p.n : 0), "al_composite: nu dimension mismatch");
  require(L.lam.size() == (has_q ? p.A.rows : 0), "al_composite: lam dimension mismatch");
  require(L.mu.size() == (has_k ? p.n : 0), "al_composite: mu dimension mismatch");

  CompositeEval out;
  out.value = p.f.value(x);
  out.grad_x = p.f.grad(x);
  out.d_nu = Vec(0);
  out.d_lam = Vec(0);
  out.d_mu = Vec(0);
  if (has_h) {
    const auto b = detail::env_block(p.h, x, L.nu, rho);
    out.value += b.value;
    out.grad_x += rho * b.residual;
    out.d_nu = b.dual_grad;
  }
  if (has_q) {
    const auto b = detail::env_block(p.Q, p.A.apply(x), L.lam, rho);
    out.value += b.value;
    out.grad_x.noalias() += p.A.adjoint(rho * b.residual);
    out.d_lam = b.dual_grad;
  }
  if (has_k) {
    const auto b = detail::env_block(p.K, x, L.mu, rho);
    out.value += b.value;
    out.grad_x += rho * b.residual;
    out.d_mu = b.dual_grad;
  }
  out.d_rho = 0.5 * (out.d_nu.squaredNorm() + out.d_lam.squaredNorm() +
                     out.d_mu.squaredNorm());
  return out;
}

struct RetainedEval {
  double value = 0.0;   // includes h(x)
  Vec smooth_grad_x;    // gradient of everything except h
  const ProxFn* h = nullptr;
  Vec d_lam, d_mu;
  double d_rho = 0.0;
};

// Composite AL with h kept intact; only the Q/K envelopes are smoothed.
inline RetainedEval al_composite_retained(const CompositeProblem& p, const Vec& x,
                                          const Vec& lam, const Vec& mu, double rho) {
  detail::check_rho(rho);
  require_finite(x, "al_retained x");
  require(x.size() == p.n, "al_retained: x dimension mismatch");
  if (!p.Q.is_set() || !p.Q.convex() || !p.K.is_set() || !p.K.convex())
    throw VariantMismatch("al_composite_retained: Q/K must be convex sets");
  const bool has_q = !p.A.empty();
  const bool has_k = p.K.kind != ProxKind::Zero;
  require(lam.size() == (has_q ? p.A.rows : 0), "al_retained: lam dimension mismatch");
  require(mu.size() == (has_k ? p.n : 0), "al_retained: mu dimension mismatch");

  RetainedEval out;
  out.value = p.f.value(x) + prox_value(p.h, x);
  out.smooth_grad_x = p.f.grad(x);
  out.h = &p.h;
  out.d_lam = Vec(0);
  out.d_mu = Vec(0);
  if (has_q) {
    const auto b = detail::env_block(p.Q, p.A.apply(x), lam, rho);
    out.value += b.value;
    out.smooth_grad_x.noalias() += p.A.adjoint(rho * b.residual);
    out.d_lam = b.dual_grad;
  }
  if (has_k) {
    const auto b = detail::env_block(p.K, x, mu, rho);
    out.value += b.value;
    out.smooth_grad_x += rho * b.residual;
    out.d_mu = b.dual_grad;
  }
  out.d_rho = 0.5 * (out.d_lam.squaredNorm() + out.d_mu.squaredNorm());
  return out;
}

struct NonconvexEval {
  double value = 0.0;
  Vec grad_x;
  Vec grad_v;        // gradient of the quadratic coupling w.r.t. the slack v
  Vec v_candidate;   // block minimizer Pi_Q(c(x) + lam/rho)
  Vec sg_nu, sg_lam, sg_mu;
  double sg_rho = 0.0;
};

// Nonconvex composite AL with the Q-block slack v retained:
//   f(x) - (|nu|^2+|lam|^2+|mu|^2)/(2 rho) + e_rho h(x + nu/rho)
//   + (rho/2)|c(x) - v + lam/rho|^2 + e_rho d_K(x + mu/rho).
// For nonsmooth h the x-gradient uses the selection induced by the pinned
// prox tie-breaks; it is the a.e. gradient of the envelope term.
inline NonconvexEval al_nonconvex(const NcCompositeProblem& p, const Vec& x,
                                  const Vec& v, const Vec& nu, const Vec& lam,
                                  const Vec& mu, double rho) {
  detail::check_rho(rho);
  require_finite(x, "al_nonconvex x");
  require(x.size() == p.n, "al_nonconvex: x dimension mismatch");
  require(v.size() == p.m && lam.size() == p.m, "al_nonconvex: Q-block dimension mismatch");
  if (!p.K.is_set() || !p.K.convex())
    throw VariantMismatch("al_nonconvex: K must be a convex set");
  const bool has_h = p.h.kind != ProxKind::Zero;
  const bool has_k = p.K.kind != ProxKind::Zero;
  require(nu.size() == (has_h ? p.n : 0), "al_nonconvex: nu dimension mismatch");
  require(mu.size() == (has_k ? p.n : 0), "al_nonconvex: mu dimension mismatch");

  NonconvexEval out;
  out.value = p.f.value(x);
  out.grad_x = p.f.grad(x);
  out.sg_nu = Vec(0);
  out.sg_mu = Vec(0);
  if (has_h) {
    const auto b = detail::env_block(p.h, x, nu, rho);
    out.value += b.value;
    out.grad_x += rho * b.residual;
    out.sg_nu = b.dual_grad;
  }
  if (p.m > 0) {
    const Vec cx = p.c(x);
    const Vec t = cx - v + lam / rho;
    out.value += 0.5 * rho * t.squaredNorm() - lam.squaredNorm() / (2.0 * rho);
    out.grad_x.noalias() += p.jac_c(x).transpose() * (rho * t);
    out.grad_v = -rho * t;
    out.v_candidate = project(p.Q, cx + lam / rho);
    out.sg_lam = cx - v;
  } else {
    out.grad_v = Vec(0);
    out.v_candidate = Vec(0);
    out.sg_lam = Vec(0);
  }
  if (has_k) {
    const auto b = detail::env_block(p.K, x, mu, rho);
    out.value += b.value;
    out.grad_x += rho * b.residual;
    out.sg_mu = b.dual_grad;
  }
  out.sg_rho = 0.5 * (out.sg_nu.squaredNorm() + out.sg_lam.squaredNorm() +
                      out.sg_mu.squaredNorm());
  return out;
}

struct IpEval {
  double value = 0.0;
  Vec grad_x;
  Vec d_mu;
  double d_rho = 0.0;
};

// Inequality-form IP augmented Lagrangian (no completion term here):
//   c^T x + mu^T (Ax - b) + (rho/2)|(Ax - b)_+|^2
inline IpEval al_ip(const IpProblem& p, const Vec& x, const Vec& mu, double rho) {
  detail::check_rho(rho);
  require_finite(x, "al_ip x");
  require(x.size() == p.n() && mu.size() == p.m(), "al_ip: dimension mismatch");
  if ((mu.array() < 0.0).any())
    throw std::invalid_argument("al_ip: mu must be nonnegative");
  IpEval out;
  const Vec r = p.A.apply(x) - p.b;
  const Vec rp = r.cwiseMax(0.0);
  out.value = p.c.dot(x) + mu.dot(r) + 0.5 * rho * rp.squaredNorm();
  out.grad_x = p.c + p.A.adjoint(mu + rho * rp);
  out.d_mu = r;
  out.d_rho = 0.5 * rp.squaredNorm();
  return out;
}

// One element of the generalized Hessian of the box-form NLP AL:
//   W = Hess f + sum_i psi_i Hess c_i + rho J^T D_c J + rho D_x,
// where psi = rho (c + lam/rho - proj) and the 0/1 selectors are 0 exactly
// when the shifted residual lies in the closed box (ties select 0).
inline LinOp gen_hessian_nlp(const NlpProblem& p, const Vec& x, const Vec& lam,
                             const Vec& mu, double rho) {
  detail::check_rho(rho);
  if (!p.f.hess_vec)
    throw MissingOracle("gen_hessian_nlp: f lacks a second-order oracle");
  if (p.m > 0 && !p.hess_c_vec)
    throw MissingOracle("gen_hessian_nlp: c lacks a second-order oracle");

  struct State {
    NlpProblem p;
    Vec x, psi, dc, dx;
    Mat J;
    double rho;
  };
  auto st = std::make_shared<State>();
  st->p = p;
  st->x = x;
  st->rho = rho;

  auto box_inside = [](const ProxFn& box, const Vec& y) {
    Vec d(y.size());
    for (Index i = 0; i < y.size(); ++i) {
      const double lo = box.lower[i], hi = box.upper[i];
      const bool in = (std::isinf(lo) || y[i] >= lo) && (std::isinf(hi) || y[i] <= hi);
      d[i] = in ? 0.0 : 1.0;
    }
    return d;
  };

  if (p.m > 0) {
    const Vec cx = p.c(x);
    const Vec y = cx + lam / rho;
    st->psi = rho * (y - project(p.Qc, y));
    require(p.Qc.kind == ProxKind::Box, "gen_hessian_nlp: c-range set must be a box");
    st->dc = box_inside(p.Qc, y);
    st->J = p.jac_c(x);
  }
  if (p.Kx.kind != ProxKind::Zero) {
    require(p.Kx.kind == ProxKind::Box, "gen_hessian_nlp: x set must be a box");
    st->dx = box_inside(p.Kx, x + mu / rho);
  }

  LinOp W;
  W.rows = W.cols = p.n;
  auto mul = [st](const Vec& d) -> Vec {
    Vec r = st->p.f.hess_vec(st->x, d);
    if (st->p.m > 0) {
      r += st->p.hess_c_vec(st->x, st->psi, d);
      const Vec Jd = st->J * d;
      r.noalias() += st->rho * (st->J.transpose() * st->dc.cwiseProduct(Jd).eval());
    }
    if (st->dx.size() > 0) r += st->rho * st->dx.cwiseProduct(d);
    return r;
  };
  W.apply = mul;
  W.adjoint = mul;
  return W;
}

}  // namespace almkit
