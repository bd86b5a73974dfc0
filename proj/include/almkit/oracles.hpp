#pragma once

// Reference oracles: small, slow, independent solvers used to validate the
// fast paths.  Each oracle enumerates or iterates exhaustively within a hard
// capability cap and throws CapabilityError beyond it.  None of them share
// code with the solvers they check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "numcore.hpp"
#include "prox.hpp"
#include "alfn.hpp"
#include "subsolve.hpp"
#include "problems.hpp"
#include "variants.hpp"

namespace almkit {

namespace detail {

// Visit every k-subset of {0,...,total-1} in lexicographic order.
template <typename Fn>
void for_each_subset_of_size(Index total, Index k, Fn&& fn) {
  if (k < 0 || k > total) return;
  std::vector<Index> idx(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    fn(idx);
    // advance
    Index j = k - 1;
    while (j >= 0 && idx[static_cast<std::size_t>(j)] == total - k + j) --j;
    if (j < 0) break;
    ++idx[static_cast<std::size_t>(j)];
    for (Index t = j + 1; t < k; ++t)
      idx[static_cast<std::size_t>(t)] = idx[static_cast<std::size_t>(t - 1)] + 1;
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Vertex enumeration for box-constrained linear programs
//
//   minimize c'x  subject to  lq <= Ax <= uq,  lk <= x <= uk.
//
// Every vertex of the (assumed nonempty, bounded) feasible polytope is the
// unique solution of n constraint rows held at one of their finite bounds.
// We enumerate all C(m+n, n) row subsets and, per subset, all 2^n bound
// assignments, solve the n-by-n system, filter by feasibility, and keep the
// best objective.  Hard cap n <= 10.
// ---------------------------------------------------------------------------

inline double lp_vertex(const Vec& c, const Mat& A, const Vec& lq,
                        const Vec& uq, const Vec& lk, const Vec& uk,
                        Vec* argmin_out = nullptr) {
  const Index n = c.size();
  const Index m = A.rows();
  if (n > 10)
    throw CapabilityError("lp_vertex: dimension cap is n <= 10, got n = " +
                          std::to_string(n));
  require(A.cols() == n, "lp_vertex: A column count must match c");
  require(lq.size() == m && uq.size() == m, "lp_vertex: row bounds size");
  require(lk.size() == n && uk.size() == n, "lp_vertex: box bounds size");

  const double feas_tol = 1e-8;
  double best = std::numeric_limits<double>::infinity();
  Vec best_x;

  // Row i < m is (A.row(i), lq_i, uq_i); row m + j is (e_j', lk_j, uk_j).
  auto row_of = [&](Index r) -> Vec {
    if (r < m) return A.row(r).transpose();
    Vec e = Vec::Zero(n);
    e[r - m] = 1.0;
    return e;
  };
  auto lo_of = [&](Index r) { return r < m ? lq[r] : lk[r - m]; };
  auto hi_of = [&](Index r) { return r < m ? uq[r] : uk[r - m]; };

  auto feasible = [&](const Vec& x) {
    for (Index j = 0; j < n; ++j)
      if (x[j] < lk[j] - feas_tol || x[j] > uk[j] + feas_tol) return false;
    const Vec Ax = A * x;
    for (Index i = 0; i < m; ++i)
      if (Ax[i] < lq[i] - feas_tol || Ax[i] > uq[i] + feas_tol) return false;
    return true;
  };

  detail::for_each_subset_of_size(m + n, n, [&](const std::vector<Index>& rows) {
    Mat M(n, n);
    for (Index t = 0; t < n; ++t) M.row(t) = row_of(rows[static_cast<std::size_t>(t)]).transpose();
    Eigen::FullPivLU<Mat> lu(M);
    if (!lu.isInvertible()) return;
    const std::uint64_t combos = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < combos; ++mask) {
      Vec rhs(n);
      bool ok = true;
      for (Index t = 0; t < n && ok; ++t) {
        const Index r = rows[static_cast<std::size_t>(t)];
        const double b = (mask >> t) & 1u ? hi_of(r) : lo_of(r);
        if (!std::isfinite(b)) ok = false;
        rhs[t] = b;
      }
      if (!ok) continue;
      const Vec x = lu.solve(rhs);
      if (!x.allFinite()) continue;
      if (!feasible(x)) continue;
      const double val = c.dot(x);
      if (val < best) {
        best = val;
        best_x = x;
      }
    }
  });

  if (!std::isfinite(best))
    throw std::runtime_error("lp_vertex: no feasible vertex found (problem "
                             "infeasible or unbounded data)");
  if (argmin_out) *argmin_out = best_x;
  return best;
}

// Convenience overload that peels the pieces back out of a generated
// box-LP instance (linear objective, box range set, box domain set).
inline double lp_vertex(const Instance& inst, Vec* argmin_out = nullptr) {
  const CompositeProblem* p = as_composite(inst);
  require(p != nullptr, "lp_vertex: instance does not hold a composite problem");
  require(p->Q.kind == ProxKind::Box && p->K.kind == ProxKind::Box,
          "lp_vertex: expects box range and box domain constraints");
  const Index n = p->n;
  const Vec c = p->f.grad(Vec::Zero(n));  // linear objective: gradient is c
  require(!p->A.empty(), "lp_vertex: instance has no linear coupling");
  Mat A(p->A.rows, n);
  for (Index j = 0; j < n; ++j) {
    Vec e = Vec::Zero(n);
    e[j] = 1.0;
    A.col(j) = p->A.apply(e);
  }
  return lp_vertex(c, A, p->Q.lower, p->Q.upper, p->K.lower, p->K.upper,
                   argmin_out);
}

// ---------------------------------------------------------------------------
// Brute force over block-structured integer programs
//
//   minimize c'x  subject to  Ax <= b,  x_j in X_j (binary box / pick<=1).
//
// Enumerates the cartesian product of the block-feasible sets.  Hard cap:
// 20 variables total.
// ---------------------------------------------------------------------------

struct IpOracleResult {
  Vec x;
  double value = std::numeric_limits<double>::infinity();
  bool feasible = false;
};

namespace detail {

template <typename Fn>
void for_each_ip_point(const IpProblem& p, Fn&& fn) {
  const Index n = p.n();
  std::vector<Index> offs;
  Index off = 0;
  for (const auto& bs : p.blocks) {
    offs.push_back(off);
    off += bs.dim;
  }
  Vec x = Vec::Zero(n);
  // depth-first product over blocks
  auto rec = [&](auto&& self, std::size_t bi) -> void {
    if (bi == p.blocks.size()) {
      fn(x);
      return;
    }
    const auto& bs = p.blocks[bi];
    const Index o = offs[bi];
    for_each_block_point(bs, [&](const Vec& z) {
      x.segment(o, bs.dim) = z;
      self(self, bi + 1);
    });
  };
  rec(rec, 0);
}

}  // namespace detail

inline IpOracleResult ip_bruteforce(const IpProblem& p) {
  const Index n = p.n();
  if (n > 20)
    throw CapabilityError("ip_bruteforce: cap is 20 variables, got " +
                          std::to_string(n));
  const double feas_tol = 1e-9;
  const Mat* Abf = nullptr;
  Mat Amat(p.m(), n);
  for (Index j = 0; j < n; ++j) {
    Vec e = Vec::Zero(n);
    e[j] = 1.0;
    Amat.col(j) = p.A.apply(e);
  }
  Abf = &Amat;
  IpOracleResult out;
  detail::for_each_ip_point(p, [&](const Vec& x) {
    const Vec r = (*Abf) * x - p.b;
    if (r.maxCoeff() > feas_tol) return;
    const double val = p.c.dot(x);
    if (!out.feasible || val < out.value) {
      out.feasible = true;
      out.value = val;
      out.x = x;
    }
  });
  if (!out.feasible)
    throw std::runtime_error("ip_bruteforce: no feasible point");
  return out;
}

// Exact minimum of the integer-program augmented Lagrangian over the block
// sets at fixed (mu, rho); used for weak-duality sandwich checks.
inline double ip_al_min(const IpProblem& p, const Vec& mu, double rho) {
  const Index n = p.n();
  if (n > 20)
    throw CapabilityError("ip_al_min: cap is 20 variables, got " +
                          std::to_string(n));
  double best = std::numeric_limits<double>::infinity();
  detail::for_each_ip_point(p, [&](const Vec& x) {
    best = std::min(best, al_ip(p, x, mu, rho).value);
  });
  return best;
}

// ---------------------------------------------------------------------------
// Active-set enumeration for inequality-constrained convex QPs
//
//   minimize (1/2) x'Hx + g'x  subject to  Ax <= b,   H symmetric positive
//   definite, m <= 6 rows.
//
// For each of the 2^m candidate active sets S solve the equality KKT system
//   [H  A_S'] [x     ]   [-g ]
//   [A_S  0 ] [lambda] = [b_S]
// and accept the first solution that is primal feasible with nonnegative
// multipliers.  Convexity makes any accepted point globally optimal.
// ---------------------------------------------------------------------------

struct QpOracleResult {
  Vec x;
  Vec lambda;  // full-length multipliers (zeros off the active set)
  double value = std::numeric_limits<double>::infinity();
};

inline QpOracleResult qp_kkt(const Mat& H, const Vec& g, const Mat& A,
                             const Vec& b) {
  const Index n = g.size();
  const Index m = A.rows();
  if (m > 6)
    throw CapabilityError("qp_kkt: cap is m <= 6 inequality rows, got " +
                          std::to_string(m));
  require(H.rows() == n && H.cols() == n, "qp_kkt: H must be n-by-n");
  require(A.cols() == n || m == 0, "qp_kkt: A column count must match g");
  require_symmetric(H, "qp_kkt H");

  const double feas_tol = 1e-9;
  const double dual_tol = 1e-9;
  QpOracleResult best;
  bool found = false;

  const std::uint64_t sets = std::uint64_t{1} << m;
  for (std::uint64_t mask = 0; mask < sets; ++mask) {
    std::vector<Index> act;
    for (Index i = 0; i < m; ++i)
      if ((mask >> i) & 1u) act.push_back(i);
    const Index k = static_cast<Index>(act.size());
    Mat K = Mat::Zero(n + k, n + k);
    K.topLeftCorner(n, n) = H;
    Vec rhs(n + k);
    rhs.head(n) = -g;
    for (Index t = 0; t < k; ++t) {
      K.block(n + t, 0, 1, n) = A.row(act[static_cast<std::size_t>(t)]);
      K.block(0, n + t, n, 1) =
          A.row(act[static_cast<std::size_t>(t)]).transpose();
      rhs[n + t] = b[act[static_cast<std::size_t>(t)]];
    }
    Eigen::FullPivLU<Mat> lu(K);
    if (!lu.isInvertible()) continue;
    const Vec sol = lu.solve(rhs);
    if (!sol.allFinite()) continue;
    const Vec x = sol.head(n);
    const Vec lam_act = sol.tail(k);
    if (k > 0 && lam_act.minCoeff() < -dual_tol) continue;
    if (m > 0) {
      const Vec r = A * x - b;
      if (r.maxCoeff() > feas_tol) continue;
    }
    const double val = 0.5 * x.dot(H * x) + g.dot(x);
    if (!found || val < best.value) {
      found = true;
      best.x = x;
      best.value = val;
      best.lambda = Vec::Zero(m);
      for (Index t = 0; t < k; ++t)
        best.lambda[act[static_cast<std::size_t>(t)]] = lam_act[t];
    }
  }
  if (!found)
    throw std::runtime_error(
        "qp_kkt: no KKT-consistent active set (check convexity/feasibility)");
  return best;
}

// ---------------------------------------------------------------------------
// Long-horizon proximal-gradient reference for composite problems without a
// linear coupling (minimize f(x) + h(x)).  Runs a fixed large iteration
// budget at a vanishing tolerance and reports the final objective value.
// ---------------------------------------------------------------------------

inline double ref_prox_grad(const CompositeProblem& p, const Vec& x0,
                            long iters = 100000, Vec* argmin_out = nullptr) {
  require(p.A.empty(),
          "ref_prox_grad: reference handles problems without linear coupling");
  require(p.K.kind == ProxKind::Zero,
          "ref_prox_grad: domain set must be absent");
  SmoothOracle f = make_oracle(p.f.value, p.f.grad);
  InnerOpts io;
  io.max_iter = iters;
  io.tol_grad = 1e-14;
  InnerReport rep = prox_grad(f, p.h, x0, io);
  if (argmin_out) *argmin_out = rep.x;
  return p.f.value(rep.x) + prox_value(p.h, rep.x);
}

inline double ref_prox_grad(const Instance& inst, long iters = 100000,
                            Vec* argmin_out = nullptr) {
  const CompositeProblem* p = as_composite(inst);
  require(p != nullptr,
          "ref_prox_grad: instance does not hold a composite problem");
  Vec x0 = inst.x0.size() == p->n ? inst.x0 : Vec::Zero(p->n);
  return ref_prox_grad(*p, x0, iters, argmin_out);
}

}  // namespace almkit
