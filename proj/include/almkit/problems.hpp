#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "almkit/alfn.hpp"

namespace almkit {

// ---------------------------------------------------------------------------
// Instance: a generated problem in one of the four model classes, plus the
// metadata the bench harness and the tests care about (name, seed, reference
// solution when one is known, and how that reference was obtained).

struct KnownOptimum {
  double value = 0.0;
  // How the value is known: "analytic", "planted", "bruteforce", "active-set".
  std::string certificate;
};

struct Instance {
  std::string name;
  std::uint64_t seed = 0;
  std::variant<CompositeProblem, NlpProblem, NcCompositeProblem, IpProblem>
      problem;
  std::optional<KnownOptimum> known;
  Vec x_star;      // reference optimum when available, size 0 otherwise
  Vec x_feasible;  // feasibility witness (planted IP seeds), size 0 otherwise
  Vec x0;          // suggested start point
  std::string note;  // construction warnings, empty when clean

  Index dim() const {
    return std::visit(
        [](const auto& p) -> Index {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, IpProblem>)
            return p.n();
          else
            return p.n;
        },
        problem);
  }
};

inline const CompositeProblem* as_composite(const Instance& inst) {
  return std::get_if<CompositeProblem>(&inst.problem);
}
inline const NlpProblem* as_nlp(const Instance& inst) {
  return std::get_if<NlpProblem>(&inst.problem);
}
inline const NcCompositeProblem* as_nc(const Instance& inst) {
  return std::get_if<NcCompositeProblem>(&inst.problem);
}
inline const IpProblem* as_ip(const Instance& inst) {
  return std::get_if<IpProblem>(&inst.problem);
}

// Relative error against a reference point, guarded for tiny references.
inline double rel_err(const Vec& x, const Vec& x_star) {
  require(x.size() == x_star.size(), "rel_err: dimension mismatch");
  return (x - x_star).norm() / std::max(x_star.norm(), 1.0);
}

// ---------------------------------------------------------------------------
// Shared smooth-objective builders. Data is held behind shared_ptr so the
// closures stay cheap to copy.

inline SmoothFn smooth_linear(Vec c) {
  auto cs = std::make_shared<Vec>(std::move(c));
  SmoothFn f;
  f.value = [cs](const Vec& x) { return cs->dot(x); };
  f.grad = [cs](const Vec&) { return *cs; };
  f.hess_vec = [cs](const Vec&, const Vec& d) { return Vec(Vec::Zero(d.size())); };
  return f;
}

inline SmoothFn smooth_quadratic(Mat H, Vec g) {
  require_symmetric(H, "smooth_quadratic H");
  require(H.rows() == g.size(), "smooth_quadratic: H/g size mismatch");
  auto Hs = std::make_shared<Mat>(std::move(H));
  auto gs = std::make_shared<Vec>(std::move(g));
  SmoothFn f;
  f.value = [Hs, gs](const Vec& x) { return 0.5 * x.dot(*Hs * x) + gs->dot(x); };
  f.grad = [Hs, gs](const Vec& x) { return Vec(*Hs * x + *gs); };
  f.hess_vec = [Hs](const Vec&, const Vec& d) { return Vec(*Hs * d); };
  return f;
}

inline SmoothFn smooth_least_squares(Mat A, Vec b) {
  require(A.rows() == b.size(), "smooth_least_squares: A/b size mismatch");
  auto As = std::make_shared<Mat>(std::move(A));
  auto bs = std::make_shared<Vec>(std::move(b));
  SmoothFn f;
  f.value = [As, bs](const Vec& x) { return 0.5 * (*As * x - *bs).squaredNorm(); };
  f.grad = [As, bs](const Vec& x) {
    return Vec(As->transpose() * (*As * x - *bs));
  };
  f.hess_vec = [As](const Vec&, const Vec& d) {
    return Vec(As->transpose() * (*As * d));
  };
  return f;
}

inline SmoothFn smooth_zero(Index n) {
  SmoothFn f;
  f.value = [](const Vec&) { return 0.0; };
  f.grad = [n](const Vec&) { return Vec(Vec::Zero(n)); };
  f.hess_vec = [](const Vec&, const Vec& d) { return Vec(Vec::Zero(d.size())); };
  return f;
}

namespace detail {

inline Vec neg_inf_vec(Index n) {
  return Vec::Constant(n, -std::numeric_limits<double>::infinity());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// l1-regularized least squares,  min 1/2 |Ax - b|^2 + gamma |x|_1,
// as an h-only composite. When gamma clears |A'b|_inf the zero vector is
// optimal and gets recorded as an analytic reference.

inline Instance lasso(Mat A, Vec b, double gamma) {
  require(gamma > 0.0 && std::isfinite(gamma), "lasso: gamma must be positive");
  require(A.rows() == b.size(), "lasso: A/b size mismatch");
  const Index n = A.cols();
  const double null_threshold = (A.transpose() * b).lpNorm<Eigen::Infinity>();
  const double half_b2 = 0.5 * b.squaredNorm();

  CompositeProblem p;
  p.n = n;
  p.f = smooth_least_squares(std::move(A), std::move(b));
  p.h = ProxFn::l1(gamma);

  Instance inst;
  inst.name = "lasso";
  inst.problem = std::move(p);
  inst.x0 = Vec::Zero(n);
  if (gamma >= null_threshold) {
    inst.known = KnownOptimum{half_b2, "analytic"};
    inst.x_star = Vec::Zero(n);
  }
  return inst;
}

// The dual of the problem above,  min 1/2 |v - b|^2  s.t.  |A'v|_inf <= gamma,
// written with the affine constraint map c(v) = A'v ranged in the box
// [-gamma, gamma]^n. Strong duality ties the two optimal values together:
// primal optimum + dual optimum = 1/2 |b|^2.
inline Instance lasso_dual(Mat A, Vec b, double gamma) {
  require(gamma > 0.0 && std::isfinite(gamma),
          "lasso_dual: gamma must be positive");
  require(A.rows() == b.size(), "lasso_dual: A/b size mismatch");
  const Index m_var = A.rows();  // the dual variable lives in the row space
  const Index n_con = A.cols();
  auto At = std::make_shared<Mat>(A.transpose());
  auto bs = std::make_shared<Vec>(std::move(b));

  NlpProblem p;
  p.n = m_var;
  p.m = n_con;
  p.f.value = [bs](const Vec& v) { return 0.5 * (v - *bs).squaredNorm(); };
  p.f.grad = [bs](const Vec& v) { return Vec(v - *bs); };
  p.f.hess_vec = [](const Vec&, const Vec& d) { return d; };
  p.c = [At](const Vec& v) { return Vec(*At * v); };
  p.jac_c = [At](const Vec&) { return *At; };
  p.hess_c_vec = [](const Vec&, const Vec&, const Vec& d) {
    return Vec(Vec::Zero(d.size()));
  };
  p.Qc = ProxFn::box(Vec::Constant(n_con, -gamma), Vec::Constant(n_con, gamma));

  Instance inst;
  inst.name = "lasso-dual";
  inst.problem = std::move(p);
  inst.x0 = Vec::Zero(m_var);
  return inst;
}

// ---------------------------------------------------------------------------
// Basis pursuit,  min |x|_1  s.t.  Ax = b,  with a planted sparse solution.
// A has orthonormal rows; the k nonzero entries sit at distinct uniformly
// sampled indices with magnitudes sign * 10^(d u / 20), sign uniform on
// {-1, 1} and u uniform on [0, 1). flip_signs negates every sign draw, which
// by linearity negates both the planted solution and the right-hand side.

inline Instance basis_pursuit_instance(Rng& rng, Index m, Index n, Index k,
                                       double dyn_range_db,
                                       bool flip_signs = false) {
  require(m >= 1 && n >= 1, "basis_pursuit: dimensions must be positive");
  require(m <= n, "basis_pursuit: need m <= n");
  require(k >= 0 && k <= n, "basis_pursuit: need 0 <= k <= n");
  require(dyn_range_db >= 0.0 && std::isfinite(dyn_range_db),
          "basis_pursuit: dynamic range must be nonnegative");

  Mat A = rand_orthonormal_rows(rng, m, n);

  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index t = 0; t < k; ++t) {
    const int j = rng.uniform_int(static_cast<int>(t), static_cast<int>(n) - 1);
    std::swap(idx[static_cast<std::size_t>(t)], idx[static_cast<std::size_t>(j)]);
  }

  Vec x_star = Vec::Zero(n);
  for (Index t = 0; t < k; ++t) {
    double sign = rng.uniform_int(0, 1) == 0 ? -1.0 : 1.0;
    if (flip_signs) sign = -sign;
    const double mag = std::pow(10.0, dyn_range_db * rng.unit() / 20.0);
    x_star[idx[static_cast<std::size_t>(t)]] = sign * mag;
  }
  Vec b = A * x_star;

  CompositeProblem p;
  p.n = n;
  p.f = smooth_zero(n);
  p.h = ProxFn::l1(1.0);
  p.A = dense_op(std::move(A));
  p.Q = ProxFn::point(b);

  Instance inst;
  inst.name = "basis-pursuit";
  inst.problem = std::move(p);
  inst.known = KnownOptimum{x_star.lpNorm<1>(), "planted"};
  inst.x_star = std::move(x_star);
  inst.x0 = Vec::Zero(n);
  return inst;
}

// ---------------------------------------------------------------------------
// Box-constrained LP,  min c'x  s.t.  lq <= Ax <= uq,  lk <= x <= uk.

inline Instance lp_box(Vec c, Mat A, Vec lq, Vec uq, Vec lk, Vec uk) {
  require(A.cols() == c.size(), "lp_box: A/c size mismatch");
  require(A.rows() == lq.size() && A.rows() == uq.size(),
          "lp_box: range bound size mismatch");
  require(c.size() == lk.size() && c.size() == uk.size(),
          "lp_box: variable bound size mismatch");
  const Index n = c.size();

  CompositeProblem p;
  p.n = n;
  p.f = smooth_linear(std::move(c));
  p.A = dense_op(std::move(A));
  p.Q = ProxFn::box(std::move(lq), std::move(uq));
  p.K = ProxFn::box(std::move(lk), std::move(uk));

  Instance inst;
  inst.name = "lp-box";
  inst.x0 = project(p.K, Vec::Zero(n));
  inst.problem = std::move(p);
  return inst;
}

// ---------------------------------------------------------------------------
// Sparse portfolio selection,
//   min 1/2 x'Q x + reg(x)  s.t.  g'x >= varrho,  1'x <= 1,  0 <= x <= u.
// The two return/budget constraints enter as the affine map
// [-g'; 1'] x ranged in (-inf, [-varrho; 1]]. An l1 regularizer (or none)
// keeps the instance convex; l0 moves it to the slack-form nonconvex class.

enum class PortfolioReg { None, L1, L0 };

// Largest return reachable inside the budget/box set, by the greedy
// water-filling argument (assets taken in decreasing return order).
inline double portfolio_max_return(const Vec& gamma_vec, double u) {
  require(u > 0.0 && std::isfinite(u), "portfolio_max_return: u must be positive");
  Vec sorted = gamma_vec;
  std::sort(sorted.data(), sorted.data() + sorted.size(),
            [](double a, double b) { return a > b; });
  double budget = 1.0, ret = 0.0;
  for (Index i = 0; i < sorted.size() && budget > 0.0; ++i) {
    if (sorted[i] <= 0.0) break;  // adding more cannot raise the return
    const double take = std::min(u, budget);
    ret += sorted[i] * take;
    budget -= take;
  }
  return ret;
}

inline Instance portfolio(Mat Qmat, Vec gamma_vec, double varrho, double u,
                          PortfolioReg reg = PortfolioReg::None,
                          double reg_weight = 0.0) {
  require_symmetric(Qmat, "portfolio Q");
  require(Qmat.rows() == gamma_vec.size(), "portfolio: Q/gamma size mismatch");
  require(u > 0.0 && std::isfinite(u), "portfolio: u must be positive");
  require(std::isfinite(varrho), "portfolio: varrho must be finite");
  if (reg != PortfolioReg::None)
    require(reg_weight > 0.0 && std::isfinite(reg_weight),
            "portfolio: regularizer weight must be positive");
  const Index n = Qmat.rows();

  std::string note;
  {
    const EigResult eig = jacobi_eig(Qmat);
    const double lo = eig.eigenvalues[n - 1];
    const double scale = std::max(1.0, std::abs(eig.eigenvalues[0]));
    if (lo < -1e-10 * scale)
      note = "covariance is indefinite (min eigenvalue " + std::to_string(lo) +
             ")";
  }

  Mat M(2, n);
  M.row(0) = -gamma_vec.transpose();
  M.row(1) = Vec::Ones(n).transpose();
  Vec upper(2);
  upper << -varrho, 1.0;
  const ProxFn range_box = ProxFn::box(detail::neg_inf_vec(2), upper);
  const ProxFn x_box = ProxFn::box(Vec::Zero(n), Vec::Constant(n, u));
  SmoothFn f = smooth_quadratic(std::move(Qmat), Vec::Zero(n));

  Instance inst;
  inst.name = "portfolio";
  inst.note = std::move(note);
  inst.x0 = Vec::Zero(n);

  if (reg == PortfolioReg::L0) {
    auto Ms = std::make_shared<Mat>(std::move(M));
    auto shift = std::make_shared<Vec>(2);
    (*shift) << varrho, -1.0;  // c(x) = [varrho - g'x; 1'x - 1]
    NcCompositeProblem p;
    p.n = n;
    p.m = 2;
    p.f = std::move(f);
    p.h = ProxFn::l0(reg_weight);
    p.c = [Ms, shift](const Vec& x) { return Vec((*Ms) * x + *shift); };
    p.jac_c = [Ms](const Vec&) { return *Ms; };
    p.Q = ProxFn::box(detail::neg_inf_vec(2), Vec::Zero(2));
    p.K = x_box;
    inst.problem = std::move(p);
  } else {
    CompositeProblem p;
    p.n = n;
    p.f = std::move(f);
    if (reg == PortfolioReg::L1) p.h = ProxFn::l1(reg_weight);
    p.A = dense_op(std::move(M));
    p.Q = range_box;
    p.K = x_box;
    inst.problem = std::move(p);
  }
  return inst;
}

// Defaults for the underdetermined knobs: target half the reachable return
// and cap each asset at 2/n of the budget.
inline Instance portfolio(Mat Qmat, Vec gamma_vec,
                          PortfolioReg reg = PortfolioReg::None,
                          double reg_weight = 0.0) {
  const double u = 2.0 / static_cast<double>(gamma_vec.size());
  const double varrho = 0.5 * portfolio_max_return(gamma_vec, u);
  return portfolio(std::move(Qmat), std::move(gamma_vec), varrho, u, reg,
                   reg_weight);
}

// ---------------------------------------------------------------------------
// Equality-constrained SDP,  min <C, X>  s.t.  <A_i, X> = b_i,  X psd,
// vectorized over the scaled upper triangle so Euclidean inner products equal
// Frobenius products and the cone projection works coordinate-free.

inline Instance sdp_eq(const SymMat& C, const std::vector<SymMat>& As,
                       const Vec& b) {
  require_symmetric(C, "sdp_eq C");
  const Index n = C.rows();
  require(n >= 1 && n <= 64, "sdp_eq: matrix side must lie in [1, 64]");
  require(static_cast<Index>(As.size()) == b.size(),
          "sdp_eq: constraint count mismatch");
  const Index d = svec_dim(n);

  Mat Amat(b.size(), d);
  for (Index i = 0; i < b.size(); ++i) {
    require_symmetric(As[static_cast<std::size_t>(i)], "sdp_eq A_i");
    require(As[static_cast<std::size_t>(i)].rows() == n,
            "sdp_eq: constraint matrix side mismatch");
    Amat.row(i) = svec(As[static_cast<std::size_t>(i)]).transpose();
  }

  CompositeProblem p;
  p.n = d;
  p.f = smooth_linear(svec(C));
  p.A = dense_op(std::move(Amat));
  p.Q = ProxFn::point(b);
  p.K = ProxFn::psd_cone();

  Instance inst;
  inst.name = "sdp-eq";
  inst.problem = std::move(p);
  inst.x0 = svec(SymMat(Mat::Identity(n, n)));
  return inst;
}

// ---------------------------------------------------------------------------
// Tiny NLP with a hand-checkable KKT pair:  min x^2  s.t.  x >= 1,
// written as c(x) = 1 - x <= 0; the optimum is x* = 1 with multiplier 2.

inline Instance toy_nlp() {
  NlpProblem p;
  p.n = 1;
  p.m = 1;
  p.f.value = [](const Vec& x) { return x[0] * x[0]; };
  p.f.grad = [](const Vec& x) { return Vec(2.0 * x); };
  p.f.hess_vec = [](const Vec&, const Vec& d) { return Vec(2.0 * d); };
  p.c = [](const Vec& x) { return Vec(Vec::Constant(1, 1.0 - x[0])); };
  p.jac_c = [](const Vec&) { return Mat(Mat::Constant(1, 1, -1.0)); };
  p.hess_c_vec = [](const Vec&, const Vec&, const Vec& d) {
    return Vec(Vec::Zero(d.size()));
  };
  p.Qc = ProxFn::box(detail::neg_inf_vec(1), Vec::Zero(1));

  Instance inst;
  inst.name = "toy-nlp";
  inst.problem = std::move(p);
  inst.known = KnownOptimum{1.0, "analytic"};
  inst.x_star = Vec::Constant(1, 1.0);
  inst.x0 = Vec::Zero(1);
  return inst;
}

// ---------------------------------------------------------------------------
// Strongly convex random QP with a handful of linear inequalities,
//   min 1/2 x'H x + g'x  s.t.  Ax <= b,
// kept small enough (m <= 6) that enumerating active sets is an exact oracle.
// The raw matrices ride along for that oracle; b is padded so a random point
// is strictly feasible.

struct QpBox {
  Instance inst;
  Mat H;
  Vec g;
  Mat A;
  Vec b;
};

inline QpBox qp_box(Rng& rng, Index n, Index m) {
  require(n >= 1, "qp_box: n must be positive");
  require(m >= 1 && m <= 6, "qp_box: m must lie in [1, 6]");

  Mat M(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) M(i, j) = rng.normal();
  Mat H = M.transpose() * M / static_cast<double>(n) + Mat::Identity(n, n);
  H = 0.5 * (H + H.transpose());  // shed asymmetric rounding dust
  Vec g = rng.gaussian(n);

  Mat A(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) A(i, j) = rng.normal();
  const Vec interior = 0.5 * rng.gaussian(n);
  Vec slack = rng.uniform_vec(m, 0.1, 1.1);
  Vec b = A * interior + slack;

  NlpProblem p;
  p.n = n;
  p.m = m;
  p.f = smooth_quadratic(H, g);
  auto As = std::make_shared<Mat>(A);
  auto bs = std::make_shared<Vec>(b);
  p.c = [As, bs](const Vec& x) { return Vec(*As * x - *bs); };
  p.jac_c = [As](const Vec&) { return *As; };
  p.hess_c_vec = [](const Vec&, const Vec&, const Vec& d) {
    return Vec(Vec::Zero(d.size()));
  };
  p.Qc = ProxFn::box(detail::neg_inf_vec(m), Vec::Zero(m));

  QpBox out;
  out.inst.name = "qp-box";
  out.inst.problem = std::move(p);
  out.inst.x0 = Vec::Zero(n);
  out.H = std::move(H);
  out.g = std::move(g);
  out.A = std::move(A);
  out.b = std::move(b);
  return out;
}

// ---------------------------------------------------------------------------
// Block binary program with coupling Ax <= b, feasible by construction:
// the right-hand side is set above A times a planted binary point. Total
// variable count stays within brute-force range.

inline Instance ip_block_toy(Rng& rng, int pblocks, Index nj, Index mrows) {
  require(pblocks >= 1 && nj >= 1 && mrows >= 1,
          "ip_block_toy: sizes must be positive");
  const Index n = static_cast<Index>(pblocks) * nj;
  require(n <= 16, "ip_block_toy: total variables capped at 16");

  Vec c = rng.uniform_vec(n, -1.0, 1.0);
  Mat A(mrows, n);
  for (Index i = 0; i < mrows; ++i)
    for (Index j = 0; j < n; ++j) A(i, j) = rng.unit();
  Vec x_seed(n);
  for (Index j = 0; j < n; ++j)
    x_seed[j] = static_cast<double>(rng.uniform_int(0, 1));
  Vec b = A * x_seed + rng.uniform_vec(mrows, 0.0, 0.5);

  IpProblem p;
  p.c = std::move(c);
  p.A = dense_op(std::move(A));
  p.b = std::move(b);
  p.blocks.assign(static_cast<std::size_t>(pblocks),
                  BlockSet{BlockKind::BinaryBox, nj});

  Instance inst;
  inst.name = "ip-block-toy";
  inst.problem = std::move(p);
  inst.x_feasible = std::move(x_seed);
  inst.x0 = Vec::Zero(n);
  return inst;
}

}  // namespace almkit
