#pragma once

// Smooth and semismooth inner solvers used by the outer augmented-Lagrangian
// loops: Barzilai-Borwein gradient descent, Nesterov acceleration, proximal
// gradient, and a damped semismooth Newton method with CG inner solves.

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "almkit/numcore.hpp"
#include "almkit/prox.hpp"

namespace almkit {

// Fused value+gradient oracle. hess_vec is optional and only required by ssn;
// it applies one element of the generalized Hessian at x to a direction.
struct SmoothOracle {
  std::function<std::pair<double, Vec>(const Vec&)> value_grad;
  std::function<Vec(const Vec&, const Vec&)> hess_vec;

  double value(const Vec& x) const { return value_grad(x).first; }
  Vec grad(const Vec& x) const { return value_grad(x).second; }
};

inline SmoothOracle make_oracle(std::function<double(const Vec&)> f,
                                std::function<Vec(const Vec&)> g) {
  SmoothOracle o;
  o.value_grad = [f = std::move(f), g = std::move(g)](const Vec& x) {
    return std::make_pair(f(x), g(x));
  };
  return o;
}

// Debug aid: compare the oracle gradient against central differences at a few
// perturbations of `around`. Returns false on the first mismatch.
inline bool spot_check_gradient(const SmoothOracle& o, const Vec& around,
                                Rng& rng, int pts = 3, double scale = 0.1,
                                double tol = 1e-4) {
  require(static_cast<bool>(o.value_grad), "spot_check_gradient: empty oracle");
  for (int p = 0; p < pts; ++p) {
    Vec x = around + scale * rng.gaussian(around.size());
    Vec g = o.grad(x);
    Vec gfd = fd_grad([&](const Vec& z) { return o.value(z); }, x);
    double denom = std::max(1.0, gfd.norm());
    if (!g.allFinite() || (g - gfd).norm() > tol * denom) return false;
  }
  return true;
}

enum class InnerStatus { Converged, MaxIter, Stalled };

struct ArmijoOpts {
  double sigma = 1e-4;   // sufficient-decrease fraction, in (0,1)
  double shrink = 0.5;   // backtracking factor
  int max_tries = 60;
};

enum class BbRule { Alternate, Bb1, Bb2 };

struct SsnOpts {
  double cg_tol = 1e-8;  // relative residual for the CG solve
  int cg_max = 200;
};

struct InnerOpts {
  double tol_grad = 1e-8;
  int max_iter = 1000;
  ArmijoOpts armijo;
  BbRule bb = BbRule::Alternate;
  int nonmonotone_window = 8;
  bool nag_restart = true;
  double lipschitz = 0.0;  // >0: trusted smoothness constant, skips doubling
  SsnOpts ssn;
  // Heuristic stop on tiny iterate movement. Disabled unless > 0; when it
  // fires the run is reported as Stalled with rel_change_stop set, because
  // small steps do not certify stationarity.
  double rel_change_tol = 0.0;
  bool log_steps = false;  // record (lhs, rhs) of each accepted decrease test

  void validate() const {
    require(tol_grad >= 0.0, "InnerOpts: tol_grad must be >= 0");
    require(max_iter >= 1, "InnerOpts: max_iter must be >= 1");
    require(armijo.sigma > 0.0 && armijo.sigma < 1.0,
            "InnerOpts: armijo sigma must lie in (0,1)");
    require(armijo.shrink > 0.0 && armijo.shrink < 1.0,
            "InnerOpts: armijo shrink must lie in (0,1)");
    require(armijo.max_tries >= 1, "InnerOpts: armijo max_tries must be >= 1");
    require(nonmonotone_window >= 1, "InnerOpts: nonmonotone window >= 1");
    require(lipschitz >= 0.0, "InnerOpts: lipschitz must be >= 0");
    require(ssn.cg_tol > 0.0, "InnerOpts: cg_tol must be > 0");
    require(ssn.cg_max >= 1, "InnerOpts: cg_max must be >= 1");
    require(rel_change_tol >= 0.0, "InnerOpts: rel_change_tol must be >= 0");
  }
};

struct InnerReport {
  Vec x;
  double grad_norm = std::numeric_limits<double>::infinity();
  long iters = 0;
  long newton_steps = 0;     // ssn only
  InnerStatus status = InnerStatus::MaxIter;
  double f_final = std::numeric_limits<double>::quiet_NaN();
  bool rel_change_stop = false;
  // Residual norm before each Newton step plus the final one (ssn only).
  std::vector<double> resid_hist;
  // Accepted decrease tests as (lhs, rhs) with lhs <= rhs, when log_steps.
  std::vector<std::pair<double, double>> accept_log;
};

namespace detail {

constexpr double kBbStepMin = 1e-12;
constexpr double kBbStepMax = 1e12;

inline bool usable(double f) { return std::isfinite(f); }

// Rounding allowance for sufficient-decrease tests. Near a minimizer the
// exact decrement drops below the representation error of the two values
// being compared; without this slack the backtracking loop rejects every
// step, shrinks t (or inflates the smoothness estimate) until the trial
// point underflows to the current iterate, and the solver stalls or —
// worse — declares a zero residual at a non-stationary point.
inline double decrease_slack(double a, double b) {
  return 10.0 * std::numeric_limits<double>::epsilon() *
         (std::abs(a) + std::abs(b));
}

}  // namespace detail

// Gradient descent with Barzilai-Borwein steps and a nonmonotone Armijo
// backtracking safeguard. Returns the best iterate seen if the line search
// stalls; returns the current iterate on convergence.
inline InnerReport gd_bb(const SmoothOracle& oracle, const Vec& x0,
                         const InnerOpts& opts) {
  opts.validate();
  require(static_cast<bool>(oracle.value_grad), "gd_bb: empty oracle");
  require_finite(x0, "gd_bb x0");

  InnerReport rep;
  Vec x = x0;
  auto [f, g] = oracle.value_grad(x);
  require(detail::usable(f) && g.allFinite(), "gd_bb: oracle not finite at x0");

  Vec best_x = x;
  double best_f = f;
  double best_g = g.norm();
  std::deque<double> hist = {f};

  double alpha = 1.0 / std::max(1.0, g.norm());
  Vec x_prev, g_prev;

  for (long k = 0; k < opts.max_iter; ++k) {
    double gn = g.norm();
    if (gn <= opts.tol_grad) {
      rep.status = InnerStatus::Converged;
      rep.x = x;
      rep.grad_norm = gn;
      rep.f_final = f;
      return rep;
    }

    if (k > 0) {
      Vec s = x - x_prev;
      Vec y = g - g_prev;
      double sy = s.dot(y);
      if (sy > 0.0 && std::isfinite(sy)) {
        double bb1 = s.squaredNorm() / sy;
        double bb2 = sy / y.squaredNorm();
        double cand;
        switch (opts.bb) {
          case BbRule::Bb1: cand = bb1; break;
          case BbRule::Bb2: cand = bb2; break;
          default: cand = (k % 2 == 0) ? bb1 : bb2; break;
        }
        if (std::isfinite(cand) && cand > 0.0) alpha = cand;
      }
    }
    alpha = std::clamp(alpha, detail::kBbStepMin, detail::kBbStepMax);

    double f_ref = *std::max_element(hist.begin(), hist.end());
    double t = alpha;
    bool accepted = false;
    double f_new = 0.0;
    Vec g_new, x_new;
    for (int j = 0; j < opts.armijo.max_tries; ++j) {
      x_new = x - t * g;
      auto [ft, gt] = oracle.value_grad(x_new);
      double rhs = f_ref - opts.armijo.sigma * t * gn * gn;
      if (detail::usable(ft) && ft <= rhs + detail::decrease_slack(f_ref, ft)) {
        accepted = true;
        f_new = ft;
        g_new = std::move(gt);
        if (opts.log_steps) rep.accept_log.emplace_back(ft, rhs);
        break;
      }
      t *= opts.armijo.shrink;
    }

    if (!accepted) {
      rep.status = InnerStatus::Stalled;
      rep.x = best_x;
      rep.grad_norm = best_g;
      rep.f_final = best_f;
      return rep;
    }

    x_prev = x;
    g_prev = g;
    x = std::move(x_new);
    f = f_new;
    g = std::move(g_new);
    ++rep.iters;

    hist.push_back(f);
    while (static_cast<int>(hist.size()) > opts.nonmonotone_window)
      hist.pop_front();
    if (f < best_f) {
      best_f = f;
      best_x = x;
      best_g = g.norm();
    }

    if (opts.rel_change_tol > 0.0 &&
        (x - x_prev).norm() <= opts.rel_change_tol * std::max(1.0, x.norm())) {
      rep.status = InnerStatus::Stalled;
      rep.rel_change_stop = true;
      rep.x = x;
      rep.grad_norm = g.norm();
      rep.f_final = f;
      return rep;
    }
  }

  const double gn = g.norm();
  if (gn <= opts.tol_grad) {
    rep.status = InnerStatus::Converged;
    rep.x = x;
    rep.grad_norm = gn;
    rep.f_final = f;
    return rep;
  }
  rep.status = InnerStatus::MaxIter;
  rep.x = best_x;
  rep.grad_norm = best_g;
  rep.f_final = best_f;
  return rep;
}

// Nesterov's accelerated gradient method. m = 0 uses the convex momentum
// sequence t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2 with an optional gradient
// restart; m > 0 uses the constant strongly convex momentum
// (sqrt(L) - sqrt(m)) / (sqrt(L) + sqrt(m)). The smoothness constant is
// estimated by doubling until the descent lemma holds at each step.
inline InnerReport nag(const SmoothOracle& oracle, const Vec& x0,
                       const InnerOpts& opts, double m = 0.0) {
  opts.validate();
  require(static_cast<bool>(oracle.value_grad), "nag: empty oracle");
  require(m >= 0.0, "nag: strong convexity modulus must be >= 0");
  require_finite(x0, "nag x0");

  InnerReport rep;
  Vec x = x0;
  Vec x_old = x0;
  Vec y = x0;
  double t_mom = 1.0;
  double L = (opts.lipschitz > 0.0) ? opts.lipschitz : 1.0;

  {
    auto [f0, g0] = oracle.value_grad(x);
    require(detail::usable(f0) && g0.allFinite(),
            "nag: oracle not finite at x0");
    rep.f_final = f0;
    double gn = g0.norm();
    if (gn <= opts.tol_grad) {
      rep.status = InnerStatus::Converged;
      rep.x = x;
      rep.grad_norm = gn;
      return rep;
    }
    rep.grad_norm = gn;
  }

  for (long k = 0; k < opts.max_iter; ++k) {
    auto [fy, gy] = oracle.value_grad(y);
    double gyn = gy.norm();
    if (detail::usable(fy) && gyn <= opts.tol_grad) {
      rep.status = InnerStatus::Converged;
      rep.x = y;
      rep.grad_norm = gyn;
      rep.f_final = fy;
      return rep;
    }

    double f_new = 0.0;
    Vec g_new, x_new;
    bool accepted = false;
    for (int j = 0; j < 64; ++j) {
      x_new = y - gy / L;
      auto [ft, gt] = oracle.value_grad(x_new);
      double rhs = fy - gyn * gyn / (2.0 * L);
      if (detail::usable(ft) && ft <= rhs + detail::decrease_slack(fy, ft)) {
        accepted = true;
        f_new = ft;
        g_new = std::move(gt);
        if (opts.log_steps) rep.accept_log.emplace_back(ft, rhs);
        break;
      }
      if (opts.lipschitz > 0.0) {
        // Trusted constant failed the descent test (nonsmooth or bad input);
        // fall back to doubling rather than looping forever.
      }
      L *= 2.0;
      if (L > 1e18) break;
    }
    if (!accepted) {
      rep.status = InnerStatus::Stalled;
      rep.x = x;
      return rep;
    }

    if (m > 0.0) {
      double sl = std::sqrt(L), sm = std::sqrt(m);
      double beta = (sl - sm) / (sl + sm);
      y = x_new + beta * (x_new - x);
    } else {
      bool restart = opts.nag_restart && gy.dot(x_new - x) > 0.0 && k > 0;
      if (restart) {
        t_mom = 1.0;
        y = x_new;
      } else {
        double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_mom * t_mom));
        y = x_new + ((t_mom - 1.0) / t_next) * (x_new - x);
        t_mom = t_next;
      }
    }

    x_old = x;
    x = x_new;
    ++rep.iters;
    rep.f_final = f_new;
    rep.grad_norm = g_new.norm();
    if (rep.grad_norm <= opts.tol_grad) {
      rep.status = InnerStatus::Converged;
      rep.x = x;
      return rep;
    }

    if (opts.rel_change_tol > 0.0 &&
        (x - x_old).norm() <= opts.rel_change_tol * std::max(1.0, x.norm())) {
      rep.status = InnerStatus::Stalled;
      rep.rel_change_stop = true;
      rep.x = x;
      return rep;
    }
  }

  rep.status =
      rep.grad_norm <= opts.tol_grad ? InnerStatus::Converged : InnerStatus::MaxIter;
  rep.x = x;
  return rep;
}

// Proximal gradient on smooth + h. The reported residual is the norm of the
// prox-gradient mapping, ||x - prox_{step h}(x - step grad)|| / step, which
// vanishes exactly at stationary points of the sum.
inline InnerReport prox_grad(const SmoothOracle& smooth, const ProxFn& h,
                             const Vec& x0, const InnerOpts& opts) {
  opts.validate();
  require(static_cast<bool>(smooth.value_grad), "prox_grad: empty oracle");
  require_finite(x0, "prox_grad x0");

  InnerReport rep;
  Vec x = x0;
  double L = (opts.lipschitz > 0.0) ? opts.lipschitz : 1.0;

  for (long k = 0; k < opts.max_iter; ++k) {
    auto [fx, gx] = smooth.value_grad(x);
    require(detail::usable(fx) && gx.allFinite(),
            "prox_grad: oracle not finite");

    Vec p;
    double step = 1.0 / L;
    bool accepted = false;
    for (int j = 0; j < 64; ++j) {
      step = 1.0 / L;
      p = prox(h, L, x - step * gx);  // prox of (step * h)
      Vec d = p - x;
      double f_p = smooth.value(p);
      double model = fx + gx.dot(d) + d.squaredNorm() / (2.0 * step);
      if (detail::usable(f_p) && f_p <= model + detail::decrease_slack(fx, f_p)) {
        accepted = true;
        if (opts.log_steps) rep.accept_log.emplace_back(f_p, model);
        break;
      }
      L *= 2.0;
      if (L > 1e18) break;
    }
    if (!accepted) {
      rep.status = InnerStatus::Stalled;
      rep.x = x;
      rep.f_final = fx;
      return rep;
    }

    double resid = (x - p).norm() / step;
    rep.grad_norm = resid;
    rep.f_final = fx;
    if (resid <= opts.tol_grad) {
      rep.status = InnerStatus::Converged;
      rep.x = x;
      return rep;
    }

    Vec x_prev = x;
    x = p;
    ++rep.iters;

    if (opts.rel_change_tol > 0.0 &&
        (x - x_prev).norm() <= opts.rel_change_tol * std::max(1.0, x.norm())) {
      rep.status = InnerStatus::Stalled;
      rep.rel_change_stop = true;
      rep.x = x;
      return rep;
    }
  }

  {
    // One last mapping evaluation so a tolerance reached on the final step is
    // reported as convergence.
    auto [fx, gx] = smooth.value_grad(x);
    const Vec p = prox(h, L, x - gx / L);
    const double resid = (x - p).norm() * L;
    rep.grad_norm = resid;
    rep.f_final = fx;
    rep.status =
        resid <= opts.tol_grad ? InnerStatus::Converged : InnerStatus::MaxIter;
  }
  rep.x = x;
  return rep;
}

namespace detail {

// Conjugate gradient for the regularized Newton system (H + mu I) d = b.
// Stops at a relative residual of tol or after max_iter applications.
// Bails out early if the operator turns out to be indefinite along the
// search directions (the caller then falls back to steepest descent).
inline Vec cg_solve(const std::function<Vec(const Vec&)>& apply_h, double mu,
                    const Vec& b, double tol, int max_iter, bool* ok) {
  *ok = true;
  Vec d = Vec::Zero(b.size());
  Vec r = b;
  Vec p = r;
  double rr = r.squaredNorm();
  const double stop = std::max(tol * b.norm(), 1e-300);
  for (int it = 0; it < max_iter && std::sqrt(rr) > stop; ++it) {
    Vec hp = apply_h(p) + mu * p;
    double php = p.dot(hp);
    if (!(php > 0.0) || !std::isfinite(php)) {
      *ok = d.squaredNorm() > 0.0;
      return d;
    }
    double a = rr / php;
    d += a * p;
    r -= a * hp;
    double rr_new = r.squaredNorm();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  if (!d.allFinite()) *ok = false;
  return d;
}

}  // namespace detail

// Damped semismooth Newton. Solves (H(x) + mu_k I) d = -F(x) with
// mu_k = min(0.1, ||F(x)||) by CG, falls back to steepest descent when the
// CG direction fails to be a descent direction for the value oracle, and
// globalizes with an Armijo backtracking line search on the value.
inline InnerReport ssn(const SmoothOracle& oracle, const Vec& x0,
                       const InnerOpts& opts) {
  opts.validate();
  require(static_cast<bool>(oracle.value_grad), "ssn: empty oracle");
  if (!oracle.hess_vec)
    throw MissingOracle("ssn requires a hess_vec oracle");
  require_finite(x0, "ssn x0");

  InnerReport rep;
  Vec x = x0;
  auto [f, F] = oracle.value_grad(x);
  require(detail::usable(f) && F.allFinite(), "ssn: oracle not finite at x0");

  Vec best_x = x;
  double best_f = f;
  double best_g = F.norm();
  rep.resid_hist.push_back(F.norm());

  while (rep.newton_steps < opts.max_iter) {
    double nF = F.norm();
    if (nF <= opts.tol_grad) {
      rep.status = InnerStatus::Converged;
      rep.x = x;
      rep.grad_norm = nF;
      rep.f_final = f;
      rep.iters = rep.newton_steps;
      return rep;
    }

    double mu = std::min(0.1, nF);
    bool cg_ok = false;
    Vec d = detail::cg_solve(
        [&](const Vec& v) { return oracle.hess_vec(x, v); }, mu, -F,
        opts.ssn.cg_tol, opts.ssn.cg_max, &cg_ok);

    double slope = cg_ok ? F.dot(d) : 0.0;
    bool fell_back = false;
    if (!cg_ok || !(slope < 0.0)) {
      d = -F;
      slope = -nF * nF;
      fell_back = true;
    }

    auto line_search = [&](const Vec& dir, double sl, double* alpha_out,
                           double* f_out, Vec* g_out) {
      double alpha = 1.0;
      for (int j = 0; j < opts.armijo.max_tries; ++j) {
        Vec xt = x + alpha * dir;
        auto [ft, gt] = oracle.value_grad(xt);
        double rhs = f + opts.armijo.sigma * alpha * sl;
        if (detail::usable(ft) && ft <= rhs + detail::decrease_slack(f, ft)) {
          if (opts.log_steps) rep.accept_log.emplace_back(ft, rhs);
          *alpha_out = alpha;
          *f_out = ft;
          *g_out = std::move(gt);
          return true;
        }
        alpha *= opts.armijo.shrink;
      }
      return false;
    };

    double alpha = 0.0, f_new = 0.0;
    Vec g_new;
    bool ok = line_search(d, slope, &alpha, &f_new, &g_new);
    if (!ok && !fell_back) {
      d = -F;
      slope = -nF * nF;
      ok = line_search(d, slope, &alpha, &f_new, &g_new);
    }
    if (!ok) {
      rep.status = InnerStatus::Stalled;
      rep.x = best_x;
      rep.grad_norm = best_g;
      rep.f_final = best_f;
      rep.iters = rep.newton_steps;
      return rep;
    }

    x += alpha * d;
    f = f_new;
    F = std::move(g_new);
    ++rep.newton_steps;
    rep.resid_hist.push_back(F.norm());
    if (f < best_f) {
      best_f = f;
      best_x = x;
      best_g = F.norm();
    }
  }

  rep.status =
      F.norm() <= opts.tol_grad ? InnerStatus::Converged : InnerStatus::MaxIter;
  rep.x = x;
  rep.grad_norm = F.norm();
  rep.f_final = f;
  rep.iters = rep.newton_steps;
  return rep;
}

}  // namespace almkit
