#pragma once

#include <almkit/numcore.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <utility>

namespace almkit {

enum class ProxKind { Zero, L1, L0, Box, Nonneg, InfBall, Point, PSDCone, Custom };

// Scaled symmetric vectorization: off-diagonal entries carry sqrt(2) so the
// Euclidean inner product of svecs equals the Frobenius inner product.
inline Index svec_dim(Index n) { return n * (n + 1) / 2; }

inline Index svec_side(Index d) {
  const Index n = static_cast<Index>((std::sqrt(8.0 * static_cast<double>(d) + 1.0) - 1.0) / 2.0 + 0.5);
  require(svec_dim(n) == d, "svec: length is not a triangular number");
  return n;
}

inline Vec svec(const SymMat& M) {
  require_symmetric(M, "svec");
  const Index n = M.rows();
  Vec v(svec_dim(n));
  const double rt2 = std::numbers::sqrt2;
  Index k = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i <= j; ++i) v[k++] = (i == j) ? M(i, j) : rt2 * M(i, j);
  return v;
}

inline SymMat sunvec(const Vec& v) {
  const Index n = svec_side(v.size());
  SymMat M(n, n);
  const double inv_rt2 = 1.0 / std::numbers::sqrt2;
  Index k = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i <= j; ++i) {
      const double x = (i == j) ? v[k] : inv_rt2 * v[k];
      M(i, j) = x;
      M(j, i) = x;
      ++k;
    }
  return M;
}

struct ProxFn {
  ProxKind kind = ProxKind::Zero;
  double gamma = 0.0;  // L1 / InfBall weight or radius
  double alpha = 0.0;  // L0 weight
  Vec lower, upper;    // Box bounds; +-inf entries mean "no bound on this side"
  Vec target;          // Point
  std::function<double(const Vec&)> custom_value;
  std::function<Vec(const Vec&, double)> custom_prox;  // (x, t) -> argmin h(u) + t/2 |u-x|^2
  bool custom_convex = false;

  static ProxFn zero() { return ProxFn{}; }

  static ProxFn l1(double g) {
    require(g > 0.0 && std::isfinite(g), "l1: weight must be positive");
    ProxFn h;
    h.kind = ProxKind::L1;
    h.gamma = g;
    return h;
  }

  static ProxFn l0(double a) {
    require(a > 0.0 && std::isfinite(a), "l0: weight must be positive");
    ProxFn h;
    h.kind = ProxKind::L0;
    h.alpha = a;
    return h;
  }

  static ProxFn box(Vec l, Vec u) {
    require(l.size() == u.size(), "box: bound length mismatch");
    for (Index i = 0; i < l.size(); ++i) {
      require(!std::isnan(l[i]) && !std::isnan(u[i]), "box: NaN bound");
      require(l[i] < std::numeric_limits<double>::infinity(), "box: lower bound is +inf");
      require(u[i] > -std::numeric_limits<double>::infinity(), "box: upper bound is -inf");
      require(l[i] <= u[i], "box: crossed bounds");
    }
    ProxFn h;
    h.kind = ProxKind::Box;
    h.lower = std::move(l);
    h.upper = std::move(u);
    return h;
  }

  static ProxFn nonneg() {
    ProxFn h;
    h.kind = ProxKind::Nonneg;
    return h;
  }

  static ProxFn inf_ball(double g) {
    require(g > 0.0 && std::isfinite(g), "inf_ball: radius must be positive");
    ProxFn h;
    h.kind = ProxKind::InfBall;
    h.gamma = g;
    return h;
  }

  static ProxFn point(Vec b) {
    require_finite(b, "point");
    ProxFn h;
    h.kind = ProxKind::Point;
    h.target = std::move(b);
    return h;
  }

  static ProxFn psd_cone() {
    ProxFn h;
    h.kind = ProxKind::PSDCone;
    return h;
  }

  static ProxFn custom(std::function<double(const Vec&)> value,
                       std::function<Vec(const Vec&, double)> prox, bool convex) {
    require(static_cast<bool>(value) && static_cast<bool>(prox),
            "custom: value and prox oracles required");
    ProxFn h;
    h.kind = ProxKind::Custom;
    h.custom_value = std::move(value);
    h.custom_prox = std::move(prox);
    h.custom_convex = convex;
    return h;
  }

  bool convex() const {
    if (kind == ProxKind::L0) return false;
    if (kind == ProxKind::Custom) return custom_convex;
    return true;
  }

  // Indicator of a closed set (Zero counts as the whole space).
  bool is_set() const {
    switch (kind) {
      case ProxKind::Zero:
      case ProxKind::Box:
      case ProxKind::Nonneg:
      case ProxKind::InfBall:
      case ProxKind::Point:
      case ProxKind::PSDCone:
        return true;
      default:
        return false;
    }
  }
};

namespace detail {

inline void check_box_dim(const ProxFn& h, Index n) {
  require(h.lower.size() == n, "box: dimension mismatch");
}

inline Vec clamp_box(const ProxFn& h, const Vec& x) {
  check_box_dim(h, x.size());
  Vec r = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double lo = h.lower[i], hi = h.upper[i];
    if (!std::isinf(lo) && r[i] < lo) r[i] = lo;
    if (!std::isinf(hi) && r[i] > hi) r[i] = hi;
  }
  return r;
}

inline Vec psd_project(const Vec& x) {
  const SymMat X = sunvec(x);
  const EigResult eig = jacobi_eig(X);
  const Index n = X.rows();
  Mat P = Mat::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    if (eig.eigenvalues[i] <= 0.0) break;  // descending order
    P.noalias() += eig.eigenvalues[i] * eig.eigenvectors.col(i) *
                   eig.eigenvectors.col(i).transpose();
  }
  return svec(symmetrize(P));
}

}  // namespace detail

// prox(h, t, x) = argmin_u h(u) + (t/2) |u - x|^2, i.e. prox_{h/t}(x).
inline Vec prox(const ProxFn& h, double t, const Vec& x) {
  require(t > 0.0 && std::isfinite(t), "prox: t must be positive and finite");
  require_finite(x, "prox");
  switch (h.kind) {
    case ProxKind::Zero:
      return x;
    case ProxKind::L1: {
      const double thr = h.gamma / t;
      Vec r(x.size());
      for (Index i = 0; i < x.size(); ++i)
        r[i] = (x[i] > thr) ? x[i] - thr : (x[i] < -thr ? x[i] + thr : 0.0);
      return r;
    }
    case ProxKind::L0: {
      // keep a coordinate only when its quadratic saving strictly beats the
      // per-entry charge; ties zero out
      const double thr = std::sqrt(2.0 * h.alpha / t);
      Vec r(x.size());
      for (Index i = 0; i < x.size(); ++i) r[i] = (std::abs(x[i]) <= thr) ? 0.0 : x[i];
      return r;
    }
    case ProxKind::Box:
      return detail::clamp_box(h, x);
    case ProxKind::Nonneg:
      return x.cwiseMax(0.0);
    case ProxKind::InfBall:
      return x.cwiseMax(-h.gamma).cwiseMin(h.gamma);
    case ProxKind::Point:
      require(h.target.size() == x.size(), "point: dimension mismatch");
      return h.target;
    case ProxKind::PSDCone:
      return detail::psd_project(x);
    case ProxKind::Custom: {
      Vec r = h.custom_prox(x, t);
      require(r.size() == x.size(), "custom prox: dimension mismatch");
      require_finite(r, "custom prox");
      return r;
    }
  }
  throw std::logic_error("prox: unreachable");
}

// Set projection (prox of an indicator is step-size free).
inline Vec project(const ProxFn& S, const Vec& x) {
  require(S.is_set() || S.kind == ProxKind::Custom, "project: not a set kind");
  return prox(S, 1.0, x);
}

// Function value; indicators report 0 / +inf with a small relative membership
// slack so that projected points always evaluate to 0.
inline double prox_value(const ProxFn& h, const Vec& x) {
  require_finite(x, "prox_value");
  const double inf = std::numeric_limits<double>::infinity();
  switch (h.kind) {
    case ProxKind::Zero:
      return 0.0;
    case ProxKind::L1:
      return h.gamma * x.lpNorm<1>();
    case ProxKind::L0: {
      double c = 0.0;
      for (Index i = 0; i < x.size(); ++i)
        if (x[i] != 0.0) c += h.alpha;
      return c;
    }
    case ProxKind::Custom:
      return h.custom_value(x);
    default: {
      const Vec p = project(h, x);
      const double slack = 1e-12 * (1.0 + x.norm());
      return ((x - p).norm() <= slack) ? 0.0 : inf;
    }
  }
}

// Moreau envelope e_t h(x) = min_u h(u) + (t/2)|u - x|^2 and its gradient
// t(x - prox_{h/t}(x)).
inline std::pair<double, Vec> moreau(const ProxFn& h, double t, const Vec& x) {
  const Vec p = prox(h, t, x);
  double hp = 0.0;
  switch (h.kind) {
    case ProxKind::L1:
      hp = h.gamma * p.lpNorm<1>();
      break;
    case ProxKind::L0:
      hp = prox_value(h, p);
      break;
    case ProxKind::Custom:
      hp = h.custom_value(p);
      break;
    default:
      hp = 0.0;  // sets: the prox point is feasible by construction
  }
  const double val = hp + 0.5 * t * (x - p).squaredNorm();
  return {val, t * (x - p)};
}

// Scaled projection residual t(x - P_S(x)); the gradient of the distance
// penalty (t/2) dist^2(x, S) and the building block of every AL gradient.
inline Vec hat_residual(const ProxFn& S, double t, const Vec& x) {
  require(S.is_set(), "hat_residual: set kinds only");
  require(t > 0.0 && std::isfinite(t), "hat_residual: t must be positive and finite");
  if (S.kind == ProxKind::Zero) return Vec::Zero(x.size());
  return t * (x - project(S, x));
}

}  // namespace almkit
