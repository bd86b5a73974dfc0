#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace almkit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
// Symmetric matrices are plain dense storage; symmetry is validated at the
// entry points that require it (see require_symmetric).
using SymMat = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr Index kMaxVecDim = 5000;
inline constexpr Index kMaxMatDim = 512;

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

// Thrown when an assembler is handed a problem class it does not model
// (e.g. a nonconvex penalty where a convex one is required).
struct VariantMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown when a solver needs an oracle the problem does not provide.
struct MissingOracle : std::logic_error {
  using std::logic_error::logic_error;
};

inline void require_finite(const Vec& v, const char* name) {
  require(v.size() <= kMaxVecDim, std::string(name) + ": dimension cap exceeded");
  if (!v.allFinite())
    throw std::invalid_argument(std::string(name) + ": non-finite entry");
}

inline void require_finite(const Mat& M, const char* name) {
  require(M.rows() <= kMaxMatDim && M.cols() <= kMaxMatDim,
          std::string(name) + ": dimension cap exceeded");
  if (!M.allFinite())
    throw std::invalid_argument(std::string(name) + ": non-finite entry");
}

// Exact (bitwise) symmetry. Assemble symmetric matrices as (B + B^T)/2:
// that expression is exactly symmetric in floating point.
inline void require_symmetric(const Mat& M, const char* name) {
  require(M.rows() == M.cols(), std::string(name) + ": not square");
  require_finite(M, name);
  for (Index j = 0; j < M.cols(); ++j)
    for (Index i = 0; i < j; ++i)
      if (M(i, j) != M(j, i))
        throw std::invalid_argument(std::string(name) + ": not symmetric");
}

inline Mat symmetrize(const Mat& B) {
  return (B + B.transpose()) / 2.0;
}

// Matrix-free linear map with explicit adjoint.
struct LinOp {
  Index rows = 0;
  Index cols = 0;
  std::function<Vec(const Vec&)> apply;
  std::function<Vec(const Vec&)> adjoint;

  bool empty() const { return rows == 0 && cols == 0; }
};

inline LinOp dense_op(Mat A) {
  auto M = std::make_shared<Mat>(std::move(A));
  LinOp op;
  op.rows = M->rows();
  op.cols = M->cols();
  op.apply = [M](const Vec& x) -> Vec { return (*M) * x; };
  op.adjoint = [M](const Vec& y) -> Vec { return M->transpose() * y; };
  return op;
}

inline LinOp identity_op(Index n) {
  LinOp op;
  op.rows = op.cols = n;
  op.apply = [](const Vec& x) { return x; };
  op.adjoint = [](const Vec& y) { return y; };
  return op;
}

// Deterministic stream: raw mt19937_64 words mapped to doubles by hand, so
// equal seeds give bit-equal draws regardless of standard-library vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t u64() { return eng_(); }

  // uniform on [0,1), 53-bit resolution
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * unit(); }

  int uniform_int(int lo, int hi) {
    require(lo <= hi, "uniform_int: empty range");
    auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(eng_() % span);
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = unit();
    } while (u1 <= 0.0);
    const double u2 = unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(th);
    has_spare_ = true;
    return r * std::cos(th);
  }

  Vec gaussian(Index n) {
    Vec v(n);
    for (Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  Vec uniform_vec(Index n, double a, double b) {
    Vec v(n);
    for (Index i = 0; i < n; ++i) v[i] = uniform(a, b);
    return v;
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Stable seed derivation for named sub-streams (bench cells, generators).
inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : tag) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::uint64_t z = seed ^ h;
  // splitmix64 finalizer
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline bool check_adjoint(const LinOp& op, Rng& rng, int pairs = 100) {
  for (int k = 0; k < pairs; ++k) {
    const Vec x = rng.gaussian(op.cols);
    const Vec y = rng.gaussian(op.rows);
    const double lhs = op.apply(x).dot(y);
    const double rhs = x.dot(op.adjoint(y));
    if (std::abs(lhs - rhs) > 1e-12 * (1.0 + std::abs(lhs))) return false;
  }
  return true;
}

struct EigResult {
  Vec eigenvalues;   // descending
  Mat eigenvectors;  // column i pairs with eigenvalues[i]
};

// Cyclic Jacobi for dense symmetric matrices. Sweeps rotate every pair whose
// pivot is above a scaled threshold; terminates when the off-diagonal
// Frobenius mass falls below 1e-12 * |M|_F or after 100 sweeps.
inline EigResult jacobi_eig(const SymMat& M) {
  require_symmetric(M, "jacobi_eig");
  const Index n = M.rows();
  EigResult out;
  if (n == 0) {
    out.eigenvalues = Vec(0);
    out.eigenvectors = Mat(0, 0);
    return out;
  }

  Mat A = M;
  Mat Q = Mat::Identity(n, n);
  const double norm_m = M.norm();
  const double stop_off = 1e-12 * norm_m;
  // rotate pivots down to a fraction of the stop threshold so one final sweep
  // cannot leave a single entry carrying the whole budget
  const double pivot_tol = stop_off / (2.0 * static_cast<double>(n) + 1.0);

  auto off_norm = [&]() {
    double s = 0.0;
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < j; ++i) s += 2.0 * A(i, j) * A(i, j);
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < 100; ++sweep) {
    if (off_norm() <= stop_off) break;
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (std::abs(apq) <= pivot_tol) continue;
        const double tau = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0)
                             ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                             : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const double app = A(p, p), aqq = A(q, q);
        A(p, p) = app - t * apq;
        A(q, q) = aqq + t * apq;
        A(p, q) = A(q, p) = 0.0;
        for (Index i = 0; i < n; ++i) {
          if (i == p || i == q) continue;
          const double aip = A(i, p), aiq = A(i, q);
          A(i, p) = A(p, i) = c * aip - s * aiq;
          A(i, q) = A(q, i) = s * aip + c * aiq;
        }
        for (Index i = 0; i < n; ++i) {
          const double qip = Q(i, p), qiq = Q(i, q);
          Q(i, p) = c * qip - s * qiq;
          Q(i, q) = s * qip + c * qiq;
        }
      }
    }
  }

  std::vector<Index> order(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return A(a, a) > A(b, b); });
  out.eigenvalues = Vec(n);
  out.eigenvectors = Mat(n, n);
  for (Index i = 0; i < n; ++i) {
    out.eigenvalues[i] = A(order[static_cast<size_t>(i)], order[static_cast<size_t>(i)]);
    out.eigenvectors.col(i) = Q.col(order[static_cast<size_t>(i)]);
  }
  return out;
}

// Central differences; h is the absolute step per coordinate.
inline Vec fd_grad(const std::function<double(const Vec&)>& f, const Vec& x,
                   double h = 1e-6) {
  require(h > 0.0, "fd_grad: step must be positive");
  require_finite(x, "fd_grad");
  Vec g(x.size());
  Vec xp = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    xp[i] = xi + h;
    const double fp = f(xp);
    xp[i] = xi - h;
    const double fm = f(xp);
    xp[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Rows form an orthonormal set: A A^T = I_m. Built from a thin Householder QR
// of a Gaussian draw, with column signs fixed so the draw is reproducible.
inline Mat rand_orthonormal_rows(Rng& rng, Index m, Index n) {
  require(m >= 0 && n >= 0, "rand_orthonormal_rows: negative dimension");
  require(m <= n, "rand_orthonormal_rows: need m <= n");
  require(n <= kMaxMatDim, "rand_orthonormal_rows: dimension cap exceeded");
  Mat G(n, m);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < n; ++i) G(i, j) = rng.normal();
  Eigen::HouseholderQR<Mat> qr(G);
  Mat Qthin = qr.householderQ() * Mat::Identity(n, m);
  Mat R = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  for (Index j = 0; j < m; ++j)
    if (R(j, j) < 0.0) Qthin.col(j) = -Qthin.col(j);
  return Qthin.transpose();
}

}  // namespace almkit
