// Lasso regularization path: sweep the l1 weight from just below the
// all-zero threshold down to 1% of it, solving each problem by proximal
// gradient with a warm start from the previous solution, and print how the
// support grows as the penalty shrinks.

#include <cstdio>

#include "almkit/almkit.hpp"

using namespace almkit;

int main() {
  Rng rng(42);
  const Index m = 40, n = 100;
  Mat A(m, n);
  for (Index i = 0; i < m; ++i)
    A.row(i) = (rng.gaussian(n) / std::sqrt(double(m))).transpose();
  Vec x_true = Vec::Zero(n);
  for (int j = 0; j < 8; ++j) x_true[rng.uniform_int(0, int(n) - 1)] = rng.normal();
  const Vec b = A * x_true + 0.02 * rng.gaussian(m);

  // Above this weight the solution is exactly zero.
  const double gamma_max = (A.transpose() * b).cwiseAbs().maxCoeff();

  std::printf("lasso path on a %ld x %ld design (8 planted spikes)\n\n",
              long(m), long(n));
  std::printf("%10s %6s %14s %14s %8s\n", "gamma/max", "nnz", "0.5|Ax-b|^2",
              "gamma|x|_1", "iters");

  SmoothOracle ls;
  ls.value_grad = [&](const Vec& x) {
    const Vec r = A * x - b;
    return std::make_pair(0.5 * r.squaredNorm(), Vec(A.transpose() * r));
  };

  Vec x = Vec::Zero(n);
  for (double frac : {0.99, 0.7, 0.5, 0.3, 0.2, 0.1, 0.05, 0.01}) {
    const double gamma = frac * gamma_max;
    InnerOpts io;
    io.tol_grad = 1e-10;
    io.max_iter = 50000;
    const InnerReport ir = prox_grad(ls, ProxFn::l1(gamma), x, io);
    x = ir.x;

    int nnz = 0;
    for (Index i = 0; i < n; ++i)
      if (std::abs(x[i]) > 1e-8) ++nnz;
    const double fit = 0.5 * (A * x - b).squaredNorm();
    std::printf("%10.2f %6d %14.6f %14.6f %8ld\n", frac, nnz, fit,
                gamma * x.lpNorm<1>(), ir.iters);
  }

  std::printf("\nplanted support size: 8\n");
  return 0;
}
