#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "almkit/alm.hpp"
#include "almkit/oracles.hpp"
#include "almkit/problems.hpp"

using namespace almkit;

TEST_CASE("smooth builders expose consistent oracles", "[problems][smooth]") {
  Rng rng(2024);
  Mat B(5, 5);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 5; ++j) B(i, j) = rng.normal();
  const Mat H = Mat(B.transpose() * B) + Mat::Identity(5, 5);
  const Vec g = rng.gaussian(5);
  const Vec x = rng.gaussian(5);
  const Vec d = rng.gaussian(5);

  const SmoothFn q = smooth_quadratic(H, g);
  REQUIRE(q.value(x) == Catch::Approx(0.5 * x.dot(H * x) + g.dot(x)));
  REQUIRE((q.grad(x) - (H * x + g)).norm() <= 1e-14 * (1.0 + x.norm()));
  REQUIRE((q.hess_vec(x, d) - H * d).norm() == 0.0);
  const SmoothOracle qo = make_oracle(q.value, q.grad);
  REQUIRE(spot_check_gradient(qo, x, rng));

  Mat A(3, 5);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 5; ++j) A(i, j) = rng.normal();
  const Vec b = rng.gaussian(3);
  const SmoothFn ls = smooth_least_squares(A, b);
  REQUIRE(ls.value(x) == Catch::Approx(0.5 * (A * x - b).squaredNorm()));
  const SmoothOracle lso = make_oracle(ls.value, ls.grad);
  REQUIRE(spot_check_gradient(lso, x, rng));

  const SmoothFn lin = smooth_linear(g);
  REQUIRE(lin.value(x) == g.dot(x));
  REQUIRE((lin.grad(x) - g).norm() == 0.0);
  REQUIRE(lin.hess_vec(x, d).norm() == 0.0);
  REQUIRE(smooth_zero(5).value(x) == 0.0);
  REQUIRE(smooth_zero(5).grad(x).norm() == 0.0);

  REQUIRE_THROWS_AS(smooth_quadratic(Mat::Ones(2, 3), Vec::Zero(2)),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(smooth_least_squares(Mat::Ones(2, 3), Vec::Zero(3)),
                    std::invalid_argument);
}

TEST_CASE("lasso instances", "[problems][lasso]") {
  Rng rng(7);
  Mat A(4, 6);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 6; ++j) A(i, j) = rng.normal();
  const Vec b = rng.gaussian(4);
  const double thresh = (A.transpose() * b).lpNorm<Eigen::Infinity>();

  SECTION("above the null threshold zero is the recorded analytic optimum") {
    const Instance inst = lasso(A, b, 1.1 * thresh);
    REQUIRE(inst.known.has_value());
    REQUIRE(inst.known->value == Catch::Approx(0.5 * b.squaredNorm()));
    REQUIRE(inst.x_star.norm() == 0.0);
    // the objective at zero matches, and the reference solver agrees
    const CompositeProblem& p = *as_composite(inst);
    REQUIRE(p.f.value(Vec::Zero(6)) == Catch::Approx(inst.known->value));
    const double ref = ref_prox_grad(p, inst.x0, 20000);
    REQUIRE(std::abs(ref - inst.known->value) <= 1e-9);
  }
  SECTION("below the threshold no reference is claimed") {
    const Instance inst = lasso(A, b, 0.5 * thresh);
    REQUIRE(!inst.known.has_value());
    REQUIRE(inst.x_star.size() == 0);
    // and the true optimum strictly improves on the zero vector
    const double ref = ref_prox_grad(*as_composite(inst), inst.x0, 50000);
    REQUIRE(ref < 0.5 * b.squaredNorm() - 1e-8);
  }
  REQUIRE_THROWS_AS(lasso(A, b, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(lasso(A, Vec::Zero(5), 1.0), std::invalid_argument);
}

TEST_CASE("lasso dual pairs with the primal through strong duality",
          "[problems][lasso]") {
  Rng rng(1234);
  Mat A(5, 8);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 8; ++j) A(i, j) = rng.normal();
  const Vec b = rng.gaussian(5);
  const double gamma =
      0.4 * (A.transpose() * b).lpNorm<Eigen::Infinity>();

  const Instance dual = lasso_dual(A, b, gamma);
  const NlpProblem& pd = *as_nlp(dual);
  REQUIRE(pd.n == 5);
  REQUIRE(pd.m == 8);
  // the constraint map is A'v ranged in [-gamma, gamma]
  const Vec v = rng.gaussian(5);
  REQUIRE((pd.c(v) - A.transpose() * v).norm() == 0.0);
  REQUIRE(pd.Qc.kind == ProxKind::Box);
  REQUIRE(pd.Qc.upper[0] == gamma);

  AlmConfig cfg;
  cfg.final_eta = 1e-10;
  cfg.final_eps = 1e-10;
  cfg.max_outer = 80;
  cfg.inner.max_iter = 60000;
  const SolveReport rep = solve_practical(pd, dual.x0, cfg, InnerKind::BB);
  REQUIRE(rep.status == SolveStatus::Converged);
  const double dual_val = pd.f.value(rep.x);

  const double primal_val = ref_prox_grad(lasso(A, b, gamma), 300000);
  REQUIRE(primal_val + dual_val ==
          Catch::Approx(0.5 * b.squaredNorm()).epsilon(1e-7));
}

TEST_CASE("basis pursuit planting", "[problems][bp]") {
  Rng rng(42);
  const Instance inst = basis_pursuit_instance(rng, 6, 16, 3, 20.0);
  const CompositeProblem& p = *as_composite(inst);

  REQUIRE(inst.x_star.size() == 16);
  Index support = 0;
  for (Index i = 0; i < 16; ++i)
    if (inst.x_star[i] != 0.0) ++support;
  REQUIRE(support == 3);
  // magnitudes stay within the declared dynamic range [1, 10]
  for (Index i = 0; i < 16; ++i)
    if (inst.x_star[i] != 0.0) {
      REQUIRE(std::abs(inst.x_star[i]) >= 1.0);
      REQUIRE(std::abs(inst.x_star[i]) <= 10.0);
    }

  // the right-hand side is exactly A x_star, rows are orthonormal
  REQUIRE(p.Q.kind == ProxKind::Point);
  REQUIRE((p.A.apply(inst.x_star) - p.Q.target).norm() == 0.0);
  Mat A(6, 16);
  for (Index j = 0; j < 16; ++j) {
    Vec e = Vec::Zero(16);
    e[j] = 1.0;
    A.col(j) = p.A.apply(e);
  }
  REQUIRE((A * A.transpose() - Mat::Identity(6, 6)).norm() <= 1e-12);
  REQUIRE(inst.known->value == Catch::Approx(inst.x_star.lpNorm<1>()));

  SECTION("sign flips negate the plant and the data") {
    Rng r1(99), r2(99);
    const Instance a = basis_pursuit_instance(r1, 4, 10, 2, 6.0, false);
    const Instance bflip = basis_pursuit_instance(r2, 4, 10, 2, 6.0, true);
    REQUIRE((a.x_star + bflip.x_star).norm() == 0.0);
    REQUIRE((as_composite(a)->Q.target + as_composite(bflip)->Q.target)
                .norm() == 0.0);
    REQUIRE(a.known->value == bflip.known->value);
  }

  REQUIRE_THROWS_AS(basis_pursuit_instance(rng, 8, 4, 2, 0.0),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(basis_pursuit_instance(rng, 4, 8, 9, 0.0),
                    std::invalid_argument);
}

TEST_CASE("box LP wiring", "[problems][lp]") {
  Vec c(3);
  c << 1.0, -2.0, 0.5;
  Mat A(2, 3);
  A << 1.0, 1.0, 0.0, 0.0, 1.0, -1.0;
  Vec lq(2), uq(2);
  lq << -1.0, -2.0;
  uq << 1.5, 2.0;
  const Vec lk = Vec::Constant(3, -1.0), uk = Vec::Constant(3, 1.0);
  const Instance inst = lp_box(c, A, lq, uq, lk, uk);
  const CompositeProblem& p = *as_composite(inst);

  // seed sits inside the variable box
  for (Index i = 0; i < 3; ++i) {
    REQUIRE(inst.x0[i] >= lk[i]);
    REQUIRE(inst.x0[i] <= uk[i]);
  }
  const Vec x = Vec::Constant(3, 0.25);
  REQUIRE(p.f.value(x) == Catch::Approx(c.dot(x)));
  REQUIRE((p.A.apply(x) - A * x).norm() == 0.0);

  // the vertex oracle and the ALM solve agree on this tiny LP
  Vec xv;
  const double vertex = lp_vertex(inst, &xv);
  AlmConfig cfg;
  cfg.final_eta = 1e-9;
  cfg.final_eps = 1e-9;
  cfg.inner.max_iter = 50000;
  cfg.max_outer = 60;
  const SolveReport rep = solve_practical(p, inst.x0, cfg, InnerKind::BB);
  REQUIRE(rep.status == SolveStatus::Converged);
  REQUIRE(std::abs(c.dot(rep.x) - vertex) <= 1e-6);

  REQUIRE_THROWS_AS(lp_box(c, Mat::Ones(2, 4), lq, uq, lk, uk),
                    std::invalid_argument);
}

TEST_CASE("portfolio instances", "[problems][portfolio]") {
  SECTION("water-filling return bound") {
    Vec gam(3);
    gam << 3.0, 2.0, 1.0;
    REQUIRE(portfolio_max_return(gam, 0.6) == Catch::Approx(2.6));
    Vec neg(2);
    neg << 1.0, -5.0;
    REQUIRE(portfolio_max_return(neg, 2.0) == Catch::Approx(1.0));
    REQUIRE_THROWS_AS(portfolio_max_return(gam, 0.0), std::invalid_argument);
  }

  Rng rng(55);
  Mat B(4, 4);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j) B(i, j) = rng.normal();
  const Mat Qc = Mat(B.transpose() * B) / 4.0 + 0.1 * Mat::Identity(4, 4);
  Vec gam(4);
  gam << 0.3, 0.1, 0.25, 0.05;

  SECTION("convex wiring: return row, budget row, boxes") {
    const double varrho = 0.1, u = 0.5;
    const Instance inst = portfolio(Qc, gam, varrho, u, PortfolioReg::L1, 0.02);
    const CompositeProblem& p = *as_composite(inst);
    REQUIRE(p.h.kind == ProxKind::L1);
    const Vec x = rng.gaussian(4);
    const Vec cx = p.A.apply(x);
    REQUIRE(cx[0] == Catch::Approx(-gam.dot(x)));
    REQUIRE(cx[1] == Catch::Approx(x.sum()));
    REQUIRE(p.Q.kind == ProxKind::Box);
    REQUIRE(p.Q.upper[0] == -varrho);
    REQUIRE(p.Q.upper[1] == 1.0);
    REQUIRE(p.K.kind == ProxKind::Box);
    REQUIRE(p.K.lower.minCoeff() == 0.0);
    REQUIRE(p.K.upper.maxCoeff() == u);
    REQUIRE(inst.note.empty());
  }

  SECTION("l0 regularization moves the instance to the nonconvex class") {
    const Instance inst = portfolio(Qc, gam, 0.1, 0.5, PortfolioReg::L0, 0.02);
    const NcCompositeProblem* nc = as_nc(inst);
    REQUIRE(nc != nullptr);
    REQUIRE(nc->h.kind == ProxKind::L0);
    const Vec x = rng.gaussian(4);
    const Vec cx = nc->c(x);
    REQUIRE(cx[0] == Catch::Approx(0.1 - gam.dot(x)));
    REQUIRE(cx[1] == Catch::Approx(x.sum() - 1.0));
    REQUIRE(nc->Q.upper.maxCoeff() == 0.0);
  }

  SECTION("an indefinite covariance is flagged in the note") {
    Mat Qi = Mat::Identity(3, 3);
    Qi(2, 2) = -0.5;
    Vec g3 = Vec::Constant(3, 0.1);
    const Instance inst = portfolio(Qi, g3, 0.01, 0.9);
    REQUIRE(!inst.note.empty());
  }

  REQUIRE_THROWS_AS(portfolio(Qc, gam, 0.1, 0.5, PortfolioReg::L1, 0.0),
                    std::invalid_argument);
}

TEST_CASE("equality SDP vectorization", "[problems][sdp]") {
  const Index n = 4;
  Rng rng(31);
  Mat Braw(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) Braw(i, j) = rng.normal();
  const SymMat C = 0.5 * (Braw + Braw.transpose());
  std::vector<SymMat> As;
  Vec b(2);
  for (int t = 0; t < 2; ++t) {
    Mat M(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) M(i, j) = rng.normal();
    As.push_back(SymMat(0.5 * (M + M.transpose())));
    b[t] = rng.normal();
  }
  const Instance inst = sdp_eq(C, As, b);
  const CompositeProblem& p = *as_composite(inst);

  REQUIRE(p.n == svec_dim(n));
  REQUIRE((sunvec(inst.x0) - Mat::Identity(n, n)).norm() <= 1e-14);
  REQUIRE(p.K.kind == ProxKind::PSDCone);
  REQUIRE(p.Q.kind == ProxKind::Point);

  // Euclidean pairings in svec coordinates equal Frobenius pairings
  Mat Xr(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) Xr(i, j) = rng.normal();
  const SymMat X = 0.5 * (Xr + Xr.transpose());
  const Vec xs = svec(X);
  REQUIRE(p.f.value(xs) == Catch::Approx((C * X).trace()).epsilon(1e-12));
  const Vec cx = p.A.apply(xs);
  REQUIRE(cx[0] == Catch::Approx((As[0] * X).trace()).epsilon(1e-12));
  REQUIRE(cx[1] == Catch::Approx((As[1] * X).trace()).epsilon(1e-12));

  REQUIRE_THROWS_AS(sdp_eq(Mat::Identity(65, 65), {}, Vec::Zero(0)),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(sdp_eq(C, As, Vec::Zero(3)), std::invalid_argument);
}

TEST_CASE("toy NLP ships its KKT pair", "[problems][toy]") {
  const Instance inst = toy_nlp();
  const NlpProblem& p = *as_nlp(inst);
  REQUIRE(inst.known->value == 1.0);
  REQUIRE(inst.x_star[0] == 1.0);
  const Vec x = Vec::Constant(1, 0.5);
  REQUIRE(p.f.value(x) == 0.25);
  REQUIRE(p.c(x)[0] == 0.5);
  REQUIRE(p.jac_c(x)(0, 0) == -1.0);
  REQUIRE(p.Qc.kind == ProxKind::Box);
  REQUIRE(p.Qc.upper[0] == 0.0);
}

TEST_CASE("random QP carries its raw data for the active-set oracle",
          "[problems][qp]") {
  Rng rng(2718);
  const QpBox qp = qp_box(rng, 7, 4);
  const NlpProblem& p = *as_nlp(qp.inst);

  REQUIRE(p.n == 7);
  REQUIRE(p.m == 4);
  const Vec x = rng.gaussian(7);
  REQUIRE((p.c(x) - (qp.A * x - qp.b)).norm() == 0.0);
  REQUIRE((p.f.grad(x) - (qp.H * x + qp.g)).norm() <= 1e-13);

  // the curvature floor keeps the quadratic strongly convex
  const EigResult eig = jacobi_eig(SymMat(qp.H));
  REQUIRE(eig.eigenvalues[6] >= 0.999);

  // the active-set oracle returns a KKT-consistent point
  const QpOracleResult kkt = qp_kkt(qp.H, qp.g, qp.A, qp.b);
  REQUIRE((qp.A * kkt.x - qp.b).maxCoeff() <= 1e-8);
  REQUIRE(kkt.lambda.minCoeff() >= -1e-12);
  const Vec stat = qp.H * kkt.x + qp.g + qp.A.transpose() * kkt.lambda;
  REQUIRE(stat.norm() <= 1e-8);
  // complementary slackness
  for (Index i = 0; i < 4; ++i) {
    const double slack = qp.b[i] - (qp.A * kkt.x)[i];
    REQUIRE(std::abs(kkt.lambda[i] * slack) <= 1e-8);
  }

  REQUIRE_THROWS_AS(qp_box(rng, 5, 7), std::invalid_argument);
}

TEST_CASE("block binary toys are feasible by construction", "[problems][ip]") {
  Rng rng(64);
  const Instance inst = ip_block_toy(rng, 3, 4, 2);
  const IpProblem& p = *as_ip(inst);
  REQUIRE(p.n() == 12);
  REQUIRE(p.m() == 2);
  REQUIRE(inst.x_feasible.size() == 12);
  const Vec r = p.A.apply(inst.x_feasible) - p.b;
  REQUIRE(r.maxCoeff() <= 0.0);
  for (Index i = 0; i < 12; ++i)
    REQUIRE((inst.x_feasible[i] == 0.0 || inst.x_feasible[i] == 1.0));
  Index total = 0;
  for (const BlockSet& bs : p.blocks) total += bs.dim;
  REQUIRE(total == 12);

  REQUIRE_THROWS_AS(ip_block_toy(rng, 5, 4, 2), std::invalid_argument);
}
