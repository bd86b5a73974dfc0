// Binary knapsack-style selection solved by the block-coordinate ALM
// heuristic, with the exhaustive optimum and the Lagrangian lower bound
// printed alongside.  Items are grouped into pick-at-most-one display slots
// plus free binary extras; the single coupling row is the weight budget.

#include <cstdio>

#include "almkit/almkit.hpp"

using namespace almkit;

int main() {
  Rng rng(11);

  // 4 slots x 3 candidates = 12 binary variables; at most one candidate per
  // slot; one knapsack row.
  const int slots = 4;
  const Index per = 3;
  const Index n = slots * per;

  IpProblem p;
  p.c = Vec(n);
  Vec weight(n);
  for (Index j = 0; j < n; ++j) {
    p.c[j] = -rng.uniform(0.5, 2.0);     // maximize value == minimize -value
    weight[j] = rng.uniform(0.3, 1.2);
  }
  Mat A(1, n);
  A.row(0) = weight.transpose();
  p.A = dense_op(A);
  p.b = Vec::Constant(1, 2.0);  // budget
  for (int s = 0; s < slots; ++s)
    p.blocks.push_back(BlockSet{BlockKind::PickAtMostOne, per});

  BcdConfig cfg;
  cfg.rho0 = 1.0;
  cfg.max_outer = 200;
  cfg.final_eps = 1e-10;
  const SolveReport rep =
      alm_bcd_ip(p, Vec::Zero(n), cfg, BcdUpdate::Classical);

  const double heur = p.c.dot(rep.x);
  const double used = weight.dot(rep.x);
  std::printf("knapsack with %d slots x %ld candidates, budget %.1f\n\n",
              slots, long(per), p.b[0]);
  std::printf("  bcd heuristic value : %+.4f  (weight %.3f, %s)\n", -heur,
              used,
              rep.status == SolveStatus::Converged ? "feasible" : "stopped");
  std::printf("  selected items      :");
  for (Index j = 0; j < n; ++j)
    if (rep.x[j] > 0.5)
      std::printf(" slot%ld#%ld", long(j / per), long(j % per));
  std::printf("\n");

  const IpOracleResult bf = ip_bruteforce(p);
  std::printf("  exhaustive optimum  : %+.4f\n", -bf.value);

  // Lagrangian lower bound at the returned multiplier/penalty pair: the
  // minimum of the augmented Lagrangian over all feasible block assignments
  // never exceeds the optimum.
  const double bound = ip_al_min(p, rep.L.mu, rep.rho);
  std::printf("  dual lower bound    : %+.4f  (mu = %.4f, rho = %.1f)\n",
              -bound, rep.L.mu[0], rep.rho);
  std::printf("\n  sandwich: bound %.4f <= optimum %.4f <= heuristic %.4f\n",
              bound, bf.value, heur);
  return 0;
}
