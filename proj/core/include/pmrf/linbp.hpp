#pragma once

#include <vector>

#include "pmrf/coupling.hpp"
#include "pmrf/graph.hpp"
#include "pmrf/priors.hpp"

namespace pmrf {

// Centered approximate marginals P, one row per node.
struct BeliefMatrix {
  Mat P;
  int iterations = 0;
  bool converged = false;
};

// P' = Q + W*P*H, iteration counter incremented.
BeliefMatrix propagate_step(const PriorMatrix& Q, const SparseGraph& g,
                            const EdgeWeights& w, const BeliefMatrix& P,
                            const CouplingMatrix& H);

struct SolveOptions {
  double tol = 1e-8;    // max-norm change between iterates
  int max_iter = 100;
  int fixed_iters = -1; // >= 0 runs exactly this many steps, ignoring tol
};

// Iterates propagate_step from P(0) = Q. Converges when rho(H)*rho(W) < 1;
// non-convergence is reported in the flag, never thrown.
BeliefMatrix solve_linbp(const PriorMatrix& Q, const SparseGraph& g,
                         const EdgeWeights& w, const CouplingMatrix& H,
                         const SolveOptions& opt = {});

// ||P - Q - W*P*H||_inf.
double linbp_residual(const PriorMatrix& Q, const SparseGraph& g, const EdgeWeights& w,
                      const CouplingMatrix& H, const BeliefMatrix& P);

// Argmax per row; ties go to the lowest class index.
std::vector<int> predict(const BeliefMatrix& P);
int argmax_row(std::span<const double> row);

}  // namespace pmrf
