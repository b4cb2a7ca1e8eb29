#include "pmrf/linbp.hpp"

#include <algorithm>
#include <cmath>

#include "pmrf/errors.hpp"

namespace pmrf {

BeliefMatrix propagate_step(const PriorMatrix& Q, const SparseGraph& g,
                            const EdgeWeights& w, const BeliefMatrix& P,
                            const CouplingMatrix& H) {
  check_contract(Q.Q.rows() == g.n && P.P.rows() == g.n, "propagate_step: row count != n");
  check_contract(Q.Q.cols() == H.C && P.P.cols() == H.C,
                 "propagate_step: class count mismatch");
  BeliefMatrix out;
  out.P = spmm_propagate(g, w, P.P, H.H);
  for (std::size_t i = 0; i < out.P.size(); ++i) out.P.data()[i] += Q.Q.data()[i];
  out.iterations = P.iterations + 1;
  return out;
}

BeliefMatrix solve_linbp(const PriorMatrix& Q, const SparseGraph& g,
                         const EdgeWeights& w, const CouplingMatrix& H,
                         const SolveOptions& opt) {
  BeliefMatrix P{Q.Q, 0, false};
  if (opt.fixed_iters >= 0) {
    for (int it = 0; it < opt.fixed_iters; ++it) P = propagate_step(Q, g, w, P, H);
    P.converged = true;  // fixed-count mode has no tolerance to miss
    return P;
  }
  for (int it = 0; it < opt.max_iter; ++it) {
    BeliefMatrix next = propagate_step(Q, g, w, P, H);
    const double delta = max_abs_diff(next.P, P.P);
    P = std::move(next);
    if (delta <= opt.tol) {
      P.converged = true;
      return P;
    }
  }
  return P;
}

double linbp_residual(const PriorMatrix& Q, const SparseGraph& g, const EdgeWeights& w,
                      const CouplingMatrix& H, const BeliefMatrix& P) {
  Mat rhs = spmm_propagate(g, w, P.P, H.H);
  double worst = 0.0;
  for (std::size_t i = 0; i < rhs.size(); ++i)
    worst = std::max(worst, std::abs(P.P.data()[i] - Q.Q.data()[i] - rhs.data()[i]));
  return worst;
}

int argmax_row(std::span<const double> row) {
  int best = 0;
  for (int c = 1; c < static_cast<int>(row.size()); ++c)
    if (row[c] > row[best]) best = c;
  return best;
}

std::vector<int> predict(const BeliefMatrix& P) {
  std::vector<int> out(P.P.rows());
  for (int v = 0; v < P.P.rows(); ++v) out[v] = argmax_row(P.P.row(v));
  return out;
}

}  // namespace pmrf
