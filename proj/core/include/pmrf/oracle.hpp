#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "pmrf/matrix.hpp"

namespace pmrf {

// Brute-force references used only for verification. Nothing here shares
// code with the sparse kernels or the solver: dense storage, dense algebra.

// A pMRF small enough to enumerate: C^n <= 59049 (n <= 10, C <= 3).
// Potentials are uncentered and must be strictly positive.
struct TinyPMRF {
  int n = 0;
  int C = 0;
  Mat phi;                                   // n x C node potentials
  std::vector<std::pair<int, int>> edges;    // undirected, each once
  std::vector<Mat> psi;                      // per-edge C x C edge potentials
};

// Reconstructs uncentered potentials from centered inputs: q~ = Q + 1/C,
// psi~ = w_uv * H + 1/C. Throws InputError if any entry is not positive.
TinyPMRF make_tiny_pmrf(const Mat& Q, const std::vector<std::pair<int, int>>& edges,
                        const std::vector<double>& w, const Mat& H);

// Exact marginals of the joint product-form distribution by full enumeration.
// Each output row sums to 1.
Mat exact_marginals(const TinyPMRF& m);

struct DenseSolveResult {
  Mat P;
  bool singular = false;
};

// Solves (I - kron(W, H)) x = vec(Q) with vec stacking node rows (row-major
// over nodes), dense LU. n * C <= 200.
DenseSolveResult dense_linbp_solve(const Mat& Q, const Mat& W_dense, const Mat& H);

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h. Throws
// NumericalError naming the coordinate if an evaluation is non-finite.
std::vector<double> fd_gradient(const std::function<double(std::span<const double>)>& f,
                                std::span<const double> x, double h);

}  // namespace pmrf
