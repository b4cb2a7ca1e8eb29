#pragma once

#include <filesystem>
#include <functional>
#include <span>

#include "pmrf/graph.hpp"
#include "pmrf/matrix.hpp"

namespace pmrf {

// Centered C x C coupling matrix H = H~ - 1/C, symmetric.
struct CouplingMatrix {
  Mat H;
  int C = 0;
};

// Homophily default: H~_ii = 0.9, H~_ij = 0.1/(C-1), returned centered.
CouplingMatrix init_coupling(int C);

struct SpectralEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Power iteration with Rayleigh quotient for symmetric operators, matrix-free.
// Starts from the normalized all-ones vector; if that lands in the kernel a
// fixed deterministic perturbation restart is used.
SpectralEstimate spectral_radius(
    const std::function<void(std::span<const double>, std::span<double>)>& apply,
    int dim, double tol = 1e-9, int max_iter = 1000);

SpectralEstimate spectral_radius(const Mat& M, double tol = 1e-9, int max_iter = 1000);

// rho(W) for the weighted adjacency, matrix-free over the graph.
SpectralEstimate graph_spectral_radius(const SparseGraph& g, const EdgeWeights& w,
                                       double tol = 1e-9, int max_iter = 1000);

struct ConvergenceDiag {
  double rho_W = 0.0;
  double rho_H = 0.0;
  bool satisfied = false;  // rho_H * rho_W < 1
  bool rho_W_converged = false;
  bool rho_H_converged = false;
};

ConvergenceDiag check_convergence(const SparseGraph& g, const EdgeWeights& w,
                                  const CouplingMatrix& H);

// Writes the centered matrix and its uncentered form H + 1/C as CSV,
// 17 significant digits.
void export_coupling_csv(const CouplingMatrix& H, const std::filesystem::path& centered,
                         const std::filesystem::path& uncentered);

}  // namespace pmrf
