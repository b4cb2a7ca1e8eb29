#include "pmrf/coupling.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "pmrf/errors.hpp"

namespace pmrf {

CouplingMatrix init_coupling(int C) {
  if (C < 2) throw InputError("init_coupling: class count must be >= 2");
  CouplingMatrix cm{Mat(C, C), C};
  const double off = 0.1 / (C - 1);
  for (int i = 0; i < C; ++i)
    for (int j = 0; j < C; ++j) cm.H(i, j) = (i == j ? 0.9 : off) - 1.0 / C;
  return cm;
}

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

SpectralEstimate spectral_radius(
    const std::function<void(std::span<const double>, std::span<double>)>& apply,
    int dim, double tol, int max_iter) {
  SpectralEstimate est;
  if (dim == 0) {
    est.converged = true;
    return est;
  }
  std::vector<double> v(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
  std::vector<double> mv(dim);
  bool perturbed = false;
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    apply(v, mv);
    const double nv = norm2(mv);
    if (nv == 0.0) {
      if (!perturbed) {
        // all-ones start landed in the kernel; deterministic restart
        perturbed = true;
        for (int i = 0; i < dim; ++i) v[i] = 1.0 + 0.01 * (i + 1);
        const double s = norm2(v);
        for (double& x : v) x /= s;
        continue;
      }
      est.value = 0.0;
      est.converged = true;
      est.iterations = it + 1;
      return est;
    }
    // Rayleigh quotient; v is unit length
    double rq = 0.0;
    for (int i = 0; i < dim; ++i) rq += v[i] * mv[i];
    for (int i = 0; i < dim; ++i) v[i] = mv[i] / nv;
    est.iterations = it + 1;
    if (it > 0 && std::abs(rq - lambda) <= tol * std::max(1.0, std::abs(rq))) {
      est.value = std::abs(rq);
      est.converged = true;
      return est;
    }
    lambda = rq;
  }
  est.value = std::abs(lambda);
  est.converged = false;
  return est;
}

SpectralEstimate spectral_radius(const Mat& M, double tol, int max_iter) {
  check_contract(M.rows() == M.cols(), "spectral_radius: matrix not square");
  const int d = M.rows();
  auto apply = [&](std::span<const double> x, std::span<double> y) {
    for (int i = 0; i < d; ++i) {
      double s = 0.0;
      for (int j = 0; j < d; ++j) s += M(i, j) * x[j];
      y[i] = s;
    }
  };
  return spectral_radius(apply, d, tol, max_iter);
}

SpectralEstimate graph_spectral_radius(const SparseGraph& g, const EdgeWeights& w,
                                       double tol, int max_iter) {
  auto apply = [&](std::span<const double> x, std::span<double> y) {
    for (int v = 0; v < g.n; ++v) {
      double s = 0.0;
      for (std::int64_t i = g.row_ptr[v]; i < g.row_ptr[v + 1]; ++i)
        s += w.w[g.slot[i]] * x[g.neighbors[i]];
      y[v] = s;
    }
  };
  return spectral_radius(apply, g.n, tol, max_iter);
}

ConvergenceDiag check_convergence(const SparseGraph& g, const EdgeWeights& w,
                                  const CouplingMatrix& H) {
  ConvergenceDiag d;
  const auto rw = graph_spectral_radius(g, w);
  const auto rh = spectral_radius(H.H);
  d.rho_W = rw.value;
  d.rho_H = rh.value;
  d.rho_W_converged = rw.converged;
  d.rho_H_converged = rh.converged;
  d.satisfied = d.rho_H * d.rho_W < 1.0;
  return d;
}

void export_coupling_csv(const CouplingMatrix& H, const std::filesystem::path& centered,
                         const std::filesystem::path& uncentered) {
  auto write = [&](const std::filesystem::path& p, double shift) {
    std::ofstream out(p);
    if (!out) throw InputError("export_coupling_csv: cannot open " + p.string());
    char buf[64];
    for (int i = 0; i < H.C; ++i) {
      for (int j = 0; j < H.C; ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", H.H(i, j) + shift);
        out << buf << (j + 1 < H.C ? "," : "\n");
      }
    }
  };
  write(centered, 0.0);
  write(uncentered, 1.0 / H.C);
}

}  // namespace pmrf
