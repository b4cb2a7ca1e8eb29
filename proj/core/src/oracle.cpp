#include "pmrf/oracle.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "pmrf/errors.hpp"

namespace pmrf {

TinyPMRF make_tiny_pmrf(const Mat& Q, const std::vector<std::pair<int, int>>& edges,
                        const std::vector<double>& w, const Mat& H) {
  check_contract(edges.size() == w.size(), "make_tiny_pmrf: edge/weight count mismatch");
  TinyPMRF m;
  m.n = Q.rows();
  m.C = Q.cols();
  const double shift = 1.0 / m.C;
  m.phi = Mat(m.n, m.C);
  for (int v = 0; v < m.n; ++v)
    for (int c = 0; c < m.C; ++c) {
      m.phi(v, c) = Q(v, c) + shift;
      if (!(m.phi(v, c) > 0.0))
        throw InputError("make_tiny_pmrf: nonpositive node potential at node " +
                         std::to_string(v));
    }
  m.edges = edges;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    Mat psi(m.C, m.C);
    for (int i = 0; i < m.C; ++i)
      for (int j = 0; j < m.C; ++j) {
        psi(i, j) = w[e] * H(i, j) + shift;
        if (!(psi(i, j) > 0.0))
          throw InputError("make_tiny_pmrf: nonpositive edge potential at edge " +
                           std::to_string(e));
      }
    m.psi.push_back(std::move(psi));
  }
  return m;
}

Mat exact_marginals(const TinyPMRF& m) {
  if (m.n < 1 || m.n > 10 || m.C < 1 || m.C > 3)
    throw InputError("exact_marginals: enumeration limits are n <= 10, C <= 3");

  Mat marg(m.n, m.C);
  std::vector<int> assign(m.n, 0);
  double z = 0.0;
  for (;;) {
    double p = 1.0;
    for (int v = 0; v < m.n; ++v) p *= m.phi(v, assign[v]);
    for (std::size_t e = 0; e < m.edges.size(); ++e)
      p *= m.psi[e](assign[m.edges[e].first], assign[m.edges[e].second]);
    z += p;
    for (int v = 0; v < m.n; ++v) marg(v, assign[v]) += p;
    // odometer over the C^n assignments
    int pos = m.n - 1;
    while (pos >= 0 && ++assign[pos] == m.C) assign[pos--] = 0;
    if (pos < 0) break;
  }
  for (int v = 0; v < m.n; ++v)
    for (int c = 0; c < m.C; ++c) marg(v, c) /= z;
  return marg;
}

DenseSolveResult dense_linbp_solve(const Mat& Q, const Mat& W_dense, const Mat& H) {
  const int n = Q.rows();
  const int C = Q.cols();
  check_contract(W_dense.rows() == n && W_dense.cols() == n,
                 "dense_linbp_solve: W must be n x n");
  check_contract(H.rows() == C && H.cols() == C, "dense_linbp_solve: H must be C x C");
  check_contract(static_cast<long>(n) * C <= 200, "dense_linbp_solve: n*C must be <= 200");

  // vec stacks node rows: x[v*C + i] = P(v, i); the system matrix is
  // I - kron(W, H) in that convention.
  const int dim = n * C;
  Eigen::MatrixXd K = Eigen::MatrixXd::Identity(dim, dim);
  Eigen::VectorXd q(dim);
  for (int v = 0; v < n; ++v)
    for (int i = 0; i < C; ++i) {
      q(v * C + i) = Q(v, i);
      for (int u = 0; u < n; ++u)
        for (int j = 0; j < C; ++j) K(v * C + i, u * C + j) -= W_dense(v, u) * H(j, i);
    }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  DenseSolveResult r;
  if (!lu.isInvertible()) {
    r.singular = true;
    return r;
  }
  const Eigen::VectorXd x = lu.solve(q);
  r.P = Mat(n, C);
  for (int v = 0; v < n; ++v)
    for (int i = 0; i < C; ++i) r.P(v, i) = x(v * C + i);
  return r;
}

std::vector<double> fd_gradient(const std::function<double(std::span<const double>)>& f,
                                std::span<const double> x, double h) {
  std::vector<double> point(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = point[i];
    point[i] = x0 + h;
    const double fp = f(point);
    point[i] = x0 - h;
    const double fm = f(point);
    point[i] = x0;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NumericalError("fd_gradient: non-finite evaluation at coordinate " +
                           std::to_string(i));
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

}  // namespace pmrf
