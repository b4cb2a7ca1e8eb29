#pragma once

// Seeded generators and dense helpers shared by the unit and acceptance
// suites. Dense computations here go through Eigen so they stay independent
// of the sparse kernels under test.

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

#include "pmrf/coupling.hpp"
#include "pmrf/graph.hpp"
#include "pmrf/learner.hpp"
#include "pmrf/priors.hpp"
#include "pmrf/rng.hpp"

namespace testutil {

using pmrf::CouplingMatrix;
using pmrf::EdgeWeights;
using pmrf::Mat;
using pmrf::PriorMatrix;
using pmrf::SparseGraph;
using pmrf::SplitMix64;

inline Eigen::MatrixXd to_eigen(const Mat& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

inline Mat from_eigen(const Eigen::MatrixXd& m) {
  Mat out(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

inline Mat dense_adjacency(const SparseGraph& g, const EdgeWeights& w) {
  Mat A(g.n, g.n);
  for (std::int64_t e = 0; e < g.m; ++e) {
    A(g.edge_u[e], g.edge_v[e]) = w.w[e];
    A(g.edge_v[e], g.edge_u[e]) = w.w[e];
  }
  return A;
}

inline double dense_rho_sym(const Mat& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(m));
  double r = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    r = std::max(r, std::abs(es.eigenvalues()(i)));
  return r;
}

inline SparseGraph random_graph(int n, double p, SplitMix64& rng) {
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.uniform01() < p) edges.emplace_back(u, v);
  return pmrf::build_graph(edges, n);
}

// Valid centered priors: positive rows normalized to 1, then shifted by -1/C.
inline PriorMatrix random_centered_priors(int n, int C, SplitMix64& rng) {
  PriorMatrix out{Mat(n, C), C};
  for (int v = 0; v < n; ++v) {
    double z = 0.0;
    std::vector<double> row(C);
    for (int c = 0; c < C; ++c) {
      row[c] = rng.uniform(0.05, 1.0);
      z += row[c];
    }
    for (int c = 0; c < C; ++c) out.Q(v, c) = row[c] / z - 1.0 / C;
  }
  return out;
}

// Symmetric with entries bounded away from zero (keeps l1 subgradients clean
// under small finite-difference steps).
inline Mat random_symmetric(int C, double lo, double hi, SplitMix64& rng) {
  Mat H(C, C);
  for (int i = 0; i < C; ++i)
    for (int j = i; j < C; ++j) {
      double x = rng.uniform(lo, hi) * (rng.below(2) ? 1.0 : -1.0);
      H(i, j) = x;
      H(j, i) = x;
    }
  return H;
}

inline EdgeWeights random_weights(const SparseGraph& g, SplitMix64& rng) {
  EdgeWeights w;
  w.w.resize(g.m);
  for (auto& x : w.w) x = rng.uniform(0.1, 1.0);
  return w;
}

struct ContractiveInstance {
  SparseGraph g;
  EdgeWeights w;
  PriorMatrix Q;
  CouplingMatrix H;
};

// Random instance with rho(H) * rho(W) scaled to target (skipped for
// edgeless graphs, which are contractive for any H).
inline ContractiveInstance random_contractive_instance(std::uint64_t seed, int n_max,
                                                       int C_max, double target) {
  SplitMix64 rng(seed);
  ContractiveInstance inst;
  const int n = 2 + static_cast<int>(rng.below(n_max - 1));
  const int C = 2 + static_cast<int>(rng.below(C_max - 1));
  inst.g = random_graph(n, 0.5, rng);
  inst.w = random_weights(inst.g, rng);
  inst.Q = random_centered_priors(n, C, rng);
  Mat H = random_symmetric(C, 0.05, 0.5, rng);
  const double rho_w = dense_rho_sym(dense_adjacency(inst.g, inst.w));
  const double rho_h = dense_rho_sym(H);
  if (rho_w > 0.0 && rho_h > 0.0) {
    const double scale = target / (rho_h * rho_w);
    for (std::size_t i = 0; i < H.size(); ++i) H.data()[i] *= scale;
  }
  inst.H = CouplingMatrix{std::move(H), C};
  return inst;
}

struct LearningInstance {
  SparseGraph g;
  EdgeWeights w;
  PriorMatrix Q;
  CouplingMatrix H;
  std::vector<int> labels;
  std::vector<int> train;
  pmrf::BeliefMatrix P;  // the P(t) the subproblem is anchored at
};

inline LearningInstance random_learning_instance(std::uint64_t seed, int n_max, int C_max) {
  SplitMix64 rng(seed);
  LearningInstance inst;
  const int n = 3 + static_cast<int>(rng.below(n_max - 2));
  const int C = 2 + static_cast<int>(rng.below(C_max - 1));
  inst.g = random_graph(n, 0.6, rng);
  inst.w = random_weights(inst.g, rng);
  inst.Q = random_centered_priors(n, C, rng);
  inst.H = CouplingMatrix{random_symmetric(C, 0.05, 0.4, rng), C};
  inst.labels.resize(n);
  for (int v = 0; v < n; ++v) inst.labels[v] = static_cast<int>(rng.below(C));
  const int train_size = 1 + static_cast<int>(rng.below(n));
  std::vector<int> nodes(n);
  for (int v = 0; v < n; ++v) nodes[v] = v;
  inst.train = pmrf::sample_without_replacement(nodes, train_size, rng);
  std::sort(inst.train.begin(), inst.train.end());
  // anchor beliefs: one propagation away from the priors
  inst.P = pmrf::propagate_step(inst.Q, inst.g, inst.w, {inst.Q.Q, 0, false}, inst.H);
  return inst;
}

inline bool close(double a, double b, double rel, double abs_floor) {
  return std::abs(a - b) <= std::max(abs_floor, rel * std::max(std::abs(a), std::abs(b)));
}

}  // namespace testutil
