#include "pmrf/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pmrf/errors.hpp"

namespace pmrf {

SparseGraph build_graph(std::span<const std::pair<int, int>> edges, int n) {
  if (n < 0) throw InputError("build_graph: negative node count");

  std::vector<std::pair<int, int>> canon;
  canon.reserve(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto [u, v] = edges[i];
    if (u < 0 || u >= n || v < 0 || v >= n) {
      throw InputError("build_graph: node id out of range [0, " + std::to_string(n) +
                       ") at edge index " + std::to_string(i) + ": " +
                       std::to_string(u) + " " + std::to_string(v));
    }
    if (u == v) continue;  // self-loops dropped
    canon.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(canon.begin(), canon.end());
  canon.erase(std::unique(canon.begin(), canon.end()), canon.end());

  SparseGraph g;
  g.n = n;
  g.m = static_cast<std::int64_t>(canon.size());
  g.edge_u.reserve(canon.size());
  g.edge_v.reserve(canon.size());
  g.degree.assign(n, 0);
  for (const auto& [u, v] : canon) {
    g.edge_u.push_back(u);
    g.edge_v.push_back(v);
    ++g.degree[u];
    ++g.degree[v];
  }

  g.row_ptr.assign(n + 1, 0);
  for (int v = 0; v < n; ++v) g.row_ptr[v + 1] = g.row_ptr[v] + g.degree[v];
  g.neighbors.resize(2 * g.m);
  g.slot.resize(2 * g.m);
  std::vector<std::int64_t> cursor(g.row_ptr.begin(), g.row_ptr.end() - 1);
  for (std::int64_t e = 0; e < g.m; ++e) {
    const int u = g.edge_u[e], v = g.edge_v[e];
    g.neighbors[cursor[u]] = v;
    g.slot[cursor[u]++] = e;
  }
  for (std::int64_t e = 0; e < g.m; ++e) {
    const int u = g.edge_u[e], v = g.edge_v[e];
    g.neighbors[cursor[v]] = u;
    g.slot[cursor[v]++] = e;
  }
  // Each row now holds its larger neighbors then its smaller ones; sort to
  // make neighbor ids ascending per row.
  for (int v = 0; v < n; ++v) {
    const auto b = g.row_ptr[v], e = g.row_ptr[v + 1];
    std::vector<std::pair<int, std::int64_t>> row;
    row.reserve(e - b);
    for (auto i = b; i < e; ++i) row.emplace_back(g.neighbors[i], g.slot[i]);
    std::sort(row.begin(), row.end());
    for (auto i = b; i < e; ++i) {
      g.neighbors[i] = row[i - b].first;
      g.slot[i] = row[i - b].second;
    }
  }
  return g;
}

EdgeWeights init_weights(const SparseGraph& g) {
  EdgeWeights w;
  w.w.resize(g.m);
  for (std::int64_t e = 0; e < g.m; ++e) {
    const double du = g.degree[g.edge_u[e]];
    const double dv = g.degree[g.edge_v[e]];
    w.w[e] = 1.0 / std::sqrt(du * dv);
  }
  return w;
}

Mat weighted_neighbor_sum(const SparseGraph& g, const EdgeWeights& w, const Mat& P) {
  check_contract(P.rows() == g.n, "weighted_neighbor_sum: P row count != n");
  check_contract(static_cast<std::int64_t>(w.w.size()) == g.m,
                 "weighted_neighbor_sum: weight count != m");
  const int C = P.cols();
  Mat S(g.n, C);
#pragma omp parallel for schedule(static)
  for (int v = 0; v < g.n; ++v) {
    const auto out = S.row(v);
    for (std::int64_t i = g.row_ptr[v]; i < g.row_ptr[v + 1]; ++i) {
      const int u = g.neighbors[i];
      const double wu = w.w[g.slot[i]];
      const auto pu = P.row(u);
      for (int k = 0; k < C; ++k) out[k] += wu * pu[k];
    }
  }
  return S;
}

Mat spmm_propagate(const SparseGraph& g, const EdgeWeights& w, const Mat& P,
                   const Mat& H) {
  check_contract(H.rows() == H.cols() && H.rows() == P.cols(),
                 "spmm_propagate: H must be C x C with C = P.cols()");
  return mat_mul(weighted_neighbor_sum(g, w, P), H);
}

double edge_weight(const SparseGraph& g, const EdgeWeights& w, int u, int v) {
  for (std::int64_t i = g.row_ptr[u]; i < g.row_ptr[u + 1]; ++i)
    if (g.neighbors[i] == v) return w.w[g.slot[i]];
  throw ContractViolation("edge_weight: nodes not adjacent");
}

}  // namespace pmrf
