#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pmrf/matrix.hpp"

namespace pmrf {

// Undirected simple graph in CSR form. Each undirected edge owns one record;
// both half-edges point at it through `slot`, so per-edge quantities are
// symmetric by construction. Edge records are ordered by canonical (u, v)
// with u < v, which makes construction independent of input order.
struct SparseGraph {
  int n = 0;
  std::int64_t m = 0;
  std::vector<std::int64_t> row_ptr;  // n + 1
  std::vector<int> neighbors;         // 2m, ascending within each row
  std::vector<std::int64_t> slot;     // 2m, undirected edge record index
  std::vector<int> degree;            // n, distinct neighbors
  std::vector<int> edge_u, edge_v;    // m, canonical endpoints, u < v
};

// One weight per undirected edge record, shared by both directions.
struct EdgeWeights {
  std::vector<double> w;
};

// Builds the CSR graph from raw pairs. Duplicates collapse to one edge,
// self-loops are dropped, ids outside [0, n) raise InputError naming the
// offending position in `edges`.
SparseGraph build_graph(std::span<const std::pair<int, int>> edges, int n);

// w_uv = 1 / sqrt(d_u * d_v).
EdgeWeights init_weights(const SparseGraph& g);

// Weighted neighbor sum S with S_v = sum_{u in G(v)} w_uv * P_u, i.e. the
// W*P product. Rows accumulate in ascending neighbor order.
Mat weighted_neighbor_sum(const SparseGraph& g, const EdgeWeights& w, const Mat& P);

// The W*P*H propagation term, computed as (W*P)*H.
Mat spmm_propagate(const SparseGraph& g, const EdgeWeights& w, const Mat& P,
                   const Mat& H);

// Weight of half-edge (u, v); u and v must be adjacent.
double edge_weight(const SparseGraph& g, const EdgeWeights& w, int u, int v);

}  // namespace pmrf
