#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "pmrf/linbp.hpp"
#include "pmrf/oracle.hpp"
#include "test_util.hpp"

using namespace pmrf;

namespace {

// Q rows [0.3, -0.3], single edge w=1, default C=2 coupling. The scalar
// fixed point x = 0.3 + 0.8x gives rows [1.5, -1.5].
struct WorkedInstance {
  SparseGraph g = build_graph(std::vector<std::pair<int, int>>{{0, 1}}, 2);
  EdgeWeights w{{1.0}};
  CouplingMatrix H = init_coupling(2);
  PriorMatrix Q;
  WorkedInstance() {
    Q.C = 2;
    Q.Q = Mat(2, 2);
    for (int v = 0; v < 2; ++v) {
      Q.Q(v, 0) = 0.3;
      Q.Q(v, 1) = -0.3;
    }
  }
};

}  // namespace

TEST_CASE("propagate_step") {
  WorkedInstance wi;
  SUBCASE("zero weights return Q") {
    EdgeWeights w0{{0.0}};
    const auto P1 = propagate_step(wi.Q, wi.g, w0, {wi.Q.Q, 0, false}, wi.H);
    CHECK(max_abs_diff(P1.P, wi.Q.Q) == 0.0);
    CHECK(P1.iterations == 1);
  }
  SUBCASE("zero beliefs return Q") {
    const auto P1 = propagate_step(wi.Q, wi.g, wi.w, {Mat(2, 2), 0, false}, wi.H);
    CHECK(max_abs_diff(P1.P, wi.Q.Q) == 0.0);
  }
  SUBCASE("one step of the worked instance") {
    const auto P1 = propagate_step(wi.Q, wi.g, wi.w, {wi.Q.Q, 0, false}, wi.H);
    for (int v = 0; v < 2; ++v) {
      CHECK(P1.P(v, 0) == doctest::Approx(0.54).epsilon(1e-14));
      CHECK(P1.P(v, 1) == doctest::Approx(-0.54).epsilon(1e-14));
    }
  }
}

TEST_CASE("solve_linbp") {
  WorkedInstance wi;
  SUBCASE("worked instance fixed point") {
    const auto P = solve_linbp(wi.Q, wi.g, wi.w, wi.H, {1e-12, 400, -1});
    CHECK(P.converged);
    for (int v = 0; v < 2; ++v) {
      CHECK(P.P(v, 0) == doctest::Approx(1.5).epsilon(1e-9));
      CHECK(P.P(v, 1) == doctest::Approx(-1.5).epsilon(1e-9));
    }
  }
  SUBCASE("H = 0 converges to Q in one step") {
    const auto P = solve_linbp(wi.Q, wi.g, wi.w, CouplingMatrix{Mat(2, 2), 2});
    CHECK(P.converged);
    CHECK(max_abs_diff(P.P, wi.Q.Q) == 0.0);
  }
  SUBCASE("edgeless graph returns Q for any H") {
    const auto g0 = build_graph(std::vector<std::pair<int, int>>{}, 2);
    EdgeWeights w0{{}};
    const auto P = solve_linbp(wi.Q, g0, w0, wi.H);
    CHECK(P.converged);
    CHECK(max_abs_diff(P.P, wi.Q.Q) == 0.0);
  }
  SUBCASE("fixed-iteration mode counts exactly") {
    const auto P = solve_linbp(wi.Q, wi.g, wi.w, wi.H, {1e-8, 100, 3});
    CHECK(P.iterations == 3);
  }
}

TEST_CASE("solve_linbp matches the Kronecker-system oracle") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto inst = testutil::random_contractive_instance(seed, 8, 3, 0.75);
    const auto P = solve_linbp(inst.Q, inst.g, inst.w, inst.H, {1e-13, 3000, -1});
    REQUIRE(P.converged);
    const auto dense =
        dense_linbp_solve(inst.Q.Q, testutil::dense_adjacency(inst.g, inst.w), inst.H.H);
    REQUIRE_FALSE(dense.singular);
    CHECK(max_abs_diff(P.P, dense.P) <= 1e-8);
  }
}

TEST_CASE("converged solves satisfy the residual bound") {
  for (std::uint64_t seed : {21ULL, 22ULL, 23ULL}) {
    const auto inst = testutil::random_contractive_instance(seed, 8, 3, 0.6);
    const SolveOptions opt{1e-10, 2000, -1};
    const auto P = solve_linbp(inst.Q, inst.g, inst.w, inst.H, opt);
    REQUIRE(P.converged);
    CHECK(linbp_residual(inst.Q, inst.g, inst.w, inst.H, P) <= 10 * opt.tol);
  }
}

TEST_CASE("step sizes decay geometrically at rate rho") {
  // Worked instance: steps shrink by exactly rho = 0.8 per iteration.
  WorkedInstance wi;
  BeliefMatrix P{wi.Q.Q, 0, false};
  double first = 0, last = 0;
  const int iters = 20;
  for (int i = 0; i < iters; ++i) {
    const auto next = propagate_step(wi.Q, wi.g, wi.w, P, wi.H);
    last = max_abs_diff(next.P, P.P);
    if (i == 0) first = last;
    P = next;
  }
  CHECK(last <= first * std::pow(0.8 + 0.05, iters - 1));
}

TEST_CASE("solution is equivariant under node relabeling") {
  const auto inst = testutil::random_contractive_instance(5, 8, 3, 0.7);
  const int n = inst.g.n;
  // reversal permutation
  std::vector<int> perm(n);
  for (int v = 0; v < n; ++v) perm[v] = n - 1 - v;

  std::vector<std::pair<int, int>> edges;
  for (std::int64_t e = 0; e < inst.g.m; ++e)
    edges.emplace_back(perm[inst.g.edge_u[e]], perm[inst.g.edge_v[e]]);
  const auto g2 = build_graph(edges, n);
  EdgeWeights w2;
  w2.w.resize(g2.m);
  for (std::int64_t e = 0; e < g2.m; ++e) {
    const int pu = g2.edge_u[e], pv = g2.edge_v[e];
    w2.w[e] = edge_weight(inst.g, inst.w, perm[pu], perm[pv]);
  }
  PriorMatrix Q2{Mat(n, inst.Q.C), inst.Q.C};
  for (int v = 0; v < n; ++v)
    for (int c = 0; c < inst.Q.C; ++c) Q2.Q(perm[v], c) = inst.Q.Q(v, c);

  const SolveOptions opt{1e-12, 3000, -1};
  const auto P1 = solve_linbp(inst.Q, inst.g, inst.w, inst.H, opt);
  const auto P2 = solve_linbp(Q2, g2, w2, inst.H, opt);
  REQUIRE(P1.converged);
  REQUIRE(P2.converged);
  for (int v = 0; v < n; ++v)
    for (int c = 0; c < inst.Q.C; ++c)
      CHECK(P2.P(perm[v], c) == doctest::Approx(P1.P(v, c)).epsilon(1e-11));
}

TEST_CASE("predict: argmax with lowest-index ties") {
  Mat P(3, 3);
  P(0, 0) = 1.5;
  P(0, 1) = -1.5;
  P(0, 2) = -2.0;
  // row 1 all zeros: tie -> class 0
  P(2, 0) = -0.1;
  P(2, 1) = 0.2;
  P(2, 2) = 0.05;
  const auto pred = predict({P, 0, true});
  CHECK(pred == std::vector<int>{0, 0, 1});
}
