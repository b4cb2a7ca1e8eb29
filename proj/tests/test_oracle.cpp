#include <cmath>
#include <limits>

#include "doctest.h"
#include "pmrf/errors.hpp"
#include "pmrf/oracle.hpp"
#include "test_util.hpp"

using namespace pmrf;

namespace {

Mat mat2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m(0, 0) = a;
  m(0, 1) = b;
  m(1, 0) = c;
  m(1, 1) = d;
  return m;
}

}  // namespace

TEST_CASE("exact_marginals: single node normalizes its potential") {
  TinyPMRF m;
  m.n = 1;
  m.C = 2;
  m.phi = Mat(1, 2);
  m.phi(0, 0) = 0.7;
  m.phi(0, 1) = 0.3;
  const Mat marg = exact_marginals(m);
  CHECK(marg(0, 0) == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(marg(0, 1) == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("exact_marginals: uniform potentials with symmetric coupling stay uniform") {
  TinyPMRF m;
  m.n = 2;
  m.C = 2;
  m.phi = Mat(2, 2, 0.5);
  m.edges = {{0, 1}};
  m.psi = {mat2(0.6, 0.4, 0.4, 0.6)};
  const Mat marg = exact_marginals(m);
  for (int v = 0; v < 2; ++v)
    for (int c = 0; c < 2; ++c) CHECK(marg(v, c) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("exact_marginals: 3-node path against the transfer-matrix product") {
  // phi_0 = (0.7, 0.3), phi_1 = phi_2 = (0.5, 0.5), psi = [[.6,.4],[.4,.6]].
  // Transfer matrices give m_0 = (0.7, 0.3), m_1 = (0.54, 0.46),
  // m_2 = (0.508, 0.492).
  TinyPMRF m;
  m.n = 3;
  m.C = 2;
  m.phi = Mat(3, 2, 0.5);
  m.phi(0, 0) = 0.7;
  m.phi(0, 1) = 0.3;
  m.edges = {{0, 1}, {1, 2}};
  m.psi = {mat2(0.6, 0.4, 0.4, 0.6), mat2(0.6, 0.4, 0.4, 0.6)};
  const Mat marg = exact_marginals(m);
  CHECK(std::abs(marg(0, 0) - 0.7) <= 1e-12);
  CHECK(std::abs(marg(1, 0) - 0.54) <= 1e-12);
  CHECK(std::abs(marg(2, 0) - 0.508) <= 1e-12);

  // generic transfer-matrix evaluation of the same path, as a second route
  double t0[2], t1[2];
  for (int b = 0; b < 2; ++b)
    t0[b] = m.phi(0, 0) * m.psi[0](0, b) + m.phi(0, 1) * m.psi[0](1, b);
  for (int b = 0; b < 2; ++b) t0[b] *= m.phi(1, b);
  for (int c = 0; c < 2; ++c) t1[c] = t0[0] * m.psi[1](0, c) + t0[1] * m.psi[1](1, c);
  for (int c = 0; c < 2; ++c) t1[c] *= m.phi(2, c);
  const double z = t1[0] + t1[1];
  CHECK(std::abs(marg(2, 0) - t1[0] / z) <= 1e-12);
  CHECK(std::abs(marg(2, 1) - t1[1] / z) <= 1e-12);
}

TEST_CASE("exact_marginals: rows sum to one and relabeling permutes rows") {
  SplitMix64 rng(5);
  const auto Q = testutil::random_centered_priors(5, 3, rng);
  std::vector<std::pair<int, int>> edges{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}};
  std::vector<double> w(edges.size());
  for (auto& x : w) x = rng.uniform(0.05, 0.3);
  const Mat H = testutil::random_symmetric(3, 0.05, 0.3, rng);

  const auto m = make_tiny_pmrf(Q.Q, edges, w, H);
  const Mat marg = exact_marginals(m);
  for (int v = 0; v < 5; ++v) {
    double s = 0;
    for (int c = 0; c < 3; ++c) s += marg(v, c);
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }

  // reversal relabeling
  const int n = 5;
  TinyPMRF m2 = m;
  for (int v = 0; v < n; ++v)
    for (int c = 0; c < 3; ++c) m2.phi(n - 1 - v, c) = m.phi(v, c);
  for (auto& [u, v] : m2.edges) {
    u = n - 1 - u;
    v = n - 1 - v;
  }
  const Mat marg2 = exact_marginals(m2);
  for (int v = 0; v < n; ++v)
    for (int c = 0; c < 3; ++c)
      CHECK(marg2(n - 1 - v, c) == doctest::Approx(marg(v, c)).epsilon(1e-12));
}

TEST_CASE("exact_marginals: no edges returns row-normalized potentials") {
  TinyPMRF m;
  m.n = 3;
  m.C = 3;
  m.phi = Mat(3, 3);
  SplitMix64 rng(8);
  for (std::size_t i = 0; i < m.phi.size(); ++i) m.phi.data()[i] = rng.uniform(0.1, 2.0);
  const Mat marg = exact_marginals(m);
  for (int v = 0; v < 3; ++v) {
    double z = 0;
    for (int c = 0; c < 3; ++c) z += m.phi(v, c);
    for (int c = 0; c < 3; ++c)
      CHECK(marg(v, c) == doctest::Approx(m.phi(v, c) / z).epsilon(1e-14));
  }
}

TEST_CASE("exact_marginals: limits and positivity are enforced") {
  TinyPMRF big;
  big.n = 11;
  big.C = 2;
  big.phi = Mat(11, 2, 0.5);
  CHECK_THROWS_AS(exact_marginals(big), InputError);

  // psi~ entries of w*H + 1/C must stay positive
  Mat Q(2, 2);           // uniform priors
  Mat H = mat2(0.8, -0.8, -0.8, 0.8);
  CHECK_THROWS_AS(make_tiny_pmrf(Q, {{0, 1}}, {1.0}, H), InputError);
}

TEST_CASE("dense_linbp_solve: worked cases") {
  SUBCASE("H = 0 gives P = Q") {
    SplitMix64 rng(3);
    const auto Q = testutil::random_centered_priors(4, 2, rng);
    const auto r = dense_linbp_solve(Q.Q, Mat(4, 4), Mat(2, 2));
    REQUIRE_FALSE(r.singular);
    CHECK(max_abs_diff(r.P, Q.Q) == 0.0);
  }
  SUBCASE("the 2-node instance solves to rows [1.5, -1.5]") {
    Mat Q(2, 2);
    Q(0, 0) = Q(1, 0) = 0.3;
    Q(0, 1) = Q(1, 1) = -0.3;
    Mat W(2, 2);
    W(0, 1) = W(1, 0) = 1.0;
    const auto r = dense_linbp_solve(Q, W, mat2(0.4, -0.4, -0.4, 0.4));
    REQUIRE_FALSE(r.singular);
    for (int v = 0; v < 2; ++v) {
      CHECK(r.P(v, 0) == doctest::Approx(1.5).epsilon(1e-12));
      CHECK(r.P(v, 1) == doctest::Approx(-1.5).epsilon(1e-12));
    }
  }
  SUBCASE("singular system is reported") {
    // W = adjacency of K2, H = identity: I - kron(W, H) has eigenvalue 0
    Mat W(2, 2);
    W(0, 1) = W(1, 0) = 1.0;
    const auto r = dense_linbp_solve(Mat(2, 2), W, mat2(1, 0, 0, 1));
    CHECK(r.singular);
  }
}

TEST_CASE("fd_gradient") {
  SUBCASE("quadratic") {
    auto f = [](std::span<const double> x) { return x[0] * x[0]; };
    const auto g = fd_gradient(f, std::vector<double>{3.0}, 1e-5);
    CHECK(g[0] == doctest::Approx(6.0).epsilon(1e-9));
  }
  SUBCASE("constant") {
    auto f = [](std::span<const double>) { return 42.0; };
    const auto g = fd_gradient(f, std::vector<double>{1.0, 2.0}, 1e-5);
    CHECK(g[0] == 0.0);
    CHECK(g[1] == 0.0);
  }
  SUBCASE("non-finite evaluation names the coordinate") {
    auto f = [](std::span<const double> x) {
      return x[1] > 1.0 ? std::numeric_limits<double>::infinity() : 0.0;
    };
    try {
      fd_gradient(f, std::vector<double>{0.0, 1.0}, 1e-5);
      FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
      CHECK(std::string(e.what()).find("coordinate 1") != std::string::npos);
    }
  }
}
