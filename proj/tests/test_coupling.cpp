#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "pmrf/coupling.hpp"
#include "pmrf/errors.hpp"
#include "test_util.hpp"

using namespace pmrf;

TEST_CASE("init_coupling: stock homophily values") {
  SUBCASE("C=2") {
    const auto cm = init_coupling(2);
    CHECK(cm.H(0, 0) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(cm.H(0, 1) == doctest::Approx(-0.4).epsilon(1e-15));
    CHECK(cm.H(1, 0) == doctest::Approx(-0.4).epsilon(1e-15));
    CHECK(cm.H(1, 1) == doctest::Approx(0.4).epsilon(1e-15));
  }
  SUBCASE("C=3") {
    const auto cm = init_coupling(3);
    CHECK(cm.H(0, 0) == doctest::Approx(0.9 - 1.0 / 3).epsilon(1e-14));
    CHECK(cm.H(0, 1) == doctest::Approx(0.05 - 1.0 / 3).epsilon(1e-14));
  }
  SUBCASE("rows sum to zero") {
    for (int C = 2; C <= 6; ++C) {
      const auto cm = init_coupling(C);
      for (int i = 0; i < C; ++i) {
        double s = 0;
        for (int j = 0; j < C; ++j) s += cm.H(i, j);
        CHECK(std::abs(s) <= 1e-12);
      }
    }
  }
  SUBCASE("C < 2 rejected") { CHECK_THROWS_AS(init_coupling(1), InputError); }
}

TEST_CASE("spectral_radius: worked cases") {
  SUBCASE("default C=2 coupling has rho 0.8 (exercises the kernel-start fallback)") {
    const auto est = spectral_radius(init_coupling(2).H);
    CHECK(est.converged);
    CHECK(est.value == doctest::Approx(0.8).epsilon(1e-8));
  }
  SUBCASE("K2 with unit weight has rho 1") {
    const auto g = build_graph(std::vector<std::pair<int, int>>{{0, 1}}, 2);
    EdgeWeights w{{1.0}};
    const auto est = graph_spectral_radius(g, w);
    CHECK(est.converged);
    CHECK(est.value == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("zero matrix") {
    const auto est = spectral_radius(Mat(3, 3));
    CHECK(est.converged);
    CHECK(est.value == 0.0);
  }
}

TEST_CASE("spectral_radius agrees with a dense eigensolver") {
  for (std::uint64_t seed : {10ULL, 11ULL, 12ULL, 13ULL, 14ULL}) {
    SplitMix64 rng(seed);
    const int d = 2 + static_cast<int>(rng.below(49));
    const Mat M = testutil::random_symmetric(d, 0.0, 1.0, rng);
    const double want = testutil::dense_rho_sym(M);
    const auto est = spectral_radius(M, 1e-12, 20000);
    CHECK(testutil::close(est.value, want, 1e-6, 1e-9));
  }
}

TEST_CASE("check_convergence") {
  const auto g = build_graph(std::vector<std::pair<int, int>>{{0, 1}}, 2);
  EdgeWeights w{{1.0}};
  SUBCASE("single edge with the default C=2 coupling satisfies the condition") {
    const auto diag = check_convergence(g, w, init_coupling(2));
    CHECK(diag.satisfied);
    CHECK(diag.rho_H * diag.rho_W == doctest::Approx(0.8).epsilon(1e-7));
  }
  SUBCASE("doubling H breaks it") {
    auto cm = init_coupling(2);
    for (std::size_t i = 0; i < cm.H.size(); ++i) cm.H.data()[i] *= 2.0;
    const auto diag = check_convergence(g, w, cm);
    CHECK_FALSE(diag.satisfied);
    CHECK(diag.rho_H * diag.rho_W == doctest::Approx(1.6).epsilon(1e-7));
  }
  SUBCASE("edgeless graph always satisfies") {
    const auto g0 = build_graph(std::vector<std::pair<int, int>>{}, 4);
    EdgeWeights w0{{}};
    const auto diag = check_convergence(g0, w0, init_coupling(2));
    CHECK(diag.satisfied);
    CHECK(diag.rho_W == 0.0);
  }
}

TEST_CASE("export_coupling_csv round-trips at full precision") {
  SplitMix64 rng(42);
  CouplingMatrix cm{testutil::random_symmetric(3, 0.0, 1.0, rng), 3};
  const auto dir = std::filesystem::temp_directory_path() / "pmrf_coupling_test";
  std::filesystem::create_directories(dir);
  export_coupling_csv(cm, dir / "c.csv", dir / "u.csv");

  std::ifstream in(dir / "c.csv");
  Mat back(3, 3);
  std::string cell;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      std::getline(in, cell, j == 2 ? '\n' : ',');
      back(i, j) = std::stod(cell);
    }
  CHECK(back == cm.H);

  std::ifstream uin(dir / "u.csv");
  std::getline(uin, cell, ',');
  CHECK(std::stod(cell) == cm.H(0, 0) + 1.0 / 3);
  std::filesystem::remove_all(dir);
}
