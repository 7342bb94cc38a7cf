#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "evmc/oracles.hpp"
#include "evmc/rng.hpp"
#include "helpers.hpp"

using namespace evmc;

TEST_SUITE("oracles") {

TEST_CASE("free fermion limits: classical ferromagnet and independent spins") {
  oracle::FreeFermionSolution zero_field(std::vector<double>(8, 0.0), 1.0);
  CHECK(zero_field.ground_energy() == doctest::Approx(-4.0).epsilon(1e-12));

  std::vector<double> fields{0.3, 1.2, 0.7, 0.9, 0.1, 0.5};
  oracle::FreeFermionSolution no_bond(fields, 0.0);
  double expect = 0.0;
  for (double h : fields) expect -= 0.5 * h;
  CHECK(no_bond.ground_energy() == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("free fermion matches dense diagonalization on random fields") {
  for (uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL}) {
    const int n = 8;
    auto rng = make_engine(seed, 99);
    std::uniform_real_distribution<double> u(0.05, 1.5);
    std::vector<double> fields(n);
    for (auto& f : fields) f = u(rng);

    auto fam = make_family("random_tfi_chain", n);
    CouplingVector g{fields, fam.coupling_labels()};
    auto dense = testing_oracle::dense_hamiltonian(fam, g);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);

    oracle::FreeFermionSolution ff(fields, fam.exchange());
    CHECK(std::abs(ff.ground_energy() - es.eigenvalues()(0)) < 1e-10);
  }
}

TEST_CASE("wick determinant correlators match dense expectations") {
  const int n = 8;
  auto rng = make_engine(17, 5);
  std::uniform_real_distribution<double> u(0.1, 1.2);
  std::vector<double> fields(n);
  for (auto& f : fields) f = u(rng);

  auto fam = make_family("random_tfi_chain", n);
  CouplingVector g{fields, fam.coupling_labels()};
  auto ed = oracle::exact_diagonalize(fam, g);
  oracle::FreeFermionSolution ff(fields, fam.exchange());

  for (int r = 1; r < n; ++r) {
    std::vector<double> vals(ed.basis.size());
    for (std::size_t idx = 0; idx < ed.basis.size(); ++idx) {
      uint64_t bits = ed.basis[idx];
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        double si = (bits >> i) & 1ULL ? 0.5 : -0.5;
        double sj = (bits >> ((i + r) % n)) & 1ULL ? 0.5 : -0.5;
        acc += si * sj;
      }
      vals[idx] = acc / n;
    }
    double dense_val = oracle::diagonal_expectation(ed, vals);
    CHECK(std::abs(dense_val - ff.correlation(r)) < 1e-9);
  }
  CHECK(ff.correlation(0) == doctest::Approx(0.25));
}

TEST_CASE("uniform chain criticality sits at h/J = 1") {
  // the gap closes towards h=J and reopens beyond it
  auto gap = [](double h) {
    oracle::FreeFermionSolution ff(std::vector<double>(64, h), 1.0);
    return ff.spectrum().minCoeff();
  };
  CHECK(gap(1.0) < 0.06);
  CHECK(gap(0.6) > 0.2);
  CHECK(gap(1.4) > 0.2);
}

TEST_CASE("h0 -> 0 limit of the disorder-averaged magnetization is 1/4") {
  std::vector<double> tiny(16, 1e-8);
  oracle::FreeFermionSolution ff(tiny, 1.0 / std::exp(1.0));
  CHECK(ff.squared_magnetization() == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("exact diagonalization: dense vs lanczos and residual contract") {
  auto fam = make_family("tfi_chain", 10);
  CouplingVector g{{0.8}, {"h/J"}};
  auto dense = oracle::exact_diagonalize(fam, g, 1, 7, 1 << 12);
  auto sparse = oracle::exact_diagonalize(fam, g, 1, 11, 8);
  CHECK(std::abs(dense.energy - sparse.energy) < 1e-10);
  CHECK(sparse.residual <= 1e-10);
  CHECK(std::abs(sparse.ground_state.norm() - 1.0) < 1e-12);
}

TEST_CASE("heisenberg plaquette ring energy") {
  auto fam = make_family("j1j2_square", 2);
  CouplingVector g{{0.0}, {"J2/J1"}};
  auto sol = oracle::exact_diagonalize(fam, g);
  CHECK(sol.energy == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("cross-oracle agreement at the critical point, N=16") {
  auto fam = make_family("tfi_chain", 16);
  CouplingVector g{{1.0}, {"h/J"}};
  auto ed = oracle::exact_diagonalize(fam, g);
  oracle::FreeFermionSolution ff(std::vector<double>(16, 1.0), 1.0);
  CHECK(std::abs(ed.energy - ff.ground_energy()) < 1e-9);
}

TEST_CASE("dimension overflow is rejected") {
  CHECK_THROWS_AS(
      oracle::exact_diagonalize(make_family("tfi_chain", 24),
                                CouplingVector{{1.0}, {"h/J"}}),
      ConfigError);
}

TEST_CASE("exact fidelity susceptibility") {
  auto fam = make_family("tfi_chain", 8);
  CouplingVector g{{0.9}, {"h/J"}};
  SUBCASE("richardson: halving eps moves chi by < 1%") {
    double c1 = oracle::exact_fidelity_susceptibility(fam, g, 1e-3)(0, 0);
    double c2 = oracle::exact_fidelity_susceptibility(fam, g, 5e-4)(0, 0);
    CHECK(std::abs(c1 - c2) / c2 < 0.01);
  }
  SUBCASE("nonnegative and peaked near the critical coupling") {
    double best_h = 0, best_chi = -1;
    for (double h = 0.5; h <= 1.51; h += 0.1) {
      CouplingVector gh{{h}, {"h/J"}};
      double c = oracle::exact_fidelity_susceptibility(fam, gh, 1e-3)(0, 0);
      CHECK(c >= 0.0);
      if (c > best_chi) {
        best_chi = c;
        best_h = h;
      }
    }
    CHECK(best_h > 0.85);
    CHECK(best_h < 1.35);
  }
}

}  // TEST_SUITE
