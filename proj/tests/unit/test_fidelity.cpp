#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

#include "evmc/fidelity.hpp"
#include "evmc/rng.hpp"

using namespace evmc;

TEST_SUITE("fidelity") {

TEST_CASE("chi matrix equals the centered covariance of the rows") {
  auto rng = make_engine(1, 0xF1);
  std::normal_distribution<double> n(0.0, 1.0);
  const int m = 64, nc = 2;
  Matrix re(m, nc), im(m, nc);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < nc; ++j) {
      re(i, j) = n(rng);
      im(i, j) = 0.2 * n(rng);
    }
  std::vector<std::size_t> starts{0, 32};
  auto est = fidelity::chi_matrix(re, im, starts);

  Matrix ref = Matrix::Zero(nc, nc);
  for (int a = 0; a < nc; ++a)
    for (int b = 0; b < nc; ++b) {
      Complex acc(0, 0);
      Complex ma(re.col(a).mean(), im.col(a).mean());
      Complex mb(re.col(b).mean(), im.col(b).mean());
      for (int i = 0; i < m; ++i)
        acc += std::conj(Complex(re(i, a), im(i, a)) - ma) *
               (Complex(re(i, b), im(i, b)) - mb);
      ref(a, b) = (acc / static_cast<double>(m)).real();
    }
  CHECK((est.chi - ref).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((est.chi - est.chi.transpose()).cwiseAbs().maxCoeff() == 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(est.chi);
  CHECK(es.eigenvalues().minCoeff() >= -1e-12);
}

TEST_CASE("coupling-axis rescaling scales chi rows and columns by 1/c") {
  auto rng = make_engine(2, 0xF1);
  std::normal_distribution<double> n(0.0, 1.0);
  const int m = 50;
  Matrix re(m, 2), im(m, 2);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < 2; ++j) {
      re(i, j) = n(rng);
      im(i, j) = n(rng);
    }
  std::vector<std::size_t> starts{0};
  auto base = fidelity::chi_matrix(re, im, starts);
  const double c = 2.5;
  Matrix re2 = re, im2 = im;
  re2.col(0) /= c;  // gamma_0' = c * gamma_0 means O_0' = O_0 / c
  im2.col(0) /= c;
  auto scaled = fidelity::chi_matrix(re2, im2, starts);
  CHECK(scaled.chi(0, 0) == doctest::Approx(base.chi(0, 0) / (c * c)).epsilon(1e-12));
  CHECK(scaled.chi(0, 1) == doctest::Approx(base.chi(0, 1) / c).epsilon(1e-12));
  CHECK(scaled.chi(1, 1) == doctest::Approx(base.chi(1, 1)).epsilon(1e-12));
}

TEST_CASE("scalar chi: ridge location is invariant under axis rescaling") {
  // synthetic lambda(h) curve: the argmax index survives h -> c h because
  // chi just rescales by 1/c^2 uniformly
  std::vector<double> lam;
  for (int i = 0; i < 21; ++i) {
    double h = 0.5 + 0.05 * i;
    lam.push_back(std::exp(-40.0 * (h - 1.0) * (h - 1.0)));
  }
  auto argmax = std::max_element(lam.begin(), lam.end()) - lam.begin();
  std::vector<double> scaled;
  for (double v : lam) scaled.push_back(v / 6.25);
  auto argmax2 = std::max_element(scaled.begin(), scaled.end()) - scaled.begin();
  CHECK(argmax == argmax2);
}

TEST_CASE("leading direction basics") {
  SUBCASE("diagonal matrix") {
    Matrix chi(2, 2);
    chi << 2, 0, 0, 1;
    auto lead = fidelity::leading_direction(chi);
    CHECK(lead.eigenvalue == doctest::Approx(2.0));
    CHECK(lead.eigenvector(0) == doctest::Approx(1.0));
    CHECK(lead.eigenvector(1) == doctest::Approx(0.0));
    CHECK_FALSE(lead.degenerate);
  }
  SUBCASE("isotropic matrix is flagged degenerate") {
    Matrix chi = 0.7 * Matrix::Identity(2, 2);
    auto lead = fidelity::leading_direction(chi);
    CHECK(lead.eigenvalue == doctest::Approx(0.7));
    CHECK(lead.degenerate);
  }
  SUBCASE("random symmetric 2x2 against the closed form") {
    auto rng = make_engine(3, 0xF1);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      double a = n(rng), b = n(rng), c = n(rng);
      Matrix chi(2, 2);
      chi << a, c, c, b;
      auto lead = fidelity::leading_direction(chi);
      double tr = a + b, det = a * b - c * c;
      double lmax = 0.5 * (tr + std::sqrt(tr * tr - 4 * det));
      CHECK(lead.eigenvalue == doctest::Approx(lmax).epsilon(1e-12));
      // eigenvector from (chi - lmax I) v = 0
      Vector v = lead.eigenvector;
      CHECK((chi * v - lmax * v).norm() < 1e-10);
      CHECK(v.norm() == doctest::Approx(1.0));
      // sign convention: first nonzero component positive
      CHECK(v(std::abs(v(0)) > 1e-12 ? 0 : 1) > 0.0);
    }
  }
  SUBCASE("non-finite entries are rejected") {
    Matrix chi = Matrix::Constant(2, 2, std::nan(""));
    CHECK_THROWS_AS(fidelity::leading_direction(chi), NumericsError);
  }
}

namespace {
fidelity::SizedCurve synthetic_curve(double size, double hc, double nu) {
  fidelity::SizedCurve c;
  c.size = size;
  for (int i = 0; i <= 40; ++i) {
    double h = 0.7 + 0.015 * i;
    double x = (h - hc) * std::pow(size, 1.0 / nu);
    c.coupling.push_back(h);
    c.chi.push_back(std::pow(size, 2.0 / nu) * std::exp(-0.5 * x * x));
  }
  return c;
}
}  // namespace

TEST_CASE("collapse fit recovers the synthetic scaling form") {
  std::vector<fidelity::SizedCurve> curves{synthetic_curve(8, 1.0, 1.0),
                                           synthetic_curve(12, 1.0, 1.0),
                                           synthetic_curve(16, 1.0, 1.0)};
  std::vector<double> hc_grid, nu_grid;
  for (int i = 0; i <= 20; ++i) hc_grid.push_back(0.9 + 0.01 * i);
  for (int i = 0; i <= 16; ++i) nu_grid.push_back(0.6 + 0.05 * i);
  auto fit = fidelity::collapse_fit(curves, hc_grid, nu_grid, 0.25);
  CHECK(fit.critical == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fit.exponent == doctest::Approx(1.0).epsilon(1e-9));

  SUBCASE("permuting the curve order leaves the fit unchanged") {
    std::vector<fidelity::SizedCurve> shuffled{curves[2], curves[0], curves[1]};
    auto fit2 = fidelity::collapse_fit(shuffled, hc_grid, nu_grid, 0.25);
    CHECK(fit2.critical == fit.critical);
    CHECK(fit2.exponent == fit.exponent);
    CHECK(fit2.quality == doctest::Approx(fit.quality).epsilon(1e-12));
  }
}

TEST_CASE("collapse fit rejects degenerate inputs") {
  fidelity::SizedCurve flat;
  flat.size = 8;
  for (int i = 0; i < 10; ++i) {
    flat.coupling.push_back(0.8 + 0.05 * i);
    flat.chi.push_back(1.0);
  }
  std::vector<fidelity::SizedCurve> curves{flat, synthetic_curve(12, 1.0, 1.0)};
  std::vector<double> grid{1.0};
  CHECK_THROWS_AS(fidelity::collapse_fit(curves, grid, grid, 0.3), ConfigError);
  std::vector<fidelity::SizedCurve> single{synthetic_curve(8, 1.0, 1.0)};
  CHECK_THROWS_AS(fidelity::collapse_fit(single, grid, grid, 0.3), ConfigError);
}

}  // TEST_SUITE
