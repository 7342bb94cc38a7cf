#include <doctest.h>

#include <algorithm>
#include <random>

#include "evmc/observables.hpp"
#include "evmc/oracles.hpp"
#include "evmc/rng.hpp"
#include "evmc/stats.hpp"

using namespace evmc;
using observables::Estimate;

namespace {

SystemBatch batch_from(std::vector<SpinConfiguration> samples, int chains = 4) {
  SystemBatch b;
  b.samples = std::move(samples);
  b.log_psi.assign(b.samples.size(), Complex(0, 0));
  for (int c = 0; c < chains; ++c)
    b.chain_starts.push_back(c * b.samples.size() / chains);
  return b;
}

LogAmplitudeFn sector_table(const oracle::EDSolution& sol) {
  return [&sol](const SpinConfiguration& s, const CouplingVector&) {
    uint64_t bits = s.to_bits();
    auto it = std::lower_bound(sol.basis.begin(), sol.basis.end(), bits);
    double a = std::abs(sol.ground_state(static_cast<Eigen::Index>(it - sol.basis.begin())));
    return Complex(a > 1e-290 ? std::log(a) : -700.0, 0.0);
  };
}

}  // namespace

TEST_SUITE("observables") {

TEST_CASE("fully polarized samples give m2 = 1/4") {
  auto lattice = Lattice::chain(8);
  std::vector<SpinConfiguration> samples(32, SpinConfiguration::from_bits(0xFF, 8));
  auto est = observables::zz_long_range_m2(batch_from(std::move(samples)), lattice);
  CHECK(est.value == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(est.sigma == doctest::Approx(0.0));
}

TEST_CASE("uncorrelated random samples give m2 compatible with zero") {
  auto lattice = Lattice::chain(8);
  auto rng = make_engine(2, 0x0B);
  std::vector<SpinConfiguration> samples;
  for (int i = 0; i < 4000; ++i) samples.push_back(random_configuration(8, rng));
  auto est = observables::zz_long_range_m2(batch_from(std::move(samples), 8), lattice);
  CHECK(std::abs(est.value) < 3.0 * est.sigma + 1e-3);
}

TEST_CASE("odd chains are rejected") {
  auto lattice = Lattice::chain(6);
  std::vector<SpinConfiguration> samples(4, SpinConfiguration::from_bits(0, 6));
  CHECK_NOTHROW(observables::zz_long_range_m2(batch_from(samples), lattice));
  // need an even-length chain for the N/2 displacement; 7 sites cannot build
  CHECK_THROWS_AS(
      observables::zz_long_range_m2(batch_from({SpinConfiguration::from_bits(0, 7)}),
                                    Lattice::chain(7)),
      ConfigError);
}

TEST_CASE("classical neel state: structure factor matches the dense expectation") {
  auto fam = make_family("j1j2_square", 4);
  CouplingVector g{{0.0}, {"J2/J1"}};
  const auto& lattice = fam.lattice();
  SpinConfiguration neel;
  neel.values.resize(16);
  for (int s = 0; s < 16; ++s)
    neel.values[static_cast<std::size_t>(s)] =
        ((lattice.x_of(s) + lattice.y_of(s)) % 2 == 0) ? 1 : -1;

  // product-state evaluator: only the neel configuration has weight
  LogAmplitudeFn product = [&](const SpinConfiguration& s, const CouplingVector&) {
    return Complex(s.values == neel.values ? 0.0 : -200.0, 0.0);
  };
  SystemBatch batch = batch_from({neel}, 1);

  const double pi = 3.14159265358979323846;
  auto cpp = observables::structure_factor(batch, fam, g, product, pi, pi);
  // dense expectation on the explicit product state
  auto sol = oracle::exact_diagonalize(fam, g);
  Vector vec = Vector::Zero(static_cast<Eigen::Index>(sol.basis.size()));
  auto it = std::lower_bound(sol.basis.begin(), sol.basis.end(), neel.to_bits());
  vec(static_cast<Eigen::Index>(it - sol.basis.begin())) = 1.0;
  oracle::EDSolution product_sol = sol;
  product_sol.ground_state = vec;
  auto exact = observables::magnetic_order_ed(product_sol, lattice);
  CHECK(cpp.value / 16.0 == doctest::Approx(exact.m2_neel).epsilon(1e-10));
  // zz part alone gives 1/4; the transverse part of S.S adds the r=0 terms
  double zz_only = 0.0;
  for (int r = 0; r < 16; ++r) {
    double si = neel.values[0] * 0.5;
    double sj = neel.values[static_cast<std::size_t>(r)] * 0.5;
    zz_only += std::cos(pi * (lattice.x_of(r) + lattice.y_of(r))) * si * sj;
  }
  CHECK(zz_only / 16.0 == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("k off the reciprocal lattice is rejected") {
  auto fam = make_family("j1j2_square", 4);
  CouplingVector g{{0.0}, {"J2/J1"}};
  SystemBatch batch = batch_from({SpinConfiguration::from_bits(0x0F0F, 16)}, 1);
  LogAmplitudeFn flat = [](const SpinConfiguration&, const CouplingVector&) {
    return Complex(0, 0);
  };
  CHECK_THROWS_AS(observables::structure_factor(batch, fam, g, flat, 0.1, 0.0),
                  ConfigError);
}

TEST_CASE("total-spin sum rule at k = 0 on the singlet ground state") {
  auto fam = make_family("j1j2_square", 2);
  CouplingVector g{{0.2}, {"J2/J1"}};
  auto sol = oracle::exact_diagonalize(fam, g);
  // dense value of C(0,0) = <S_tot^2>/N, zero for the singlet
  double dense = 0.0;
  for (int r = 0; r < 4; ++r) {
    double acc = 0.0;
    for (int i = 0; i < 4; ++i)
      acc += observables::spin_correlation_ed(
          sol, i, fam.lattice().translate(i, fam.lattice().x_of(r), fam.lattice().y_of(r)));
    dense += acc / 4.0;
  }
  CHECK(dense == doctest::Approx(0.0).epsilon(1e-10));

  SamplerConfig cfg;
  cfg.total_samples = 4096;
  cfg.burnin_sweeps = 30;
  cfg.seed = 31;
  auto batches = run_chains(fam, {g}, cfg, sector_table(sol));
  auto est = observables::structure_factor(batches[0], fam, g, sector_table(sol), 0.0, 0.0);
  CHECK(std::abs(est.value - dense) < 3.0 * est.sigma + 1e-6);
}

TEST_CASE("sampled magnetic order matches the dense ground state (2x2)") {
  auto fam = make_family("j1j2_square", 2);
  CouplingVector g{{0.0}, {"J2/J1"}};
  auto sol = oracle::exact_diagonalize(fam, g);
  auto exact = observables::magnetic_order_ed(sol, fam.lattice());

  SamplerConfig cfg;
  cfg.total_samples = 8192;
  cfg.burnin_sweeps = 30;
  cfg.seed = 33;
  auto batches = run_chains(fam, {g}, cfg, sector_table(sol));
  auto ops = observables::magnetic_order(batches[0], fam, g, sector_table(sol));
  CHECK(std::abs(ops.m2_neel.value - exact.m2_neel) < 3 * ops.m2_neel.sigma + 1e-4);
  CHECK(std::abs(ops.m2_stripe.value - exact.m2_stripe) <
        3 * ops.m2_stripe.sigma + 1e-4);
}

TEST_CASE("dimer order vanishes on uniform product samples") {
  auto lattice = Lattice::square(4);
  std::vector<SpinConfiguration> samples(16, SpinConfiguration::from_bits(0xFFFF, 16));
  auto est = observables::dimer_order_d2(batch_from(std::move(samples)), lattice);
  CHECK(est.value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("dimer estimator carries the factor 9 by construction") {
  auto lattice = Lattice::square(2);
  auto rng = make_engine(3, 0x0B);
  std::vector<SpinConfiguration> samples;
  for (int i = 0; i < 200; ++i) samples.push_back(random_configuration(4, rng));
  SystemBatch batch = batch_from(samples, 1);
  auto est = observables::dimer_order_d2(batch, lattice);

  // hand-rolled z-only connected dimer structure factor without the factor
  const int n = 4;
  const double pi = 3.14159265358979323846;
  double dsum = 0.0;
  for (int a = 0; a < 2; ++a) {
    std::vector<double> site_mean(n, 0.0);
    std::vector<double> pair_mean(n, 0.0);
    for (const auto& s : samples) {
      std::vector<double> b(n);
      for (int i = 0; i < n; ++i) {
        int j = (a == 0) ? lattice.translate(i, 1, 0) : lattice.translate(i, 0, 1);
        b[static_cast<std::size_t>(i)] =
            0.25 * s.values[static_cast<std::size_t>(i)] * s.values[static_cast<std::size_t>(j)];
      }
      for (int i = 0; i < n; ++i) site_mean[static_cast<std::size_t>(i)] += b[static_cast<std::size_t>(i)];
      for (int r = 0; r < n; ++r) {
        double acc = 0;
        for (int i = 0; i < n; ++i)
          acc += b[static_cast<std::size_t>(i)] *
                 b[static_cast<std::size_t>(lattice.translate(i, lattice.x_of(r), lattice.y_of(r)))];
        pair_mean[static_cast<std::size_t>(r)] += acc / n;
      }
    }
    for (auto& v : site_mean) v /= static_cast<double>(samples.size());
    for (auto& v : pair_mean) v /= static_cast<double>(samples.size());
    for (int r = 0; r < n; ++r) {
      double v = 0;
      for (int i = 0; i < n; ++i)
        v += site_mean[static_cast<std::size_t>(i)] *
             site_mean[static_cast<std::size_t>(lattice.translate(i, lattice.x_of(r), lattice.y_of(r)))];
      v /= n;
      double conn = pair_mean[static_cast<std::size_t>(r)] - v;
      double phase = (a == 0) ? pi * lattice.x_of(r) : pi * lattice.y_of(r);
      dsum += std::cos(phase) * conn;
    }
  }
  double without_factor = dsum / (2.0 * n);
  CHECK(est.value == doctest::Approx(9.0 * without_factor).epsilon(1e-10));
}

TEST_CASE("v-score vanishes on an exact eigenstate and is undefined at <H>=0") {
  auto fam = make_family("tfi_chain", 4);
  CouplingVector g{{1.0}, {"h/J"}};
  auto sol = oracle::exact_diagonalize(fam, g);
  LogAmplitudeFn table = [&](const SpinConfiguration& s, const CouplingVector&) {
    double a = std::abs(sol.ground_state(static_cast<Eigen::Index>(s.to_bits())));
    return Complex(a > 1e-290 ? std::log(a) : -700.0, 0.0);
  };
  SamplerConfig cfg;
  cfg.total_samples = 2048;
  cfg.burnin_sweeps = 20;
  cfg.seed = 35;
  auto batches = run_chains(fam, {g}, cfg, table);
  auto est = observables::v_score(batches[0], fam, g, table);
  CHECK(std::abs(est.value) < 1e-10);

  SystemBatch empty_h = batch_from({SpinConfiguration::from_bits(0b0110, 4)}, 1);
  LogAmplitudeFn flat = [](const SpinConfiguration&, const CouplingVector&) {
    return Complex(0, 0);
  };
  // alternating-ish single sample at h=0 has zero diagonal: <H> = 0
  CouplingVector g0{{0.0}, {"h/J"}};
  CHECK_THROWS_AS(observables::v_score(empty_h, fam, g0, flat), NumericsError);
}

TEST_CASE("v-score of a random state matches the dense matrix computation") {
  auto fam = make_family("tfi_chain", 4);
  CouplingVector g{{0.7}, {"h/J"}};
  auto rng = make_engine(4, 0x0B);
  std::normal_distribution<double> n(0.0, 1.0);
  Vector psi(16);
  for (int i = 0; i < 16; ++i) psi(i) = std::exp(0.4 * n(rng));
  psi.normalize();

  // dense <H>, <H^2>
  auto ed = oracle::exact_diagonalize(fam, g, 1, 7, 1 << 10);
  (void)ed;
  Matrix h = Matrix::Zero(16, 16);
  for (uint64_t bits = 0; bits < 16; ++bits) {
    auto conn = fam.connected_configurations(g, SpinConfiguration::from_bits(bits, 4));
    h(static_cast<Eigen::Index>(bits), static_cast<Eigen::Index>(bits)) = conn.diagonal;
    for (const auto& [sp, elem] : conn.offdiag)
      h(static_cast<Eigen::Index>(sp.to_bits()), static_cast<Eigen::Index>(bits)) += elem;
  }
  double eh = psi.dot(h * psi);
  double eh2 = (h * psi).squaredNorm();
  double dense_v = 4.0 * (eh2 - eh * eh) / (eh * eh);

  LogAmplitudeFn table = [&](const SpinConfiguration& s, const CouplingVector&) {
    return Complex(std::log(std::abs(psi(static_cast<Eigen::Index>(s.to_bits())))), 0.0);
  };
  SamplerConfig cfg;
  cfg.total_samples = 100000;
  cfg.burnin_sweeps = 30;
  cfg.seed = 36;
  auto batches = run_chains(fam, {g}, cfg, table);
  auto est = observables::v_score(batches[0], fam, g, table);
  CHECK(std::abs(est.value - dense_v) < 3 * est.sigma + 1e-3);
}

TEST_CASE("estimators are invariant under sample relabeling") {
  auto lattice = Lattice::chain(8);
  auto rng = make_engine(5, 0x0B);
  std::vector<SpinConfiguration> samples;
  for (int i = 0; i < 512; ++i) samples.push_back(random_configuration(8, rng));
  auto est1 = observables::zz_long_range_m2(batch_from(samples, 1), lattice);
  std::shuffle(samples.begin(), samples.end(), rng);
  auto est2 = observables::zz_long_range_m2(batch_from(samples, 1), lattice);
  CHECK(est1.value == doctest::Approx(est2.value).epsilon(1e-13));
}

TEST_CASE("disorder average over a flat wavefunction") {
  auto fam = make_family("random_tfi_chain", 6);
  std::vector<CouplingVector> reals;
  auto rng = make_engine(6, 0x0B);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 4; ++k) {
    std::vector<double> fields(6);
    for (auto& f : fields) f = u(rng);
    reals.push_back({fields, fam.coupling_labels()});
  }
  SamplerConfig cfg;
  cfg.total_samples = 4096;
  cfg.burnin_sweeps = 10;
  cfg.seed = 37;
  LogAmplitudeFn flat = [](const SpinConfiguration&, const CouplingVector&) {
    return Complex(0, 0);
  };
  auto rep = observables::disorder_averaged_correlation(fam, reals, cfg, flat);
  REQUIRE(rep.c_av.size() == 6);
  CHECK(rep.c_av[0] == doctest::Approx(0.25));
  for (int r = 1; r < 6; ++r)
    CHECK(std::abs(rep.c_av[static_cast<std::size_t>(r)]) <
          3 * rep.c_av_sigma[static_cast<std::size_t>(r)] + 5e-3);
  CHECK(rep.m2_per_realization.size() == 4);
}

}  // TEST_SUITE
