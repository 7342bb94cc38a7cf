#include "evmc/observables.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "evmc/rng.hpp"
#include "evmc/stats.hpp"

namespace evmc::observables {

namespace {

constexpr double kPi = 3.14159265358979323846;

Estimate blocked(const std::vector<double>& values,
                 const std::vector<std::size_t>& chain_starts) {
  MeanError me = blocked_mean(values, chain_starts);
  return {me.mean, me.sigma};
}

/// Jackknife over chain blocks: `reduce(excluded)` evaluates the estimator
/// with one chain left out (or all chains for excluded = -1).
Estimate jackknife(int n_blocks, const std::function<double(int)>& reduce) {
  double full = reduce(-1);
  if (n_blocks < 2) return {full, 0.0};
  std::vector<double> loo;
  loo.reserve(static_cast<std::size_t>(n_blocks));
  for (int b = 0; b < n_blocks; ++b) loo.push_back(reduce(b));
  double m = compensated_mean(loo);
  double ss = 0.0;
  for (double v : loo) ss += (v - m) * (v - m);
  double nb = static_cast<double>(n_blocks);
  return {full, std::sqrt((nb - 1.0) / nb * ss)};
}

int reciprocal_index(double k, int l, const char* what) {
  double idx = k * l / (2.0 * kPi);
  double rounded = std::round(idx);
  if (std::abs(idx - rounded) > 1e-9)
    throw ConfigError(std::string(what) + ": k is not on the reciprocal lattice");
  return ((static_cast<int>(rounded) % l) + l) % l;
}

}  // namespace

Estimate zz_long_range_m2(const SystemBatch& batch, const Lattice& lattice) {
  check(lattice.kind() == LatticeKind::Chain, "zz_long_range_m2: chain lattice required");
  const int n = lattice.size();
  check(n % 2 == 0, "zz_long_range_m2: even chain length required");
  check(!batch.samples.empty(), "zz_long_range_m2: empty batch");
  std::vector<double> vals;
  vals.reserve(batch.samples.size());
  for (const auto& s : batch.samples) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      acc += 0.25 * s.values[static_cast<std::size_t>(i)] *
             s.values[static_cast<std::size_t>((i + n / 2) % n)];
    vals.push_back(acc / n);
  }
  return blocked(vals, batch.chain_starts);
}

namespace {

/// Per-sample isotropic correlator t(r) = (1/N) sum_i <sigma| S_i . S_{i+r}
/// |psi>/<sigma|psi> for every displacement r, using pair-swap ratios for the
/// transverse part.
std::vector<double> isotropic_displacement_row(const SpinConfiguration& sigma,
                                               Complex log_ref, const Lattice& lattice,
                                               const CouplingVector& gamma,
                                               const LogAmplitudeFn& log_amplitude) {
  const int n = lattice.size();
  std::vector<double> t(static_cast<std::size_t>(n), 0.0);
  SpinConfiguration work = sigma;
  for (int r = 0; r < n; ++r) {
    if (r == 0) {
      t[0] = 0.75;  // S.S on the same site
      continue;
    }
    int dx = lattice.x_of(r), dy = lattice.y_of(r);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      int j = lattice.translate(i, dx, dy);
      double si = sigma.values[static_cast<std::size_t>(i)];
      double sj = sigma.values[static_cast<std::size_t>(j)];
      acc += 0.25 * si * sj;
      if (si != sj && i != j) {
        std::swap(work.values[static_cast<std::size_t>(i)],
                  work.values[static_cast<std::size_t>(j)]);
        Complex ratio = std::exp(log_amplitude(work, gamma) - log_ref);
        std::swap(work.values[static_cast<std::size_t>(i)],
                  work.values[static_cast<std::size_t>(j)]);
        acc += 0.5 * ratio.real();
      }
    }
    t[static_cast<std::size_t>(r)] = acc / n;
  }
  return t;
}

}  // namespace

Estimate structure_factor(const SystemBatch& batch, const HamiltonianFamily& family,
                          const CouplingVector& gamma,
                          const LogAmplitudeFn& log_amplitude, double kx, double ky) {
  const Lattice& lattice = family.lattice();
  check(lattice.kind() == LatticeKind::Square, "structure_factor: square lattice required");
  check(!batch.samples.empty(), "structure_factor: empty batch");
  const int l = lattice.extent();
  const int n = lattice.size();
  const int ix = reciprocal_index(kx, l, "structure_factor");
  const int iy = reciprocal_index(ky, l, "structure_factor");

  std::vector<double> vals;
  vals.reserve(batch.samples.size());
  for (std::size_t s = 0; s < batch.samples.size(); ++s) {
    auto t = isotropic_displacement_row(batch.samples[s], batch.log_psi[s], lattice,
                                        gamma, log_amplitude);
    double ck = 0.0;
    for (int r = 0; r < n; ++r) {
      double phase = 2.0 * kPi *
                     (static_cast<double>(ix * lattice.x_of(r)) +
                      static_cast<double>(iy * lattice.y_of(r))) /
                     static_cast<double>(l);
      ck += std::cos(phase) * t[static_cast<std::size_t>(r)];
    }
    vals.push_back(ck);
  }
  return blocked(vals, batch.chain_starts);
}

OrderParameters magnetic_order(const SystemBatch& batch,
                               const HamiltonianFamily& family,
                               const CouplingVector& gamma,
                               const LogAmplitudeFn& log_amplitude) {
  const Lattice& lattice = family.lattice();
  check(lattice.kind() == LatticeKind::Square, "magnetic_order: square lattice required");
  const int l = lattice.extent();
  const int n = lattice.size();
  std::vector<double> neel, stripe;
  neel.reserve(batch.samples.size());
  stripe.reserve(batch.samples.size());
  for (std::size_t s = 0; s < batch.samples.size(); ++s) {
    auto t = isotropic_displacement_row(batch.samples[s], batch.log_psi[s], lattice,
                                        gamma, log_amplitude);
    double cpp = 0.0, cp0 = 0.0, c0p = 0.0;
    for (int r = 0; r < n; ++r) {
      int rx = lattice.x_of(r), ry = lattice.y_of(r);
      double tr = t[static_cast<std::size_t>(r)];
      cpp += std::cos(kPi * (rx + ry)) * tr;  // valid for even L
      cp0 += std::cos(kPi * rx) * tr;
      c0p += std::cos(kPi * ry) * tr;
    }
    (void)l;
    neel.push_back(cpp / n);
    stripe.push_back((cp0 + c0p) / (2.0 * n));
  }
  OrderParameters out;
  out.m2_neel = blocked(neel, batch.chain_starts);
  out.m2_stripe = blocked(stripe, batch.chain_starts);
  return out;
}

namespace {

struct DimerAccumulator {
  // per-sample bond products and per-site bond means, both orientations
  std::vector<std::vector<double>> site_means;  // [alpha][site]
  std::vector<std::vector<double>> pair_means;  // [alpha][r]
  int count = 0;
};

}  // namespace

Estimate dimer_order_d2(const SystemBatch& batch, const Lattice& lattice) {
  check(lattice.kind() == LatticeKind::Square, "dimer_order_d2: square lattice required");
  check(!batch.samples.empty(), "dimer_order_d2: empty batch");
  const int n = lattice.size();
  const int nb = static_cast<int>(batch.chain_starts.size());

  // bond variables b_alpha(i) = Sz_i Sz_{i+alpha} per sample, accumulated per
  // chain block so the estimator can be jackknifed
  std::vector<DimerAccumulator> blocks(static_cast<std::size_t>(std::max(nb, 1)));
  for (auto& blk : blocks) {
    blk.site_means.assign(2, std::vector<double>(static_cast<std::size_t>(n), 0.0));
    blk.pair_means.assign(2, std::vector<double>(static_cast<std::size_t>(n), 0.0));
  }
  auto block_of = [&](std::size_t sample_idx) {
    int b = 0;
    for (int c = 0; c < nb; ++c)
      if (sample_idx >= batch.chain_starts[static_cast<std::size_t>(c)]) b = c;
    return static_cast<std::size_t>(b);
  };

  std::vector<double> bx(static_cast<std::size_t>(n)), by(static_cast<std::size_t>(n));
  for (std::size_t s = 0; s < batch.samples.size(); ++s) {
    const auto& sv = batch.samples[s].values;
    for (int i = 0; i < n; ++i) {
      bx[static_cast<std::size_t>(i)] =
          0.25 * sv[static_cast<std::size_t>(i)] *
          sv[static_cast<std::size_t>(lattice.translate(i, 1, 0))];
      by[static_cast<std::size_t>(i)] =
          0.25 * sv[static_cast<std::size_t>(i)] *
          sv[static_cast<std::size_t>(lattice.translate(i, 0, 1))];
    }
    DimerAccumulator& blk = blocks[block_of(s)];
    blk.count += 1;
    for (int a = 0; a < 2; ++a) {
      const auto& b = (a == 0) ? bx : by;
      for (int i = 0; i < n; ++i) blk.site_means[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] += b[static_cast<std::size_t>(i)];
      for (int r = 0; r < n; ++r) {
        int dx = lattice.x_of(r), dy = lattice.y_of(r);
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
          acc += b[static_cast<std::size_t>(i)] *
                 b[static_cast<std::size_t>(lattice.translate(i, dx, dy))];
        blk.pair_means[static_cast<std::size_t>(a)][static_cast<std::size_t>(r)] += acc / n;
      }
    }
  }

  auto evaluate = [&](int excluded) {
    std::vector<std::vector<double>> site(2, std::vector<double>(static_cast<std::size_t>(n), 0.0));
    std::vector<std::vector<double>> pair(2, std::vector<double>(static_cast<std::size_t>(n), 0.0));
    int count = 0;
    for (int b = 0; b < static_cast<int>(blocks.size()); ++b) {
      if (b == excluded) continue;
      const auto& blk = blocks[static_cast<std::size_t>(b)];
      count += blk.count;
      for (int a = 0; a < 2; ++a)
        for (int i = 0; i < n; ++i) {
          site[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] +=
              blk.site_means[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)];
          pair[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] +=
              blk.pair_means[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)];
        }
    }
    double dsum = 0.0;
    for (int a = 0; a < 2; ++a) {
      // D_alpha(k) at k = (pi, 0) for x bonds, (0, pi) for y bonds
      for (int r = 0; r < n; ++r) {
        int rx = lattice.x_of(r), ry = lattice.y_of(r);
        double u = pair[static_cast<std::size_t>(a)][static_cast<std::size_t>(r)] / count;
        double v = 0.0;
        int dx = rx, dy = ry;
        for (int i = 0; i < n; ++i)
          v += (site[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] / count) *
               (site[static_cast<std::size_t>(a)][static_cast<std::size_t>(
                    lattice.translate(i, dx, dy))] /
                count);
        v /= n;
        double d_conn = 9.0 * (u - v);
        double phase = (a == 0) ? kPi * rx : kPi * ry;
        dsum += std::cos(phase) * d_conn;
      }
    }
    return dsum / (2.0 * n);
  };

  return jackknife(nb, evaluate);
}

namespace {
std::vector<Complex> batch_local_energies(const SystemBatch& batch,
                                          const HamiltonianFamily& family,
                                          const CouplingVector& gamma,
                                          const LogAmplitudeFn& log_amplitude) {
  std::vector<Complex> es;
  es.reserve(batch.samples.size());
  for (const auto& s : batch.samples)
    es.push_back(local_energy(family, gamma, s, [&](const SpinConfiguration& sp) {
      return log_amplitude(sp, gamma);
    }));
  return es;
}
}  // namespace

Estimate v_score(const SystemBatch& batch, const HamiltonianFamily& family,
                 const CouplingVector& gamma, const LogAmplitudeFn& log_amplitude) {
  check(!batch.samples.empty(), "v_score: empty batch");
  auto es = batch_local_energies(batch, family, gamma, log_amplitude);
  const int n = family.lattice().size();
  const int nb = static_cast<int>(batch.chain_starts.size());
  auto block_bounds = [&](int b) {
    std::size_t lo = batch.chain_starts[static_cast<std::size_t>(b)];
    std::size_t hi = (b + 1 < nb) ? batch.chain_starts[static_cast<std::size_t>(b) + 1]
                                  : es.size();
    return std::pair<std::size_t, std::size_t>(lo, hi);
  };
  auto evaluate = [&](int excluded) {
    KahanSum sre, sabs2;
    std::size_t count = 0;
    for (int b = 0; b < nb; ++b) {
      if (b == excluded) continue;
      auto [lo, hi] = block_bounds(b);
      for (std::size_t i = lo; i < hi; ++i) {
        sre.add(es[i].real());
        sabs2.add(std::norm(es[i]));
        ++count;
      }
    }
    double mean_re = sre.value() / static_cast<double>(count);
    double mean_abs2 = sabs2.value() / static_cast<double>(count);
    if (std::abs(mean_re) < 1e-12)
      throw NumericsError("v_score: <H> is zero, normalization undefined");
    double var = mean_abs2 - mean_re * mean_re;
    return static_cast<double>(n) * var / (mean_re * mean_re);
  };
  return jackknife(nb, evaluate);
}

Estimate energy(const SystemBatch& batch, const HamiltonianFamily& family,
                const CouplingVector& gamma, const LogAmplitudeFn& log_amplitude) {
  check(!batch.samples.empty(), "energy: empty batch");
  auto es = batch_local_energies(batch, family, gamma, log_amplitude);
  std::vector<double> re;
  re.reserve(es.size());
  for (const auto& e : es) re.push_back(e.real());
  return blocked(re, batch.chain_starts);
}

DisorderReport disorder_averaged_correlation(
    const HamiltonianFamily& family, const std::vector<CouplingVector>& realizations,
    const SamplerConfig& sampler, const LogAmplitudeFn& log_amplitude) {
  check(!realizations.empty(), "disorder average: empty realization set");
  const int n = family.lattice().size();
  DisorderReport report;
  Matrix c_per_real(static_cast<Eigen::Index>(realizations.size()), n);

  for (std::size_t k = 0; k < realizations.size(); ++k) {
    SamplerConfig one = sampler;
    one.seed = mix_seed(sampler.seed, 0xD15, k);
    auto batches = run_chains(family, {realizations[k]}, one, log_amplitude);
    const SystemBatch& batch = batches[0];
    Vector acc = Vector::Zero(n);
    for (const auto& s : batch.samples) {
      for (int r = 0; r < n; ++r) {
        double c = 0.0;
        for (int i = 0; i < n; ++i)
          c += 0.25 * s.values[static_cast<std::size_t>(i)] *
               s.values[static_cast<std::size_t>((i + r) % n)];
        acc(r) += c / n;
      }
    }
    c_per_real.row(static_cast<Eigen::Index>(k)) =
        acc.transpose() / static_cast<double>(batch.samples.size());
  }

  report.c_av.resize(static_cast<std::size_t>(n));
  report.c_av_sigma.resize(static_cast<std::size_t>(n));
  const double rn = static_cast<double>(realizations.size());
  for (int r = 0; r < n; ++r) {
    Vector col = c_per_real.col(r);
    double m = col.mean();
    double var = (col.array() - m).square().sum() / std::max(rn - 1.0, 1.0);
    report.c_av[static_cast<std::size_t>(r)] = m;
    report.c_av_sigma[static_cast<std::size_t>(r)] = std::sqrt(var / rn);
  }
  for (Eigen::Index k = 0; k < c_per_real.rows(); ++k) {
    // (1/N) sum_{r=1..N} C(r) with C(N) = C(0)
    double m2 = c_per_real.row(k).sum() / static_cast<double>(n);
    report.m2_per_realization.push_back(m2);
  }
  report.m2 = compensated_mean(report.m2_per_realization);
  double var = compensated_variance(report.m2_per_realization);
  report.m2_sigma = std::sqrt(var / rn);
  return report;
}

double spin_correlation_ed(const oracle::EDSolution& sol, int i, int j) {
  if (i == j) return 0.75;
  double acc = 0.0;
  const uint64_t mask = (1ULL << i) | (1ULL << j);
  for (std::size_t idx = 0; idx < sol.basis.size(); ++idx) {
    uint64_t bits = sol.basis[idx];
    double amp = sol.ground_state(static_cast<Eigen::Index>(idx));
    double si = (bits >> i) & 1ULL ? 1.0 : -1.0;
    double sj = (bits >> j) & 1ULL ? 1.0 : -1.0;
    acc += amp * amp * 0.25 * si * sj;
    if (si != sj) {
      uint64_t swapped = bits ^ mask;
      auto it = std::lower_bound(sol.basis.begin(), sol.basis.end(), swapped);
      auto sidx = static_cast<Eigen::Index>(it - sol.basis.begin());
      acc += 0.5 * amp * sol.ground_state(sidx);
    }
  }
  return acc;
}

ExactOrderParameters magnetic_order_ed(const oracle::EDSolution& sol,
                                       const Lattice& lattice) {
  const int n = lattice.size();
  const int l = lattice.extent();
  check(lattice.kind() == LatticeKind::Square, "magnetic_order_ed: square lattice");
  (void)l;
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    int dx = lattice.x_of(r), dy = lattice.y_of(r);
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      acc += spin_correlation_ed(sol, i, lattice.translate(i, dx, dy));
    t[static_cast<std::size_t>(r)] = acc / n;
  }
  ExactOrderParameters out;
  double cpp = 0, cp0 = 0, c0p = 0;
  for (int r = 0; r < n; ++r) {
    int rx = lattice.x_of(r), ry = lattice.y_of(r);
    cpp += std::cos(kPi * (rx + ry)) * t[static_cast<std::size_t>(r)];
    cp0 += std::cos(kPi * rx) * t[static_cast<std::size_t>(r)];
    c0p += std::cos(kPi * ry) * t[static_cast<std::size_t>(r)];
  }
  out.m2_neel = cpp / n;
  out.m2_stripe = (cp0 + c0p) / (2.0 * n);

  // z-only dimer correlations are diagonal: exact expectation from |psi|^2
  auto bond_expect = [&](int alpha, int i) {
    // <Sz_i Sz_{i+alpha}>
    std::vector<double> vals(sol.basis.size());
    int j = (alpha == 0) ? lattice.translate(i, 1, 0) : lattice.translate(i, 0, 1);
    for (std::size_t idx = 0; idx < sol.basis.size(); ++idx) {
      uint64_t bits = sol.basis[idx];
      double si = (bits >> i) & 1ULL ? 0.5 : -0.5;
      double sj = (bits >> j) & 1ULL ? 0.5 : -0.5;
      vals[idx] = si * sj;
    }
    return vals;
  };
  double dsum = 0.0;
  for (int a = 0; a < 2; ++a) {
    std::vector<double> bmean(static_cast<std::size_t>(n));
    std::vector<std::vector<double>> bvals;
    for (int i = 0; i < n; ++i) {
      bvals.push_back(bond_expect(a, i));
      bmean[static_cast<std::size_t>(i)] = oracle::diagonal_expectation(sol, bvals.back());
    }
    for (int r = 0; r < n; ++r) {
      int dx = lattice.x_of(r), dy = lattice.y_of(r);
      double u = 0.0, v = 0.0;
      for (int i = 0; i < n; ++i) {
        int j = lattice.translate(i, dx, dy);
        std::vector<double> prod(sol.basis.size());
        for (std::size_t idx = 0; idx < sol.basis.size(); ++idx)
          prod[idx] = bvals[static_cast<std::size_t>(i)][idx] *
                      bvals[static_cast<std::size_t>(j)][idx];
        u += oracle::diagonal_expectation(sol, prod);
        v += bmean[static_cast<std::size_t>(i)] * bmean[static_cast<std::size_t>(j)];
      }
      u /= n;
      v /= n;
      double phase = (a == 0) ? kPi * lattice.x_of(r) : kPi * lattice.y_of(r);
      dsum += std::cos(phase) * 9.0 * (u - v);
    }
  }
  out.d2 = dsum / (2.0 * n);
  return out;
}

}  // namespace evmc::observables
