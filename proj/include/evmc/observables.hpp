#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evmc/common.hpp"
#include "evmc/couplings.hpp"
#include "evmc/hamiltonian.hpp"
#include "evmc/oracles.hpp"
#include "evmc/sampler.hpp"

namespace evmc::observables {

struct Estimate {
  double value = 0.0;
  double sigma = 0.0;  // 1-sigma from blocking over chains
};

/// (1/N) sum_i <S^z_i S^z_{i+N/2}> on a chain with even N.
Estimate zz_long_range_m2(const SystemBatch& batch, const Lattice& lattice);

/// Isotropic spin structure factor C(k) = sum_r e^{ik.r} <S_0 . S_r> on the
/// square lattice, translation averaged. The xy part is estimated through
/// amplitude ratios of pair swaps, so an amplitude evaluator is required.
/// k must sit on the reciprocal lattice (multiples of 2 pi / L).
Estimate structure_factor(const SystemBatch& batch, const HamiltonianFamily& family,
                          const CouplingVector& gamma,
                          const LogAmplitudeFn& log_amplitude, double kx, double ky);

struct OrderParameters {
  Estimate m2_neel;    // C(pi, pi) / N
  Estimate m2_stripe;  // [C(0, pi) + C(pi, 0)] / (2N)
};
OrderParameters magnetic_order(const SystemBatch& batch,
                               const HamiltonianFamily& family,
                               const CouplingVector& gamma,
                               const LogAmplitudeFn& log_amplitude);

/// Valence-bond order from z-only dimer-dimer correlations (factor 9):
/// d^2 = [D_x(pi,0) + D_y(0,pi)] / (2N).
Estimate dimer_order_d2(const SystemBatch& batch, const Lattice& lattice);

/// V-score = N (<H^2> - <H>^2) / <H>^2 with <H^2> = E[|E_L|^2].
Estimate v_score(const SystemBatch& batch, const HamiltonianFamily& family,
                 const CouplingVector& gamma, const LogAmplitudeFn& log_amplitude);

/// Mean local energy with error bars.
Estimate energy(const SystemBatch& batch, const HamiltonianFamily& family,
                const CouplingVector& gamma, const LogAmplitudeFn& log_amplitude);

/// Per-realization squared magnetization and the averaged correlation
/// function C_av(r) over a set of disorder realizations.
struct DisorderReport {
  std::vector<double> c_av;          // r = 0..N-1, spin-1/2 units
  std::vector<double> c_av_sigma;
  double m2 = 0.0;                   // (1/N) sum_{r=1..N} C_av(r)
  double m2_sigma = 0.0;
  std::vector<double> m2_per_realization;
};
DisorderReport disorder_averaged_correlation(
    const HamiltonianFamily& family, const std::vector<CouplingVector>& realizations,
    const SamplerConfig& sampler, const LogAmplitudeFn& log_amplitude);

/// Exact <S_i . S_j> on an ED ground state (zz part plus pair-swap part).
double spin_correlation_ed(const oracle::EDSolution& sol, int i, int j);

/// Exact order parameters on an ED ground state of a square-lattice family.
struct ExactOrderParameters {
  double m2_neel = 0.0;
  double m2_stripe = 0.0;
  double d2 = 0.0;
};
ExactOrderParameters magnetic_order_ed(const oracle::EDSolution& sol,
                                       const Lattice& lattice);

}  // namespace evmc::observables
