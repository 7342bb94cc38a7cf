#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "evmc/common.hpp"
#include "evmc/couplings.hpp"
#include "evmc/hamiltonian.hpp"
#include "evmc/spins.hpp"

namespace evmc {

using LogAmplitudeFn =
    std::function<Complex(const SpinConfiguration&, const CouplingVector&)>;

struct SamplerConfig {
  int total_samples = 4096;   // M, split evenly across the R systems
  int chains_per_system = 8;  // clamped to the per-system sample count
  int burnin_sweeps = 100;    // one sweep = N proposals
  int stride_sweeps = 1;      // sweeps between kept samples
  uint64_t seed = 1;
  double acceptance_floor = 1e-3;

  void validate(int n_systems) const {
    check(n_systems > 0, "sampler: need at least one system");
    check(total_samples > 0, "sampler: total_samples must be positive");
    check(total_samples % n_systems == 0,
          "sampler: total_samples must be divisible by the number of systems");
    check(stride_sweeps >= 1, "sampler: stride_sweeps must be >= 1");
    check(burnin_sweeps >= 0, "sampler: burnin_sweeps must be >= 0");
    check(chains_per_system >= 1, "sampler: chains_per_system must be >= 1");
  }
};

/// Single spin flip for transverse-field families; exchange of a uniformly
/// chosen antiparallel site pair for Heisenberg families (stays in the
/// magnetization sector; both proposals are symmetric). Returns the one or
/// two touched sites.
std::pair<int, int> propose_move(SpinConfiguration& sigma,
                                 const HamiltonianFamily& family,
                                 std::mt19937_64& rng);

struct ChainState {
  SpinConfiguration sigma;
  Complex log_psi{0.0, 0.0};
  std::mt19937_64 rng;
  uint64_t proposed = 0;
  uint64_t accepted = 0;
};

struct SystemBatch {
  std::vector<SpinConfiguration> samples;
  std::vector<Complex> log_psi;
  std::vector<std::size_t> chain_starts;  // block boundaries for error bars
  double acceptance = 0.0;
  bool degenerate = false;
};

/// Independent Metropolis chains for each ensemble member. Chains persist
/// across calls so an optimization loop can re-equilibrate briefly after each
/// parameter update instead of re-burning from scratch.
class ChainPool {
 public:
  ChainPool(const HamiltonianFamily& family, std::vector<CouplingVector> couplings,
            const SamplerConfig& config);

  /// Run `sweeps_before` sweeps of equilibration, then collect M/R samples
  /// per system at the configured stride. Cached amplitudes are refreshed at
  /// entry, so the evaluator may have changed since the previous call.
  std::vector<SystemBatch> run(const LogAmplitudeFn& log_amplitude, int sweeps_before);

  const std::vector<CouplingVector>& couplings() const { return couplings_; }
  int n_systems() const { return static_cast<int>(couplings_.size()); }
  int samples_per_system() const { return config_.total_samples / n_systems(); }

  /// Serialized RNG engine states (one per chain), for checkpointing.
  std::vector<std::string> rng_states() const;
  void restore_rng_states(const std::vector<std::string>& states);

 private:
  void sweep(ChainState& chain, const CouplingVector& gamma,
             const LogAmplitudeFn& log_amplitude);

  const HamiltonianFamily* family_;
  std::vector<CouplingVector> couplings_;
  SamplerConfig config_;
  std::vector<std::vector<ChainState>> chains_;  // [system][chain]
};

/// One-shot sampling with the configured burn-in.
std::vector<SystemBatch> run_chains(const HamiltonianFamily& family,
                                    const std::vector<CouplingVector>& couplings,
                                    const SamplerConfig& config,
                                    const LogAmplitudeFn& log_amplitude);

}  // namespace evmc
