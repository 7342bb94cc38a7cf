#include "evmc/sampler.hpp"

#include <cmath>
#include <sstream>

#include "evmc/rng.hpp"

namespace evmc {

std::pair<int, int> propose_move(SpinConfiguration& sigma,
                                 const HamiltonianFamily& family,
                                 std::mt19937_64& rng) {
  const int n = sigma.size();
  std::uniform_int_distribution<int> site(0, n - 1);
  if (!family.is_heisenberg()) {
    int i = site(rng);
    sigma.values[static_cast<std::size_t>(i)] *= -1;
    return {i, -1};
  }
  for (int attempt = 0; attempt < 64 * n; ++attempt) {
    int i = site(rng);
    int j = site(rng);
    if (sigma.values[static_cast<std::size_t>(i)] ==
        sigma.values[static_cast<std::size_t>(j)])
      continue;
    std::swap(sigma.values[static_cast<std::size_t>(i)],
              sigma.values[static_cast<std::size_t>(j)]);
    return {i, j};
  }
  throw NumericsError("sampler: no antiparallel pair found (state outside the sector)");
}

namespace {
void undo_move(SpinConfiguration& sigma, std::pair<int, int> touched) {
  if (touched.second < 0) {
    sigma.values[static_cast<std::size_t>(touched.first)] *= -1;
  } else {
    std::swap(sigma.values[static_cast<std::size_t>(touched.first)],
              sigma.values[static_cast<std::size_t>(touched.second)]);
  }
}
}  // namespace

ChainPool::ChainPool(const HamiltonianFamily& family,
                     std::vector<CouplingVector> couplings,
                     const SamplerConfig& config)
    : family_(&family), couplings_(std::move(couplings)), config_(config) {
  config_.validate(static_cast<int>(couplings_.size()));
  const int mk = samples_per_system();
  const int nchains = std::min(config_.chains_per_system, std::max(1, mk));
  const int n = family.lattice().size();
  chains_.resize(couplings_.size());
  for (std::size_t k = 0; k < couplings_.size(); ++k) {
    family.validate_couplings(couplings_[k]);
    for (int c = 0; c < nchains; ++c) {
      ChainState chain;
      chain.rng = make_engine(config_.seed, k, static_cast<uint64_t>(c));
      chain.sigma = family.is_heisenberg()
                        ? random_configuration_zero_mag(n, chain.rng)
                        : random_configuration(n, chain.rng);
      chains_[k].push_back(std::move(chain));
    }
  }
}

void ChainPool::sweep(ChainState& chain, const CouplingVector& gamma,
                      const LogAmplitudeFn& log_amplitude) {
  const int n = chain.sigma.size();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int p = 0; p < n; ++p) {
    auto touched = propose_move(chain.sigma, *family_, chain.rng);
    Complex lp = log_amplitude(chain.sigma, gamma);
    ++chain.proposed;
    double log_ratio = 2.0 * (lp.real() - chain.log_psi.real());
    if (log_ratio >= 0.0 || unit(chain.rng) < std::exp(log_ratio)) {
      chain.log_psi = lp;
      ++chain.accepted;
    } else {
      undo_move(chain.sigma, touched);
    }
  }
}

std::vector<SystemBatch> ChainPool::run(const LogAmplitudeFn& log_amplitude,
                                        int sweeps_before) {
  const int mk = samples_per_system();
  std::vector<SystemBatch> out(chains_.size());
  for (std::size_t k = 0; k < chains_.size(); ++k) {
    const CouplingVector& gamma = couplings_[k];
    SystemBatch& batch = out[k];
    batch.samples.reserve(static_cast<std::size_t>(mk));
    batch.log_psi.reserve(static_cast<std::size_t>(mk));
    const int nchains = static_cast<int>(chains_[k].size());
    uint64_t proposed0 = 0, accepted0 = 0;
    for (int c = 0; c < nchains; ++c) {
      ChainState& chain = chains_[k][static_cast<std::size_t>(c)];
      proposed0 += chain.proposed;
      accepted0 += chain.accepted;
      chain.log_psi = log_amplitude(chain.sigma, gamma);  // refresh cache
      for (int s = 0; s < sweeps_before; ++s) sweep(chain, gamma, log_amplitude);
      int quota = mk / nchains + (c < mk % nchains ? 1 : 0);
      batch.chain_starts.push_back(batch.samples.size());
      for (int s = 0; s < quota; ++s) {
        for (int t = 0; t < config_.stride_sweeps; ++t)
          sweep(chain, gamma, log_amplitude);
        batch.samples.push_back(chain.sigma);
        batch.log_psi.push_back(chain.log_psi);
      }
    }
    uint64_t proposed = 0, accepted = 0;
    for (const ChainState& chain : chains_[k]) {
      proposed += chain.proposed;
      accepted += chain.accepted;
    }
    batch.acceptance = proposed > proposed0
                           ? static_cast<double>(accepted - accepted0) /
                                 static_cast<double>(proposed - proposed0)
                           : 1.0;
    batch.degenerate = batch.acceptance < config_.acceptance_floor;
  }
  return out;
}

std::vector<std::string> ChainPool::rng_states() const {
  std::vector<std::string> out;
  for (const auto& sys : chains_)
    for (const auto& chain : sys) {
      std::ostringstream os;
      os << chain.rng;
      // the current configuration travels with the engine state
      os << ' ';
      for (int8_t v : chain.sigma.values) os << (v > 0 ? '1' : '0');
      out.push_back(os.str());
    }
  return out;
}

void ChainPool::restore_rng_states(const std::vector<std::string>& states) {
  std::size_t idx = 0;
  for (auto& sys : chains_)
    for (auto& chain : sys) {
      check(idx < states.size(), "sampler: RNG state list too short");
      std::istringstream is(states[idx++]);
      is >> chain.rng;
      std::string bits;
      is >> bits;
      check(static_cast<int>(bits.size()) == chain.sigma.size(),
            "sampler: stored configuration has wrong length");
      for (std::size_t i = 0; i < bits.size(); ++i)
        chain.sigma.values[i] = bits[i] == '1' ? 1 : -1;
    }
}

std::vector<SystemBatch> run_chains(const HamiltonianFamily& family,
                                    const std::vector<CouplingVector>& couplings,
                                    const SamplerConfig& config,
                                    const LogAmplitudeFn& log_amplitude) {
  ChainPool pool(family, couplings, config);
  return pool.run(log_amplitude, config.burnin_sweeps);
}

}  // namespace evmc
