#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evmc/common.hpp"
#include "evmc/couplings.hpp"
#include "evmc/hamiltonian.hpp"
#include "evmc/run_record.hpp"
#include "evmc/sampler.hpp"
#include "evmc/vit.hpp"

namespace evmc {

enum class SolverMode { Auto, Direct, Kernel };

struct SRConfig {
  double learning_rate = 0.03;  // eta
  double diag_shift = 1e-4;     // lambda
  int steps = 300;              // N_opt
  SolverMode solver = SolverMode::Auto;
  int reequilibration_sweeps = 2;  // sweeps after each parameter update
  double divergence_factor = 10.0;

  void validate() const {
    check(learning_rate > 0, "optimizer: learning_rate must be positive");
    check(diag_shift > 0, "optimizer: diag_shift must be positive");
    check(steps >= 0, "optimizer: steps must be >= 0");
    check(reequilibration_sweeps >= 0,
          "optimizer: reequilibration_sweeps must be >= 0");
  }
};

/// Per-system Monte Carlo estimates feeding one SR step: local energies and
/// log-derivative rows, aligned by sample.
struct SystemEstimate {
  ComplexVector local_energies;  // M_k
  Matrix o_re;                   // M_k x P
  Matrix o_im;                   // M_k x P
};

/// G_alpha = (1/R) sum_k 2 Re{ <conj(dE_L) dO_alpha> }, with centered
/// quantities per system.
Vector estimate_gradient(std::span<const SystemEstimate> systems);

/// S = (1/R) sum_k Re{ centered(O_k)^dagger centered(O_k) } / M_k.
Matrix estimate_qgt(std::span<const SystemEstimate> systems);

/// Centered factorization of the same estimates: S = X X^T and G = X f with
/// X of shape P x 2M (real/imaginary sample columns).
struct KernelFactors {
  Matrix x;  // P x 2M
  Vector f;  // 2M
};
KernelFactors build_kernel_factors(std::span<const SystemEstimate> systems);

/// delta_theta = -eta (S + lambda I)^{-1} G via SPD factorization. Checks the
/// solve residual against 1e-8 * ||eta G||.
Vector sr_step(const Matrix& qgt, const Vector& gradient, double eta, double lambda);

/// Same update through the Gram system (X^T X + lambda I) of size 2M; exact
/// push-through of the direct solve.
Vector sr_step_kernel(const KernelFactors& factors, double eta, double lambda);

struct OptimizeResult {
  Vector theta;
  std::vector<RunRecord> records;
  bool aborted = false;
  std::string abort_reason;
};

using StepCallback =
    std::function<void(const RunRecord&, const Vector& theta, const ChainPool& pool)>;

/// Full ensemble training loop: sample, estimate, solve, step. Chains persist
/// across steps; the divergence guard aborts when the ensemble energy rises
/// more than `divergence_factor` times its initial spread above its initial
/// value. Passing `start_step` > 0 together with stored sampler RNG states
/// resumes a previous run with bit-identical sampling.
OptimizeResult optimize(WaveFunction& model, const HamiltonianFamily& family,
                        const std::vector<CouplingVector>& ensemble,
                        const SRConfig& sr_config, const SamplerConfig& sampler_config,
                        const StepCallback& on_step = nullptr, int start_step = 0,
                        const std::vector<std::string>* rng_states = nullptr);

}  // namespace evmc
