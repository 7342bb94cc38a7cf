#pragma once

#include <span>
#include <vector>

#include "evmc/common.hpp"
#include "evmc/couplings.hpp"
#include "evmc/sampler.hpp"
#include "evmc/vit.hpp"

namespace evmc::fidelity {

/// Coupling-space quantum geometric tensor (real part): the generalized
/// fidelity susceptibility chi_ij = Re{ <conj(O_i) O_j> - conj(<O_i>)<O_j> }
/// with O_i = d log psi / d gamma_i over samples from |psi(.|gamma)|^2.
struct ChiEstimate {
  Matrix chi;            // N_c x N_c, symmetric
  double lambda_sigma;   // jackknife error of the leading eigenvalue
};

/// Estimate chi from per-sample coupling log-derivative rows.
ChiEstimate chi_matrix(const Matrix& coup_re, const Matrix& coup_im,
                       const std::vector<std::size_t>& chain_starts);

/// Sample at gamma with the model and estimate chi.
ChiEstimate chi(const WaveFunction& model, const HamiltonianFamily& family,
                const CouplingVector& gamma, const SamplerConfig& sampler);

struct LeadingDirection {
  double eigenvalue = 0.0;
  Vector eigenvector;
  bool degenerate = false;  // leading pair closer than the tie tolerance
};

/// Largest eigenpair; the eigenvector sign is fixed by a positive first
/// nonzero component. Near-degenerate leading pairs are flagged instead of
/// reporting an arbitrary direction.
LeadingDirection leading_direction(const Matrix& chi, double tie_tol = 1e-8);

struct SizedCurve {
  double size = 0.0;             // number of sites N
  std::vector<double> coupling;  // h values
  std::vector<double> chi;       // total chi(h)
};

struct CollapseFit {
  double critical = 0.0;  // h_c
  double exponent = 0.0;  // nu
  double quality = 0.0;   // residual scatter of the master curve
};

/// Grid search minimizing the scatter of chi N^{-2/nu} against
/// (h - h_c) N^{1/nu} across system sizes, restricted to |h - h_c| <= window.
CollapseFit collapse_fit(std::span<const SizedCurve> curves,
                         std::span<const double> hc_grid,
                         std::span<const double> nu_grid, double window = 0.3);

}  // namespace evmc::fidelity
