#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "evmc/common.hpp"
#include "evmc/couplings.hpp"
#include "evmc/lattice.hpp"
#include "evmc/spins.hpp"

namespace evmc {

enum class Family {
  TfiChain,
  RandomTfiChain,
  J1J2J3Square,
  GeneralizedJ1J2Square,
  J1J2Square,
};

/// Sparse action of H_gamma on a basis state: the diagonal element plus all
/// connected configurations with their matrix elements.
struct ConnectedElements {
  double diagonal = 0.0;
  std::vector<std::pair<SpinConfiguration, double>> offdiag;
};

/// One Hamiltonian family on a fixed lattice.
///
/// Conventions (sigma = +-1 Pauli labels, S = sigma/2):
///   transverse-field Ising:  H = -(J/2) sum_i sz_i sz_{i+1} - (1/2) sum_i h_i sx_i
///     so the clean chain is critical at h/J = 1 and E0(h=0) = -J N/2.
///   Heisenberg:              H = sum_c J_c sum_{bonds c} S_i . S_j
///     with J_1 = 1 the unit of energy.
/// The uniform chain fixes J = 1; the random-field chain fixes J = 1/e, which
/// places the transition of h_i ~ U[0, h0] at h0 = 1.
class HamiltonianFamily {
 public:
  HamiltonianFamily(Family tag, const Lattice& lattice);

  Family tag() const { return tag_; }
  const Lattice& lattice() const { return lattice_; }
  double exchange() const { return exchange_; }

  bool is_heisenberg() const {
    return tag_ == Family::J1J2J3Square || tag_ == Family::J1J2Square ||
           tag_ == Family::GeneralizedJ1J2Square;
  }
  bool is_disordered() const { return tag_ == Family::RandomTfiChain; }

  int n_couplings() const;
  std::vector<std::string> coupling_labels() const;

  /// Bond classes beyond nearest neighbors, with the coupling component index
  /// that scales them (Heisenberg families only).
  const std::vector<std::vector<Bond>>& bond_classes() const { return bonds_; }

  void validate_couplings(const CouplingVector& gamma) const;
  void validate_configuration(const SpinConfiguration& sigma) const;

  ConnectedElements connected_configurations(const CouplingVector& gamma,
                                             const SpinConfiguration& sigma) const;

  /// Diagonal element <sigma|H|sigma> only.
  double diagonal_element(const CouplingVector& gamma,
                          const SpinConfiguration& sigma) const;

  static Family tag_from_string(const std::string& s);
  static std::string tag_to_string(Family f);

 private:
  Family tag_;
  Lattice lattice_;
  double exchange_ = 1.0;
  // Heisenberg: bonds_[c] scaled by coupling class c (class 0 = J1, fixed 1).
  std::vector<std::vector<Bond>> bonds_;
};

HamiltonianFamily make_family(const std::string& tag, int extent);

/// Local energy E_L(sigma, gamma) = <sigma|H|psi> / <sigma|psi>, evaluated
/// through log-amplitude differences.
Complex local_energy(const HamiltonianFamily& family, const CouplingVector& gamma,
                     const SpinConfiguration& sigma,
                     const std::function<Complex(const SpinConfiguration&)>& log_amplitude);

}  // namespace evmc
