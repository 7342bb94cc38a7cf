#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "evmc/common.hpp"
#include "evmc/couplings.hpp"
#include "evmc/hamiltonian.hpp"
#include "evmc/lattice.hpp"

namespace evmc::oracle {

/// Exact solution of the periodic transverse-field Ising chain
///   H = -(J/2) sum sz_i sz_{i+1} - (1/2) sum h_i sx_i   (Pauli labels)
/// via the free-fermion mapping. Both fermion-parity sectors are solved and
/// the lower one kept. Correlators come from Wick determinants over the
/// Majorana contraction matrix of the selected eigenstate.
class FreeFermionSolution {
 public:
  FreeFermionSolution(const std::vector<double>& fields, double coupling);

  double ground_energy() const { return e0_; }
  const Vector& spectrum() const { return spectrum_; }  // selected sector
  int sector() const { return sector_; }                // +1 even, -1 odd

  /// <sz_l sz_m> in Pauli labels (+-1); the physical spin-1/2 correlator is
  /// this value divided by 4.
  double zz_pauli(int l, int m) const;

  /// C(r) = (1/N) sum_i <S^z_i S^z_{i+r}> in spin-1/2 units; C(0) = 1/4.
  double correlation(int r) const;

  /// m^2 = (1/N) sum_{r=1..N} C(r).
  double squared_magnetization() const;

  int size() const { return n_; }

 private:
  struct Sector {
    Vector eps;
    Matrix phi, psi;  // rows phi_k, psi_k of the Bogoliubov transform
    double vacuum_energy = 0.0;
    int vacuum_parity = 1;
    double energy = 0.0;      // lowest parity-consistent energy
    bool excite_min = false;  // true when the cheapest quasiparticle is added
  };
  Sector solve_sector(int parity) const;
  void build_contractions(const Sector& s);

  int n_ = 0;
  double j_ = 1.0;
  std::vector<double> fields_;
  double e0_ = 0.0;
  int sector_ = 1;
  Vector spectrum_;
  Matrix g_;  // G_ij = <B_i A_j> Majorana contractions of the ground state
};

/// Ground state from sparse diagonalization. Heisenberg families are solved
/// in the zero-magnetization sector, transverse-field families in the full
/// basis. Dense below `dense_cutoff`, Lanczos with full reorthogonalization
/// above it.
struct EDSolution {
  double energy = 0.0;
  Vector ground_state;             // amplitudes over `basis`
  std::vector<uint64_t> basis;     // bitmask per basis state, ascending
  std::vector<double> excited;     // few lowest excitation energies
  double residual = 0.0;
};

EDSolution exact_diagonalize(const HamiltonianFamily& family,
                             const CouplingVector& gamma,
                             int n_excited = 1,
                             uint64_t lanczos_seed = 7,
                             int dense_cutoff = 1024);

/// Expectation <state| O_diag |state> for a diagonal observable given per
/// basis-state values.
double diagonal_expectation(const EDSolution& sol,
                            const std::vector<double>& values);

/// Fidelity susceptibility from exact ground states by central finite
/// differences of ln F on the coupling axes (step eps).
Matrix exact_fidelity_susceptibility(const HamiltonianFamily& family,
                                     const CouplingVector& gamma, double eps,
                                     double min_gap = 1e-8);

/// Overlap |<psi0(gamma_a) | psi0(gamma_b)>| of exact ground states.
double ground_state_overlap(const HamiltonianFamily& family,
                            const CouplingVector& ga, const CouplingVector& gb,
                            double min_gap = 1e-8);

}  // namespace evmc::oracle
