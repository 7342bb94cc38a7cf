#pragma once

// Test-only oracles, independent of the library's sparse Hamiltonian action:
// dense Hamiltonians assembled from explicit Kronecker products of 2x2 spin
// operators, plus exhaustive expectation helpers for tiny models.

#include <doctest.h>

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "evmc/hamiltonian.hpp"
#include "evmc/vit.hpp"

namespace testing_oracle {

using evmc::Complex;
using CMatrix = Eigen::MatrixXcd;

inline CMatrix pauli_x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
inline CMatrix pauli_y() {
  CMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}
inline CMatrix pauli_z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
inline CMatrix id2() { return CMatrix::Identity(2, 2); }

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Tensor product with site 0 as the least significant bit, matching
/// SpinConfiguration::to_bits.
inline CMatrix kron_site_ops(const std::vector<CMatrix>& ops) {
  CMatrix out = ops.back();
  for (int i = static_cast<int>(ops.size()) - 2; i >= 0; --i)
    out = kron(out, ops[static_cast<std::size_t>(i)]);
  return out;
}

inline CMatrix site_op(int n, int site, const CMatrix& op) {
  std::vector<CMatrix> ops(static_cast<std::size_t>(n), id2());
  ops[static_cast<std::size_t>(site)] = op;
  return kron_site_ops(ops);
}

inline CMatrix two_site_op(int n, int i, const CMatrix& a, int j, const CMatrix& b) {
  std::vector<CMatrix> ops(static_cast<std::size_t>(n), id2());
  ops[static_cast<std::size_t>(i)] = a;
  ops[static_cast<std::size_t>(j)] = b;
  return kron_site_ops(ops);
}

/// Dense H over the full 2^N basis from explicit operator products.
inline Eigen::MatrixXd dense_hamiltonian(const evmc::HamiltonianFamily& family,
                                         const evmc::CouplingVector& gamma) {
  const int n = family.lattice().size();
  const auto dim = static_cast<Eigen::Index>(1) << n;
  CMatrix h = CMatrix::Zero(dim, dim);
  if (!family.is_heisenberg()) {
    const double j = family.exchange();
    for (const evmc::Bond& b : family.bond_classes()[0])
      h += -0.5 * j * two_site_op(n, b.i, pauli_z(), b.j, pauli_z());
    for (int i = 0; i < n; ++i) {
      double hi = (family.tag() == evmc::Family::TfiChain)
                      ? gamma.values[0]
                      : gamma.values[static_cast<std::size_t>(i)];
      h += -0.5 * hi * site_op(n, i, pauli_x());
    }
  } else {
    const auto& classes = family.bond_classes();
    for (std::size_t c = 0; c < classes.size(); ++c) {
      double jc = (c == 0) ? 1.0 : gamma.values[c - 1];
      for (const evmc::Bond& b : classes[c]) {
        h += 0.25 * jc *
             (two_site_op(n, b.i, pauli_x(), b.j, pauli_x()) +
              two_site_op(n, b.i, pauli_y(), b.j, pauli_y()) +
              two_site_op(n, b.i, pauli_z(), b.j, pauli_z()));
      }
    }
  }
  Eigen::MatrixXd real = h.real();
  REQUIRE(h.imag().cwiseAbs().maxCoeff() < 1e-12);
  return real;
}

/// Exhaustive expectation <H> over all 2^N configurations weighted by
/// |psi|^2, with psi given by the model (full-basis version of the Monte
/// Carlo estimate).
inline double exhaustive_energy(const evmc::WaveFunction& model,
                                const evmc::HamiltonianFamily& family,
                                const evmc::CouplingVector& gamma) {
  const int n = family.lattice().size();
  double norm = 0.0, acc = 0.0;
  for (uint64_t bits = 0; bits < (1ULL << n); ++bits) {
    auto sigma = evmc::SpinConfiguration::from_bits(bits, n);
    Complex lp = model.log_psi(sigma, gamma);
    double w = std::exp(2.0 * lp.real());
    Complex el = evmc::local_energy(family, gamma, sigma,
                                    [&](const evmc::SpinConfiguration& s) {
                                      return model.log_psi(s, gamma);
                                    });
    norm += w;
    acc += w * el.real();
  }
  return acc / norm;
}

}  // namespace testing_oracle
