#include <Eigen/SVD>
#include <cmath>

#include "evmc/oracles.hpp"

namespace evmc::oracle {

FreeFermionSolution::FreeFermionSolution(const std::vector<double>& fields,
                                         double coupling)
    : n_(static_cast<int>(fields.size())), j_(coupling), fields_(fields) {
  check(n_ >= 2, "free fermion: need at least two sites");

  Sector even = solve_sector(+1);
  Sector odd = solve_sector(-1);
  const Sector& chosen = (even.energy <= odd.energy) ? even : odd;
  sector_ = (even.energy <= odd.energy) ? +1 : -1;
  e0_ = chosen.energy;
  spectrum_ = chosen.eps;
  build_contractions(chosen);
}

FreeFermionSolution::Sector FreeFermionSolution::solve_sector(int parity) const {
  // Rotated frame: H = -sum_i Jb_i tx_i tx_{i+1} - sum_i G_i tz_i with
  // Jb = J/2 and G_i = h_i/2. Jordan-Wigner gives A_ii = 2 G_i,
  // A_{i,i+1} = B_{i,i+1} = -Jb (B antisymmetric); the boundary bond picks up
  // a factor -P from the string, so in the sector with parity p its sign is
  // flipped for p = +1.
  const double jb = 0.5 * j_;
  Matrix a = Matrix::Zero(n_, n_);
  Matrix b = Matrix::Zero(n_, n_);
  for (int i = 0; i < n_; ++i) a(i, i) = fields_[static_cast<std::size_t>(i)];
  auto add_bond = [&](int i, int j, double jeff) {
    a(i, j) += -jeff;
    a(j, i) += -jeff;
    b(i, j) += -jeff;
    b(j, i) += +jeff;
  };
  for (int i = 0; i + 1 < n_; ++i) add_bond(i, i + 1, jb);
  if (n_ > 2) add_bond(n_ - 1, 0, -static_cast<double>(parity) * jb);

  Matrix z = a + b;
  Eigen::JacobiSVD<Matrix> svd(z, Eigen::ComputeFullU | Eigen::ComputeFullV);

  Sector s;
  s.eps = svd.singularValues();
  // Z phi_k = eps_k psi_k with phi = right and psi = left singular vectors.
  s.phi = svd.matrixV().transpose();
  s.psi = svd.matrixU().transpose();
  s.vacuum_energy = -0.5 * s.eps.sum();
  double det_sign = Eigen::PartialPivLU<Matrix>(z).determinant() >= 0 ? 1.0 : -1.0;
  s.vacuum_parity = det_sign >= 0 ? 1 : -1;

  if (s.vacuum_parity == parity) {
    s.energy = s.vacuum_energy;
    s.excite_min = false;
  } else {
    // cheapest single quasiparticle restores the required parity
    s.energy = s.vacuum_energy + s.eps.minCoeff();
    s.excite_min = true;
  }
  return s;
}

void FreeFermionSolution::build_contractions(const Sector& s) {
  // G_ij = <B_i A_j> = sum_k (2 n_k - 1) psi_ki phi_kj with occupations n_k
  // of the selected eigenstate.
  Vector occ_sign = Vector::Constant(n_, -1.0);
  if (s.excite_min) {
    int kmin = 0;
    s.eps.minCoeff(&kmin);
    occ_sign(kmin) = 1.0;
  }
  g_ = s.psi.transpose() * occ_sign.asDiagonal() * s.phi;
}

double FreeFermionSolution::zz_pauli(int l, int m) const {
  if (l == m) return 1.0;
  if (l > m) std::swap(l, m);
  const int r = m - l;
  Matrix d(r, r);
  for (int a = 0; a < r; ++a)
    for (int c = 0; c < r; ++c) d(a, c) = g_(l + a, l + 1 + c);
  if (r == 1) return d(0, 0);
  return Eigen::PartialPivLU<Matrix>(d).determinant();
}

double FreeFermionSolution::correlation(int r) const {
  r = ((r % n_) + n_) % n_;
  if (r == 0) return 0.25;
  double sum = 0.0;
  for (int i = 0; i < n_; ++i) {
    int jx = i + r;
    if (jx >= n_) jx -= n_;
    sum += zz_pauli(i, jx);
  }
  return 0.25 * sum / static_cast<double>(n_);
}

double FreeFermionSolution::squared_magnetization() const {
  double sum = 0.0;
  for (int r = 1; r <= n_; ++r) sum += correlation(r);
  return sum / static_cast<double>(n_);
}

}  // namespace evmc::oracle
