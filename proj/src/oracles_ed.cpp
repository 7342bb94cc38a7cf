#include <algorithm>
#include <bit>
#include <cmath>

#include "evmc/oracles.hpp"
#include "evmc/rng.hpp"

namespace evmc::oracle {

namespace {

std::vector<uint64_t> build_basis(const HamiltonianFamily& family) {
  const int n = family.lattice().size();
  check(n <= 24, "exact diagonalization: lattice too large");
  std::vector<uint64_t> basis;
  if (family.is_heisenberg()) {
    check(n % 2 == 0, "exact diagonalization: zero-magnetization sector needs even N");
    for (uint64_t b = 0; b < (1ULL << n); ++b)
      if (std::popcount(b) == n / 2) basis.push_back(b);
  } else {
    basis.resize(1ULL << n);
    for (uint64_t b = 0; b < (1ULL << n); ++b) basis[b] = b;
  }
  check(basis.size() <= (1ULL << 20), "exact diagonalization: dimension overflow");
  return basis;
}

/// Sparse action of H on amplitude vectors over a fixed basis.
class SparseAction {
 public:
  SparseAction(const HamiltonianFamily& family, const CouplingVector& gamma)
      : family_(&family), gamma_(gamma), basis_(build_basis(family)) {
    family.validate_couplings(gamma);
    full_ = !family.is_heisenberg();
    n_ = family.lattice().size();
  }

  const std::vector<uint64_t>& basis() const { return basis_; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(basis_.size()); }

  std::size_t index_of(uint64_t bits) const {
    if (full_) return bits;
    auto it = std::lower_bound(basis_.begin(), basis_.end(), bits);
    return static_cast<std::size_t>(it - basis_.begin());
  }

  double diagonal(uint64_t bits) const {
    double diag = 0.0;
    const auto& classes = family_->bond_classes();
    for (std::size_t c = 0; c < classes.size(); ++c) {
      double jc = family_->is_heisenberg()
                      ? ((c == 0) ? 1.0 : gamma_.values[c - 1])
                      : family_->exchange();
      if (jc == 0.0) continue;
      double sum = 0.0;
      for (const Bond& b : classes[c]) {
        bool anti = ((bits >> b.i) ^ (bits >> b.j)) & 1ULL;
        sum += anti ? -1.0 : 1.0;
      }
      diag += family_->is_heisenberg() ? 0.25 * jc * sum : -0.5 * jc * sum;
    }
    return diag;
  }

  void apply(const Vector& x, Vector& y) const {
    y.setZero(dim());
    for (Eigen::Index idx = 0; idx < dim(); ++idx) {
      const uint64_t bits = basis_[static_cast<std::size_t>(idx)];
      const double xv = x(idx);
      y(idx) += diagonal(bits) * xv;
      if (!family_->is_heisenberg()) {
        for (int i = 0; i < n_; ++i) {
          double hi = (family_->tag() == Family::TfiChain)
                          ? gamma_.values[0]
                          : gamma_.values[static_cast<std::size_t>(i)];
          if (hi == 0.0) continue;
          y(static_cast<Eigen::Index>(bits ^ (1ULL << i))) += -0.5 * hi * xv;
        }
      } else {
        const auto& classes = family_->bond_classes();
        for (std::size_t c = 0; c < classes.size(); ++c) {
          double jc = (c == 0) ? 1.0 : gamma_.values[c - 1];
          if (jc == 0.0) continue;
          for (const Bond& b : classes[c]) {
            if ((((bits >> b.i) ^ (bits >> b.j)) & 1ULL) == 0) continue;
            uint64_t tgt = bits ^ (1ULL << b.i) ^ (1ULL << b.j);
            y(static_cast<Eigen::Index>(index_of(tgt))) += 0.5 * jc * xv;
          }
        }
      }
    }
  }

  Matrix dense() const {
    Matrix h = Matrix::Zero(dim(), dim());
    Vector e = Vector::Zero(dim());
    Vector col(dim());
    for (Eigen::Index j = 0; j < dim(); ++j) {
      e(j) = 1.0;
      apply(e, col);
      h.col(j) = col;
      e(j) = 0.0;
    }
    return h;
  }

 private:
  const HamiltonianFamily* family_;
  CouplingVector gamma_;
  std::vector<uint64_t> basis_;
  bool full_ = true;
  int n_ = 0;
};

EDSolution lanczos(const SparseAction& op, int n_excited, uint64_t seed) {
  const Eigen::Index dim = op.dim();
  const int maxit = static_cast<int>(std::min<Eigen::Index>(dim, 600));
  auto rng = make_engine(seed, 0xED);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<Vector> vs;
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = normal(rng);
  v.normalize();
  vs.push_back(v);

  std::vector<double> alpha, beta;
  Vector w(dim);
  EDSolution sol;

  auto solve_tridiag = [&](Eigen::VectorXd* gs_coeffs) {
    const int m = static_cast<int>(alpha.size());
    Matrix t = Matrix::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      t(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < m) {
        t(i, i + 1) = beta[static_cast<std::size_t>(i)];
        t(i + 1, i) = beta[static_cast<std::size_t>(i)];
      }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(t);
    if (gs_coeffs) *gs_coeffs = es.eigenvectors().col(0);
    return es.eigenvalues();
  };

  for (int it = 0; it < maxit; ++it) {
    op.apply(vs.back(), w);
    double a = vs.back().dot(w);
    alpha.push_back(a);
    w -= a * vs.back();
    if (vs.size() > 1) w -= beta.back() * vs[vs.size() - 2];
    // full reorthogonalization, twice for numerical safety
    for (int pass = 0; pass < 2; ++pass)
      for (const Vector& u : vs) w -= u.dot(w) * u;
    double b = w.norm();
    if (static_cast<Eigen::Index>(vs.size()) == dim || b < 1e-14) break;
    if (alpha.size() >= 8 && alpha.size() % 5 == 0) {
      // residual estimate beta_m |s_m| of the lowest Ritz pair
      Eigen::VectorXd coeffs;
      double e0 = solve_tridiag(&coeffs)(0);
      double res_est = b * std::abs(coeffs(coeffs.size() - 1));
      if (res_est < 1e-12 * std::max(1.0, std::abs(e0))) break;
    }
    beta.push_back(b);
    vs.push_back(w / b);
  }

  Eigen::VectorXd coeff;
  Vector evals = solve_tridiag(&coeff);
  sol.energy = evals(0);
  sol.ground_state = Vector::Zero(dim);
  for (std::size_t i = 0; i < alpha.size() && i < vs.size(); ++i)
    sol.ground_state += coeff(static_cast<Eigen::Index>(i)) * vs[i];
  sol.ground_state.normalize();
  for (int k = 1; k <= n_excited && k < evals.size(); ++k)
    sol.excited.push_back(evals(k) - evals(0));

  op.apply(sol.ground_state, w);
  sol.residual = (w - sol.energy * sol.ground_state).norm();
  if (sol.residual > 1e-10)
    throw NumericsError("lanczos: ground-state residual " +
                        std::to_string(sol.residual) + " exceeds 1e-10");
  return sol;
}

}  // namespace

EDSolution exact_diagonalize(const HamiltonianFamily& family,
                             const CouplingVector& gamma, int n_excited,
                             uint64_t lanczos_seed, int dense_cutoff) {
  SparseAction op(family, gamma);
  EDSolution sol;
  if (op.dim() <= dense_cutoff) {
    Matrix h = op.dense();
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    sol.energy = es.eigenvalues()(0);
    sol.ground_state = es.eigenvectors().col(0);
    for (int k = 1; k <= n_excited && k < es.eigenvalues().size(); ++k)
      sol.excited.push_back(es.eigenvalues()(k) - sol.energy);
    sol.residual = (h * sol.ground_state - sol.energy * sol.ground_state).norm();
  } else {
    sol = lanczos(op, n_excited, lanczos_seed);
  }
  sol.basis = op.basis();
  return sol;
}

double diagonal_expectation(const EDSolution& sol, const std::vector<double>& values) {
  check(values.size() == sol.basis.size(),
        "diagonal_expectation: value table does not match basis");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < sol.ground_state.size(); ++i)
    acc += sol.ground_state(i) * sol.ground_state(i) *
           values[static_cast<std::size_t>(i)];
  return acc;
}

double ground_state_overlap(const HamiltonianFamily& family,
                            const CouplingVector& ga, const CouplingVector& gb,
                            double min_gap) {
  EDSolution a = exact_diagonalize(family, ga);
  EDSolution b = exact_diagonalize(family, gb);
  for (const EDSolution* s : {&a, &b})
    if (!s->excited.empty() && s->excited[0] < min_gap)
      throw NumericsError("ground_state_overlap: level crossing (gap below threshold)");
  return std::abs(a.ground_state.dot(b.ground_state));
}

Matrix exact_fidelity_susceptibility(const HamiltonianFamily& family,
                                     const CouplingVector& gamma, double eps,
                                     double min_gap) {
  check(eps > 0, "exact_fidelity_susceptibility: eps must be positive");
  const int nc = gamma.size();
  auto shifted = [&](int i, double si, int j, double sj) {
    CouplingVector g = gamma;
    g.values[static_cast<std::size_t>(i)] += si * eps;
    if (j >= 0) g.values[static_cast<std::size_t>(j)] += sj * eps;
    return g;
  };
  Matrix chi(nc, nc);
  for (int i = 0; i < nc; ++i) {
    double lp = std::log(ground_state_overlap(family, gamma, shifted(i, +1, -1, 0), min_gap));
    double lm = std::log(ground_state_overlap(family, gamma, shifted(i, -1, -1, 0), min_gap));
    chi(i, i) = -(lp + lm) / (eps * eps);
    for (int j = i + 1; j < nc; ++j) {
      // ln F(e_i + e_j) - ln F(e_i - e_j), symmetrized over the sign of eps
      double lpp = std::log(ground_state_overlap(family, gamma, shifted(i, +1, j, +1), min_gap));
      double lmm = std::log(ground_state_overlap(family, gamma, shifted(i, -1, j, -1), min_gap));
      double lpm = std::log(ground_state_overlap(family, gamma, shifted(i, +1, j, -1), min_gap));
      double lmp = std::log(ground_state_overlap(family, gamma, shifted(i, -1, j, +1), min_gap));
      chi(i, j) = chi(j, i) = (lpm + lmp - lpp - lmm) / (4.0 * eps * eps);
    }
  }
  return chi;
}

}  // namespace evmc::oracle
