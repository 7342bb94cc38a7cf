#include "evmc/hamiltonian.hpp"

#include <cmath>

namespace evmc {

HamiltonianFamily::HamiltonianFamily(Family tag, const Lattice& lattice)
    : tag_(tag), lattice_(lattice) {
  switch (tag_) {
    case Family::TfiChain:
      check(lattice.kind() == LatticeKind::Chain, "hamiltonian: tfi_chain needs a chain lattice");
      exchange_ = 1.0;
      bonds_ = {lattice.bonds_nn()};
      break;
    case Family::RandomTfiChain:
      check(lattice.kind() == LatticeKind::Chain,
            "hamiltonian: random_tfi_chain needs a chain lattice");
      exchange_ = 1.0 / std::exp(1.0);
      bonds_ = {lattice.bonds_nn()};
      break;
    case Family::J1J2Square:
      check(lattice.kind() == LatticeKind::Square, "hamiltonian: j1j2_square needs a square lattice");
      bonds_ = {lattice.bonds_nn(), lattice.bonds_diagonal()};
      break;
    case Family::J1J2J3Square:
      check(lattice.kind() == LatticeKind::Square,
            "hamiltonian: j1j2j3_square needs a square lattice");
      bonds_ = {lattice.bonds_nn(), lattice.bonds_diagonal(), lattice.bonds_third()};
      break;
    case Family::GeneralizedJ1J2Square:
      check(lattice.kind() == LatticeKind::Square,
            "hamiltonian: generalized_j1j2_square needs a square lattice");
      bonds_ = {lattice.bonds_nn(), lattice.bonds_diagonal_left(),
                lattice.bonds_diagonal_right()};
      break;
  }
}

int HamiltonianFamily::n_couplings() const {
  switch (tag_) {
    case Family::TfiChain:
      return 1;
    case Family::RandomTfiChain:
      return lattice_.size();
    case Family::J1J2Square:
      return 1;
    case Family::J1J2J3Square:
    case Family::GeneralizedJ1J2Square:
      return 2;
  }
  return 0;
}

std::vector<std::string> HamiltonianFamily::coupling_labels() const {
  switch (tag_) {
    case Family::TfiChain:
      return {"h/J"};
    case Family::RandomTfiChain: {
      std::vector<std::string> ls;
      for (int i = 0; i < lattice_.size(); ++i) ls.push_back("h" + std::to_string(i));
      return ls;
    }
    case Family::J1J2Square:
      return {"J2/J1"};
    case Family::J1J2J3Square:
      return {"J2/J1", "J3/J1"};
    case Family::GeneralizedJ1J2Square:
      return {"J2L/J1", "J2R/J1"};
  }
  return {};
}

void HamiltonianFamily::validate_couplings(const CouplingVector& gamma) const {
  if (gamma.size() != n_couplings())
    throw ConfigError("hamiltonian: coupling vector has " + std::to_string(gamma.size()) +
                      " components, family " + tag_to_string(tag_) + " expects " +
                      std::to_string(n_couplings()));
  if (!gamma.labels.empty()) {
    auto expected = coupling_labels();
    if (gamma.labels != expected)
      throw ConfigError("hamiltonian: coupling labels do not match family " +
                        tag_to_string(tag_));
  }
}

void HamiltonianFamily::validate_configuration(const SpinConfiguration& sigma) const {
  if (sigma.size() != lattice_.size())
    throw ConfigError("hamiltonian: configuration has " + std::to_string(sigma.size()) +
                      " sites, lattice has " + std::to_string(lattice_.size()));
}

double HamiltonianFamily::diagonal_element(const CouplingVector& gamma,
                                           const SpinConfiguration& sigma) const {
  const auto& s = sigma.values;
  if (!is_heisenberg()) {
    // -(J/2) sum sz sz in Pauli labels
    double sum = 0.0;
    for (const Bond& b : bonds_[0])
      sum += static_cast<double>(s[static_cast<std::size_t>(b.i)]) *
             static_cast<double>(s[static_cast<std::size_t>(b.j)]);
    return -0.5 * exchange_ * sum;
  }
  double diag = 0.0;
  for (std::size_t c = 0; c < bonds_.size(); ++c) {
    double jc = (c == 0) ? 1.0 : gamma.values[c - 1];
    if (jc == 0.0) continue;
    double sum = 0.0;
    for (const Bond& b : bonds_[c])
      sum += static_cast<double>(s[static_cast<std::size_t>(b.i)]) *
             static_cast<double>(s[static_cast<std::size_t>(b.j)]);
    diag += 0.25 * jc * sum;  // Sz Sz = sigma sigma / 4
  }
  return diag;
}

ConnectedElements HamiltonianFamily::connected_configurations(
    const CouplingVector& gamma, const SpinConfiguration& sigma) const {
  validate_couplings(gamma);
  validate_configuration(sigma);
  ConnectedElements out;
  out.diagonal = diagonal_element(gamma, sigma);

  if (!is_heisenberg()) {
    // single spin flips from the transverse field, element -h_i/2
    const int n = sigma.size();
    for (int i = 0; i < n; ++i) {
      double hi = (tag_ == Family::TfiChain) ? gamma.values[0]
                                             : gamma.values[static_cast<std::size_t>(i)];
      if (hi == 0.0) continue;
      SpinConfiguration flipped = sigma;
      flipped.values[static_cast<std::size_t>(i)] *= -1;
      out.offdiag.emplace_back(std::move(flipped), -0.5 * hi);
    }
    return out;
  }

  // antiparallel-bond exchange, element J_c/2 per bond
  for (std::size_t c = 0; c < bonds_.size(); ++c) {
    double jc = (c == 0) ? 1.0 : gamma.values[c - 1];
    if (jc == 0.0) continue;
    for (const Bond& b : bonds_[c]) {
      if (sigma.values[static_cast<std::size_t>(b.i)] ==
          sigma.values[static_cast<std::size_t>(b.j)])
        continue;
      SpinConfiguration swapped = sigma;
      std::swap(swapped.values[static_cast<std::size_t>(b.i)],
                swapped.values[static_cast<std::size_t>(b.j)]);
      out.offdiag.emplace_back(std::move(swapped), 0.5 * jc);
    }
  }
  return out;
}

Family HamiltonianFamily::tag_from_string(const std::string& s) {
  if (s == "tfi_chain") return Family::TfiChain;
  if (s == "random_tfi_chain") return Family::RandomTfiChain;
  if (s == "j1j2_square") return Family::J1J2Square;
  if (s == "j1j2j3_square") return Family::J1J2J3Square;
  if (s == "generalized_j1j2_square") return Family::GeneralizedJ1J2Square;
  throw ConfigError("hamiltonian: unknown family tag '" + s + "'");
}

std::string HamiltonianFamily::tag_to_string(Family f) {
  switch (f) {
    case Family::TfiChain:
      return "tfi_chain";
    case Family::RandomTfiChain:
      return "random_tfi_chain";
    case Family::J1J2Square:
      return "j1j2_square";
    case Family::J1J2J3Square:
      return "j1j2j3_square";
    case Family::GeneralizedJ1J2Square:
      return "generalized_j1j2_square";
  }
  return "?";
}

HamiltonianFamily make_family(const std::string& tag, int extent) {
  Family f = HamiltonianFamily::tag_from_string(tag);
  bool chain = (f == Family::TfiChain || f == Family::RandomTfiChain);
  return HamiltonianFamily(f, chain ? Lattice::chain(extent) : Lattice::square(extent));
}

Complex local_energy(const HamiltonianFamily& family, const CouplingVector& gamma,
                     const SpinConfiguration& sigma,
                     const std::function<Complex(const SpinConfiguration&)>& log_amplitude) {
  ConnectedElements conn = family.connected_configurations(gamma, sigma);
  Complex e(conn.diagonal, 0.0);
  if (conn.offdiag.empty()) return e;
  Complex log_ref = log_amplitude(sigma);
  for (const auto& [sp, m] : conn.offdiag) {
    Complex ratio = std::exp(log_amplitude(sp) - log_ref);
    if (!std::isfinite(ratio.real()) || !std::isfinite(ratio.imag()))
      throw NumericsError("local_energy: non-finite amplitude ratio");
    e += m * ratio;
  }
  return e;
}

}  // namespace evmc
