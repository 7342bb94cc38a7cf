#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "evmc/common.hpp"

namespace evmc {

/// Basis label for one lattice configuration. Entries are sigma_i = +-1
/// (Pauli z eigenvalues); the physical spin is S^z_i = sigma_i / 2.
struct SpinConfiguration {
  std::vector<int8_t> values;

  int size() const { return static_cast<int>(values.size()); }
  int total() const {
    int t = 0;
    for (int8_t v : values) t += v;
    return t;
  }
  double sz(int i) const { return 0.5 * values[static_cast<std::size_t>(i)]; }

  /// Bit packing for hashing/exact enumeration; valid for size <= 64.
  uint64_t to_bits() const {
    uint64_t b = 0;
    for (std::size_t i = 0; i < values.size(); ++i)
      if (values[i] > 0) b |= (1ULL << i);
    return b;
  }
  static SpinConfiguration from_bits(uint64_t bits, int n) {
    SpinConfiguration s;
    s.values.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      s.values[static_cast<std::size_t>(i)] = (bits >> i) & 1ULL ? 1 : -1;
    return s;
  }

  bool operator==(const SpinConfiguration& o) const { return values == o.values; }
};

/// Uniform random configuration (full basis).
inline SpinConfiguration random_configuration(int n, std::mt19937_64& rng) {
  SpinConfiguration s;
  s.values.resize(static_cast<std::size_t>(n));
  for (auto& v : s.values) v = (rng() & 1ULL) ? 1 : -1;
  return s;
}

/// Uniform random configuration in the zero-magnetization sector (even n).
inline SpinConfiguration random_configuration_zero_mag(int n,
                                                       std::mt19937_64& rng) {
  check(n % 2 == 0, "spin configuration: zero-magnetization sector needs even N");
  SpinConfiguration s;
  s.values.assign(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n / 2; ++i) s.values[static_cast<std::size_t>(i)] = 1;
  for (int i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<int> d(0, i);
    std::swap(s.values[static_cast<std::size_t>(i)],
              s.values[static_cast<std::size_t>(d(rng))]);
  }
  return s;
}

}  // namespace evmc
