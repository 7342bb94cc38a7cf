#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "evmc/common.hpp"
#include "evmc/vit.hpp"

namespace evmc {

/// Versioned model snapshot: architecture + lattice metadata + flat
/// parameters + optimizer progress + sampler RNG streams. Binary layout:
/// magic, u32 version, u64 metadata length, metadata JSON, u64 P, P doubles
/// (column-major per segment, little endian). save/load round-trips are
/// bit-exact; writes replace the target atomically.
struct Checkpoint {
  static constexpr uint32_t kVersion = 1;

  std::string family;
  int extent = 0;
  int n_couplings = 0;
  ViTConfig model;
  int step = 0;
  uint64_t seed = 0;
  std::vector<std::string> rng_states;
  Vector theta;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Rebuild the wavefunction a checkpoint describes and load its parameters.
WaveFunction model_from_checkpoint(const Checkpoint& ckpt);

/// Same architecture without parameters (used for layout checks).
WaveFunction model_from_checkpoint_shape(const Checkpoint& ckpt);

}  // namespace evmc
