#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "evmc/common.hpp"
#include "evmc/couplings.hpp"
#include "evmc/sampler.hpp"
#include "evmc/sr.hpp"
#include "evmc/vit.hpp"

namespace evmc {

enum class RunMode { Train, Evaluate, ChiSweep, Oracle };

struct EvaluateSpec {
  std::string checkpoint;  // relative to output_dir when not absolute
  std::optional<CouplingDistribution> distribution;
  std::vector<std::string> observables = {"energy"};
  SamplerConfig sampler;
};

struct ChiSweepSpec {
  std::string checkpoint;
  CouplingDistribution grid;
  SamplerConfig sampler;
  std::optional<std::pair<double, double>> clip;  // display-only eigenvalue clip
};

struct OracleSpec {
  std::optional<CouplingDistribution> distribution;
  bool with_correlations = false;
  bool with_chi = false;
  double chi_eps = 1e-3;
};

/// One batch run: Hamiltonian family + coupling distribution + model +
/// sampler + optimizer, plus per-mode sections. Parsing is strict: unknown
/// keys are errors naming the offending field.
struct RunConfig {
  RunMode mode = RunMode::Train;
  uint64_t seed = 1;
  std::string output_dir;
  std::string family = "tfi_chain";
  int extent = 16;
  CouplingDistribution distribution;
  ViTConfig model;
  SamplerConfig sampler;
  SRConfig optimizer;
  int checkpoint_every = 50;
  std::optional<EvaluateSpec> evaluate;
  std::optional<ChiSweepSpec> chi_sweep;
  std::optional<OracleSpec> oracle;

  static RunConfig from_json_file(const std::filesystem::path& path);
  static RunConfig from_json_text(const std::string& text);
  std::string to_json_text() const;

  /// Cross-field checks (divisibility, labels, mode sections); throws
  /// ConfigError naming the offending field.
  void validate() const;

  HamiltonianFamily build_family() const;
  std::vector<CouplingVector> build_ensemble() const;
  WaveFunction build_model() const;
};

}  // namespace evmc
