#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evmc/common.hpp"
#include "evmc/couplings.hpp"
#include "evmc/lattice.hpp"
#include "evmc/spins.hpp"
#include "evmc/tape.hpp"

namespace evmc {

enum class EmbeddingMode { ConcatScalar, SplitPatches };
enum class SymmetryMode { Translational, None };

/// Architecture of the transformer wavefunction. `patch` is the patch length
/// on chains and the patch side on square lattices (patch volume patch^2).
struct ViTConfig {
  int layers = 2;
  int heads = 4;
  int dim = 12;
  int patch = 4;
  EmbeddingMode embedding = EmbeddingMode::ConcatScalar;
  SymmetryMode symmetrize = SymmetryMode::Translational;

  void validate(const Lattice& lattice, int n_couplings) const;
};

/// Partition of the lattice into transformer positions, plus the relative
/// patch-displacement table driving translation-invariant attention.
class PatchMap {
 public:
  PatchMap(const Lattice& lattice, int patch);

  int n_patches() const { return n_patches_; }
  int patch_volume() const { return volume_; }
  const std::vector<std::vector<int>>& sites() const { return sites_; }
  const Eigen::MatrixXi& relative_index() const { return rel_; }

  /// Site permutation for a shift by one patch vector along axis 0 or 1.
  std::vector<int> patch_translation(const Lattice& lattice, int axis) const;

 private:
  int n_patches_ = 0;
  int volume_ = 0;
  int grid_x_ = 0, grid_y_ = 0;
  std::vector<std::vector<int>> sites_;
  Eigen::MatrixXi rel_;
};

/// Named flat-parameter layout. Matrices are flattened column-major; the
/// segment order below is the checkpoint order.
class ParameterLayout {
 public:
  enum class Init { LinearFanIn, Zero, One, SmallNoise, Head };

  struct Segment {
    std::string name;
    int offset = 0;
    int rows = 0;
    int cols = 0;
    Init init = Init::Zero;
    int size() const { return rows * cols; }
  };

  int add(const std::string& name, int rows, int cols, Init init);
  int total() const { return total_; }
  const std::vector<Segment>& segments() const { return segs_; }
  const Segment& at(const std::string& name) const;
  bool has(const std::string& name) const;

 private:
  std::vector<Segment> segs_;
  int total_ = 0;
};

/// Transformer wavefunction mapping (sigma, gamma) to a complex log-amplitude.
/// Parameters are real; the output layer carries paired (re, im) components
/// acting as one complex-valued final layer.
class WaveFunction {
 public:
  WaveFunction(ViTConfig config, Lattice lattice, int n_couplings);

  const ViTConfig& config() const { return config_; }
  const Lattice& lattice() const { return lattice_; }
  const ParameterLayout& layout() const { return layout_; }
  const PatchMap& patches() const { return patches_; }
  int n_parameters() const { return layout_.total(); }
  int n_couplings() const { return n_couplings_; }

  Vector init_parameters(uint64_t seed) const;

  void set_parameters(const Vector& theta);
  const Vector& parameters() const { return theta_; }

  /// log psi(sigma | gamma); fast path without gradient bookkeeping.
  Complex log_psi(const SpinConfiguration& sigma, const CouplingVector& gamma) const;

  struct Gradients {
    Complex log_psi;
    ComplexVector parameters;  // d log psi / d theta, length P
    ComplexVector couplings;   // d log psi / d gamma, length N_c
  };
  Gradients log_psi_grad(const SpinConfiguration& sigma,
                         const CouplingVector& gamma) const;

  /// Per-sample log-derivative rows for a batch, split into real and
  /// imaginary parts (rows align with the input batch).
  struct JacobianBatch {
    ComplexVector log_psi;
    Matrix params_re, params_im;  // M x P
    Matrix coup_re, coup_im;      // M x N_c
  };
  JacobianBatch amplitude_jacobians(
      std::span<const std::pair<const SpinConfiguration*, const CouplingVector*>> batch)
      const;

 private:
  // pre-resolved segment indices, so the per-sample forward does no lookups
  struct LayerIdx {
    int ln1g, ln1b, wo, bo, ln2g, ln2b, w1, b1, w2, b2;
    std::vector<int> rel, wq, wk, wv;
  };
  struct SegIdx {
    int embed_w = -1, embed_b = -1;
    int embed_sw = -1, embed_sb = -1, embed_gw = -1, embed_gb = -1;
    int pos = -1;
    std::vector<LayerIdx> layers;
    int head_re = -1, head_im = -1;
  };

  ViTConfig config_;
  Lattice lattice_;
  int n_couplings_ = 0;
  PatchMap patches_;
  ParameterLayout layout_;
  SegIdx idx_;
  Vector theta_;
  std::vector<Matrix> cache_;  // per-segment matrices of the current theta

  template <class Exec>
  typename Exec::Ref build_forward(Exec& exec, const SpinConfiguration& sigma,
                                   const CouplingVector& gamma,
                                   typename Exec::Ref* im_out) const;

  Matrix patch_matrix(const SpinConfiguration& sigma) const;
  Matrix coupling_patch_matrix(const CouplingVector& gamma) const;
};

}  // namespace evmc
