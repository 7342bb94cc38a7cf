#pragma once

#include <functional>
#include <string>
#include <vector>

#include "evmc/common.hpp"

namespace evmc::ad {

/// Forward kernels shared between the tape and the tape-free fast path, so
/// both evaluation modes produce bit-identical values.
namespace kernels {

Matrix gelu(const Matrix& x);
Matrix gelu_grad(const Matrix& x);

inline constexpr double kLayerNormEps = 1e-6;

struct LayerNormCache {
  Matrix xhat;
  Vector inv_std;
};
Matrix layer_norm(const Matrix& x, const Matrix& gain, const Matrix& bias,
                  LayerNormCache* cache = nullptr);

Matrix softmax_rows(const Matrix& x);

}  // namespace kernels

/// Reverse-mode tape over real dense matrices. The wavefunction head is a
/// complex scalar log psi = re + i*im built from two real output nodes; a
/// single backward sweep propagates the two adjoint channels (d re / d *,
/// d im / d *) simultaneously, yielding complex log-derivatives.
///
/// One backward pass per forward pass; nodes are visited in reverse creation
/// order, which is a valid reverse topological order for a tape.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Matrix& adj, int channel)>;

  struct Node {
    Matrix value;
    BackwardFn backprop;  // empty for leaves
    Matrix adj[2];
    bool adj_set[2] = {false, false};
    const char* op = "leaf";
  };

  /// Differentiable leaf (parameters, coupling inputs).
  int leaf(Matrix value);
  /// Non-differentiated constant input (spin patches).
  int constant(Matrix value);

  int matmul(int a, int b);
  /// C = A * B^T
  int matmul_nt(int a, int b);
  int add(int a, int b);
  int sub(int a, int b);
  int scale(int a, double c);
  int hadamard(int a, int b);
  /// Y = X + ones * b with b a 1 x d row (bias broadcast).
  int add_rowvec(int x, int b);
  /// Y (n x d) with every row equal to the 1 x d input row.
  int broadcast_row(int b, int nrows);
  int gelu(int x);
  int layer_norm(int x, int gain, int bias);
  int softmax_rows(int x);
  /// 1 x d row of column sums (sequence pooling).
  int sum_rows(int x);
  int concat_cols(int a, int b);
  /// Y_ij = p(0, idx(i,j)) for a 1 x m leaf p (relative-position lookup).
  int gather(int p, const Eigen::MatrixXi& idx);

  const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  int rows(int id) const { return static_cast<int>(value(id).rows()); }
  int cols(int id) const { return static_cast<int>(value(id).cols()); }
  std::size_t size() const { return nodes_.size(); }

  /// Reverse sweep seeding channel 0 at `re_node` and channel 1 at `im_node`
  /// (both must be 1x1). Either may be -1 to skip that channel.
  void backward(int re_node, int im_node);

  /// Adjoints after backward; zero matrices when no path reached the node.
  Matrix adjoint_re(int id) const { return adjoint(id, 0); }
  Matrix adjoint_im(int id) const { return adjoint(id, 1); }
  Matrix adjoint(int id, int channel) const;

  void accumulate(int id, int channel, const Matrix& grad);

 private:
  int push(Matrix value, BackwardFn fn, const char* op);
  void check_finite(const Matrix& m, const char* op) const;

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace evmc::ad
