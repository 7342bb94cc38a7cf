#include "evmc/tape.hpp"

#include <cmath>
#include <memory>

namespace evmc::ad {

namespace kernels {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
}  // namespace

Matrix gelu(const Matrix& x) {
  return x.unaryExpr([](double v) { return 0.5 * v * (1.0 + std::erf(v * kInvSqrt2)); });
}

Matrix gelu_grad(const Matrix& x) {
  return x.unaryExpr([](double v) {
    return 0.5 * (1.0 + std::erf(v * kInvSqrt2)) +
           v * kInvSqrt2Pi * std::exp(-0.5 * v * v);
  });
}

Matrix layer_norm(const Matrix& x, const Matrix& gain, const Matrix& bias,
                  LayerNormCache* cache) {
  const auto n = x.rows();
  const auto d = x.cols();
  Matrix xhat(n, d);
  Vector inv_std(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    double mu = x.row(r).mean();
    double var = (x.row(r).array() - mu).square().sum() / static_cast<double>(d);
    double is = 1.0 / std::sqrt(var + kLayerNormEps);
    inv_std(r) = is;
    xhat.row(r) = (x.row(r).array() - mu) * is;
  }
  Matrix y = xhat.array().rowwise() * gain.row(0).array();
  y.array().rowwise() += bias.row(0).array();
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

Matrix softmax_rows(const Matrix& x) {
  Matrix y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    double mx = x.row(r).maxCoeff();
    Eigen::ArrayXd e = (x.row(r).array() - mx).exp();
    y.row(r) = e / e.sum();
  }
  return y;
}

}  // namespace kernels

void Tape::check_finite(const Matrix& m, const char* op) const {
  if (!m.allFinite())
    throw NumericsError(std::string("tape: non-finite value produced by '") + op + "'");
}

int Tape::push(Matrix value, BackwardFn fn, const char* op) {
  check_finite(value, op);
  Node n;
  n.value = std::move(value);
  n.backprop = std::move(fn);
  n.op = op;
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

int Tape::leaf(Matrix value) { return push(std::move(value), nullptr, "leaf"); }
int Tape::constant(Matrix value) { return push(std::move(value), nullptr, "constant"); }

void Tape::accumulate(int id, int channel, const Matrix& grad) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.adj_set[channel]) {
    n.adj[channel] = grad;
    n.adj_set[channel] = true;
  } else {
    n.adj[channel] += grad;
  }
}

Matrix Tape::adjoint(int id, int channel) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.adj_set[channel]) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.adj[channel];
}

int Tape::matmul(int a, int b) {
  Matrix c = value(a) * value(b);
  return push(std::move(c),
              [a, b](Tape& t, const Matrix& g, int ch) {
                t.accumulate(a, ch, g * t.value(b).transpose());
                t.accumulate(b, ch, t.value(a).transpose() * g);
              },
              "matmul");
}

int Tape::matmul_nt(int a, int b) {
  Matrix c = value(a) * value(b).transpose();
  return push(std::move(c),
              [a, b](Tape& t, const Matrix& g, int ch) {
                t.accumulate(a, ch, g * t.value(b));
                t.accumulate(b, ch, g.transpose() * t.value(a));
              },
              "matmul_nt");
}

int Tape::add(int a, int b) {
  return push(value(a) + value(b),
              [a, b](Tape& t, const Matrix& g, int ch) {
                t.accumulate(a, ch, g);
                t.accumulate(b, ch, g);
              },
              "add");
}

int Tape::sub(int a, int b) {
  return push(value(a) - value(b),
              [a, b](Tape& t, const Matrix& g, int ch) {
                t.accumulate(a, ch, g);
                t.accumulate(b, ch, -g);
              },
              "sub");
}

int Tape::scale(int a, double c) {
  return push(value(a) * c,
              [a, c](Tape& t, const Matrix& g, int ch) { t.accumulate(a, ch, g * c); },
              "scale");
}

int Tape::hadamard(int a, int b) {
  return push(value(a).cwiseProduct(value(b)),
              [a, b](Tape& t, const Matrix& g, int ch) {
                t.accumulate(a, ch, g.cwiseProduct(t.value(b)));
                t.accumulate(b, ch, g.cwiseProduct(t.value(a)));
              },
              "hadamard");
}

int Tape::add_rowvec(int x, int b) {
  check(value(b).rows() == 1 && value(b).cols() == value(x).cols(),
        "tape: add_rowvec needs a 1 x d bias row");
  Matrix y = value(x);
  y.array().rowwise() += value(b).row(0).array();
  return push(std::move(y),
              [x, b](Tape& t, const Matrix& g, int ch) {
                t.accumulate(x, ch, g);
                t.accumulate(b, ch, g.colwise().sum());
              },
              "add_rowvec");
}

int Tape::broadcast_row(int b, int nrows) {
  check(value(b).rows() == 1, "tape: broadcast_row needs a 1 x d row");
  Matrix y = value(b).replicate(nrows, 1);
  return push(std::move(y),
              [b](Tape& t, const Matrix& g, int ch) {
                t.accumulate(b, ch, g.colwise().sum());
              },
              "broadcast_row");
}

int Tape::gelu(int x) {
  return push(kernels::gelu(value(x)),
              [x](Tape& t, const Matrix& g, int ch) {
                t.accumulate(x, ch, g.cwiseProduct(kernels::gelu_grad(t.value(x))));
              },
              "gelu");
}

int Tape::layer_norm(int x, int gain, int bias) {
  auto cache = std::make_shared<kernels::LayerNormCache>();
  Matrix y = kernels::layer_norm(value(x), value(gain), value(bias), cache.get());
  return push(std::move(y),
              [x, gain, bias, cache](Tape& t, const Matrix& g, int ch) {
                const Matrix& xhat = cache->xhat;
                const Vector& inv_std = cache->inv_std;
                const Matrix& gn = t.value(gain);
                const auto d = static_cast<double>(xhat.cols());
                // dxhat = g .* gain (broadcast over rows)
                Matrix dxhat = g.array().rowwise() * gn.row(0).array();
                Matrix dx(xhat.rows(), xhat.cols());
                for (Eigen::Index r = 0; r < xhat.rows(); ++r) {
                  double s1 = dxhat.row(r).sum();
                  double s2 = dxhat.row(r).cwiseProduct(xhat.row(r)).sum();
                  dx.row(r) =
                      inv_std(r) / d *
                      (d * dxhat.row(r).array() - s1 - xhat.row(r).array() * s2);
                }
                t.accumulate(x, ch, dx);
                t.accumulate(gain, ch, g.cwiseProduct(xhat).colwise().sum());
                t.accumulate(bias, ch, g.colwise().sum());
              },
              "layer_norm");
}

int Tape::softmax_rows(int x) {
  Matrix s = kernels::softmax_rows(value(x));
  int id = push(s, nullptr, "softmax_rows");
  Node& n = nodes_[static_cast<std::size_t>(id)];
  n.backprop = [x, id](Tape& t, const Matrix& g, int ch) {
    const Matrix& sv = t.value(id);
    Matrix dx(sv.rows(), sv.cols());
    for (Eigen::Index r = 0; r < sv.rows(); ++r) {
      double dot = g.row(r).cwiseProduct(sv.row(r)).sum();
      dx.row(r) = sv.row(r).array() * (g.row(r).array() - dot);
    }
    t.accumulate(x, ch, dx);
  };
  return id;
}

int Tape::sum_rows(int x) {
  Matrix y = value(x).colwise().sum();
  int nrows = rows(x);
  return push(std::move(y),
              [x, nrows](Tape& t, const Matrix& g, int ch) {
                t.accumulate(x, ch, g.replicate(nrows, 1));
              },
              "sum_rows");
}

int Tape::concat_cols(int a, int b) {
  check(value(a).rows() == value(b).rows(), "tape: concat_cols needs equal row counts");
  Matrix y(value(a).rows(), value(a).cols() + value(b).cols());
  y << value(a), value(b);
  int ca = cols(a);
  return push(std::move(y),
              [a, b, ca](Tape& t, const Matrix& g, int ch) {
                t.accumulate(a, ch, g.leftCols(ca));
                t.accumulate(b, ch, g.rightCols(g.cols() - ca));
              },
              "concat_cols");
}

int Tape::gather(int p, const Eigen::MatrixXi& idx) {
  check(value(p).rows() == 1, "tape: gather needs a 1 x m parameter row");
  const Matrix& pv = value(p);
  Matrix y(idx.rows(), idx.cols());
  for (Eigen::Index i = 0; i < idx.rows(); ++i)
    for (Eigen::Index j = 0; j < idx.cols(); ++j)
      y(i, j) = pv(0, idx(i, j));
  int m = cols(p);
  return push(std::move(y),
              [p, idx, m](Tape& t, const Matrix& g, int ch) {
                Matrix dp = Matrix::Zero(1, m);
                for (Eigen::Index i = 0; i < idx.rows(); ++i)
                  for (Eigen::Index j = 0; j < idx.cols(); ++j)
                    dp(0, idx(i, j)) += g(i, j);
                t.accumulate(p, ch, dp);
              },
              "gather");
}

void Tape::backward(int re_node, int im_node) {
  if (backward_done_)
    throw NumericsError("tape: backward already run for this forward pass");
  backward_done_ = true;
  if (re_node >= 0) {
    check(value(re_node).size() == 1, "tape: backward seed must be 1x1");
    accumulate(re_node, 0, Matrix::Ones(1, 1));
  }
  if (im_node >= 0) {
    check(value(im_node).size() == 1, "tape: backward seed must be 1x1");
    accumulate(im_node, 1, Matrix::Ones(1, 1));
  }
  for (int id = static_cast<int>(nodes_.size()) - 1; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.backprop) continue;
    for (int ch = 0; ch < 2; ++ch) {
      if (!n.adj_set[ch]) continue;
      if (!n.adj[ch].allFinite())
        throw NumericsError(std::string("tape: non-finite adjoint at '") + n.op + "'");
      n.backprop(*this, n.adj[ch], ch);
    }
  }
}

}  // namespace evmc::ad
