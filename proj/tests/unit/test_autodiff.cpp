#include <doctest.h>

#include <functional>
#include <random>

#include "evmc/rng.hpp"
#include "evmc/tape.hpp"

using namespace evmc;
using ad::Tape;

namespace {

Matrix random_matrix(int r, int c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = n(rng);
  return m;
}

/// Scalarize Y through fixed random row/col contractions so every entry of Y
/// contributes to the output.
int scalarize(Tape& t, int y, const Matrix& left, const Matrix& right) {
  int l = t.constant(left);
  int r = t.constant(right);
  return t.matmul(t.matmul(l, y), r);
}

/// Central finite differences of `eval` with respect to every entry of one
/// leaf input, compared against the backward adjoint. Relative tolerance
/// 1e-5 with an absolute floor of 1e-8.
void check_gradient(const std::vector<Matrix>& leaves,
                    const std::function<int(Tape&, const std::vector<int>&)>& graph) {
  auto eval = [&](const std::vector<Matrix>& inputs) {
    Tape t;
    std::vector<int> ids;
    for (const auto& m : inputs) ids.push_back(t.leaf(m));
    int out = graph(t, ids);
    return t.value(out)(0, 0);
  };

  Tape t;
  std::vector<int> ids;
  for (const auto& m : leaves) ids.push_back(t.leaf(m));
  int out = graph(t, ids);
  t.backward(out, -1);

  const double step = 1e-5;
  for (std::size_t l = 0; l < leaves.size(); ++l) {
    Matrix adj = t.adjoint_re(ids[l]);
    for (int i = 0; i < leaves[l].rows(); ++i) {
      for (int j = 0; j < leaves[l].cols(); ++j) {
        auto perturbed = leaves;
        perturbed[l](i, j) += step;
        double fp = eval(perturbed);
        perturbed[l](i, j) -= 2 * step;
        double fm = eval(perturbed);
        double fd = (fp - fm) / (2 * step);
        double tol = 1e-5 * std::max(std::abs(fd), std::abs(adj(i, j))) + 1e-8;
        CHECK(std::abs(adj(i, j) - fd) <= tol);
      }
    }
  }
}

}  // namespace

TEST_SUITE("autodiff") {

TEST_CASE("finite differences validate every primitive") {
  auto rng = make_engine(42, 0xAD);
  Matrix l14 = random_matrix(1, 4, rng);
  Matrix r51 = random_matrix(5, 1, rng);
  Matrix l13 = random_matrix(1, 3, rng);
  Matrix r41 = random_matrix(4, 1, rng);

  SUBCASE("matmul") {
    check_gradient({random_matrix(4, 3, rng), random_matrix(3, 5, rng)},
                   [&](Tape& t, const std::vector<int>& in) {
                     return scalarize(t, t.matmul(in[0], in[1]), l14, r51);
                   });
  }
  SUBCASE("matmul_nt") {
    check_gradient({random_matrix(4, 3, rng), random_matrix(5, 3, rng)},
                   [&](Tape& t, const std::vector<int>& in) {
                     return scalarize(t, t.matmul_nt(in[0], in[1]), l14, r51);
                   });
  }
  SUBCASE("add and sub") {
    check_gradient({random_matrix(3, 4, rng), random_matrix(3, 4, rng)},
                   [&](Tape& t, const std::vector<int>& in) {
                     return scalarize(t, t.sub(t.add(in[0], in[1]), in[1]), l13, r41);
                   });
  }
  SUBCASE("scale") {
    check_gradient({random_matrix(3, 4, rng)},
                   [&](Tape& t, const std::vector<int>& in) {
                     return scalarize(t, t.scale(in[0], -1.7), l13, r41);
                   });
  }
  SUBCASE("hadamard") {
    check_gradient({random_matrix(3, 4, rng), random_matrix(3, 4, rng)},
                   [&](Tape& t, const std::vector<int>& in) {
                     return scalarize(t, t.hadamard(in[0], in[1]), l13, r41);
                   });
  }
  SUBCASE("add_rowvec") {
    check_gradient({random_matrix(3, 4, rng), random_matrix(1, 4, rng)},
                   [&](Tape& t, const std::vector<int>& in) {
                     return scalarize(t, t.add_rowvec(in[0], in[1]), l13, r41);
                   });
  }
  SUBCASE("broadcast_row") {
    check_gradient({random_matrix(1, 4, rng)},
                   [&](Tape& t, const std::vector<int>& in) {
                     return scalarize(t, t.broadcast_row(in[0], 3), l13, r41);
                   });
  }
  SUBCASE("gelu") {
    check_gradient({random_matrix(3, 4, rng)},
                   [&](Tape& t, const std::vector<int>& in) {
                     return scalarize(t, t.gelu(in[0]), l13, r41);
                   });
  }
  SUBCASE("layer_norm") {
    check_gradient({random_matrix(3, 4, rng), random_matrix(1, 4, rng, 0.5),
                    random_matrix(1, 4, rng)},
                   [&](Tape& t, const std::vector<int>& in) {
                     return scalarize(t, t.layer_norm(in[0], in[1], in[2]), l13, r41);
                   });
  }
  SUBCASE("softmax_rows") {
    check_gradient({random_matrix(3, 4, rng)},
                   [&](Tape& t, const std::vector<int>& in) {
                     return scalarize(t, t.softmax_rows(in[0]), l13, r41);
                   });
  }
  SUBCASE("sum_rows") {
    check_gradient({random_matrix(3, 4, rng)},
                   [&](Tape& t, const std::vector<int>& in) {
                     return scalarize(t, t.sum_rows(in[0]), Matrix::Ones(1, 1), r41);
                   });
  }
  SUBCASE("concat_cols") {
    check_gradient({random_matrix(3, 2, rng), random_matrix(3, 2, rng)},
                   [&](Tape& t, const std::vector<int>& in) {
                     return scalarize(t, t.concat_cols(in[0], in[1]), l13, r41);
                   });
  }
  SUBCASE("gather") {
    Eigen::MatrixXi idx(3, 3);
    idx << 0, 1, 2, 2, 0, 1, 1, 2, 0;
    check_gradient({random_matrix(1, 3, rng)},
                   [&](Tape& t, const std::vector<int>& in) {
                     return scalarize(t, t.gather(in[0], idx), l13,
                                      Matrix::Ones(3, 1));
                   });
  }
}

TEST_CASE("adjoint linearity: backward of a sum equals summed backwards") {
  auto rng = make_engine(7, 0xAD);
  Matrix x = random_matrix(3, 3, rng);
  Matrix ones13 = Matrix::Ones(1, 3);
  Matrix ones31 = Matrix::Ones(3, 1);

  auto build = [&](Tape& t, int leaf_id, int which) {
    int g = t.gelu(leaf_id);
    int s = t.softmax_rows(leaf_id);
    int y1 = t.matmul(t.matmul(t.constant(ones13), g), t.constant(ones31));
    int y2 = t.matmul(t.matmul(t.constant(ones13), s), t.constant(ones31));
    if (which == 0) return y1;
    if (which == 1) return y2;
    return t.add(y1, y2);
  };

  Tape tsum;
  int leaf_sum = tsum.leaf(x);
  tsum.backward(build(tsum, leaf_sum, 2), -1);

  Tape t1;
  int leaf1 = t1.leaf(x);
  t1.backward(build(t1, leaf1, 0), -1);
  Tape t2;
  int leaf2 = t2.leaf(x);
  t2.backward(build(t2, leaf2, 1), -1);

  Matrix diff =
      tsum.adjoint_re(leaf_sum) - (t1.adjoint_re(leaf1) + t2.adjoint_re(leaf2));
  CHECK(diff.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("primitives do not mutate their inputs") {
  auto rng = make_engine(9, 0xAD);
  Matrix x = random_matrix(3, 4, rng);
  Matrix w = random_matrix(4, 2, rng);
  Tape t;
  int xi = t.leaf(x);
  int wi = t.leaf(w);
  int y = t.gelu(t.matmul(t.softmax_rows(xi), wi));
  int s = t.matmul(t.matmul(t.constant(Matrix::Ones(1, 3)), y),
                   t.constant(Matrix::Ones(2, 1)));
  t.backward(s, -1);
  CHECK((t.value(xi) - x).cwiseAbs().maxCoeff() == 0.0);
  CHECK((t.value(wi) - w).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("leaves with no path to the output get exactly zero gradient") {
  auto rng = make_engine(11, 0xAD);
  Tape t;
  int used = t.leaf(random_matrix(1, 3, rng));
  int dead = t.leaf(random_matrix(2, 2, rng));
  int out = t.matmul(used, t.constant(Matrix::Ones(3, 1)));
  t.backward(out, -1);
  CHECK(t.adjoint_re(dead).cwiseAbs().maxCoeff() == 0.0);
  CHECK(t.adjoint_im(dead).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("one backward pass per forward pass") {
  Tape t;
  int x = t.leaf(Matrix::Ones(1, 1));
  int y = t.scale(x, 2.0);
  t.backward(y, -1);
  CHECK_THROWS_AS(t.backward(y, -1), NumericsError);
}

TEST_CASE("non-finite values are reported with the producing primitive") {
  Tape t;
  Matrix big = Matrix::Constant(1, 1, 1e308);
  int x = t.leaf(big);
  // the product overflows to inf inside the primitive
  CHECK_THROWS_WITH_AS(t.hadamard(x, x),
                       doctest::Contains("hadamard"), NumericsError);
}

TEST_CASE("dual-channel backward carries re and im adjoints") {
  auto rng = make_engine(13, 0xAD);
  Matrix z = random_matrix(1, 4, rng);
  Matrix wr = random_matrix(4, 1, rng);
  Matrix wi = random_matrix(4, 1, rng);
  Tape t;
  int zi = t.leaf(z);
  int wri = t.leaf(wr);
  int wii = t.leaf(wi);
  int re = t.matmul(zi, wri);
  int im = t.matmul(zi, wii);
  t.backward(re, im);
  // d re / d z = wr through channel 0, d im / d z = wi through channel 1
  CHECK((t.adjoint_re(zi) - wr.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((t.adjoint_im(zi) - wi.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  // head weights only feed their own channel
  CHECK(t.adjoint_im(wri).cwiseAbs().maxCoeff() == 0.0);
  CHECK(t.adjoint_re(wii).cwiseAbs().maxCoeff() == 0.0);
}

}  // TEST_SUITE
