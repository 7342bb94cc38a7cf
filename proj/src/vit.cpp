#include "evmc/vit.hpp"

#include <cmath>
#include <random>

#include "evmc/rng.hpp"

namespace evmc {

void ViTConfig::validate(const Lattice& lattice, int n_couplings) const {
  check(layers >= 1, "model: layers must be >= 1");
  check(heads >= 1, "model: heads must be >= 1");
  check(dim >= 2 && dim % heads == 0, "model: embed dim must be divisible by heads");
  check(patch >= 1, "model: patch must be >= 1");
  check(n_couplings >= 1, "model: wavefunction needs at least one coupling input");
  if (lattice.kind() == LatticeKind::Chain)
    check(lattice.size() % patch == 0, "model: chain length must be divisible by patch");
  else
    check(lattice.extent() % patch == 0, "model: lattice side must be divisible by patch");
  if (embedding == EmbeddingMode::SplitPatches) {
    check(dim % 2 == 0, "model: split-patches embedding needs an even embed dim");
    check(n_couplings == lattice.size(),
          "model: split-patches embedding expects one coupling per site");
  } else {
    check(n_couplings != lattice.size() || lattice.size() <= 2,
          "model: concat-scalar embedding is for O(1) couplings; "
          "use split-patches for per-site fields");
  }
}

PatchMap::PatchMap(const Lattice& lattice, int patch) {
  if (lattice.kind() == LatticeKind::Chain) {
    grid_x_ = lattice.size() / patch;
    grid_y_ = 1;
    volume_ = patch;
    n_patches_ = grid_x_;
    sites_.resize(static_cast<std::size_t>(n_patches_));
    for (int p = 0; p < n_patches_; ++p)
      for (int v = 0; v < patch; ++v) sites_[static_cast<std::size_t>(p)].push_back(p * patch + v);
  } else {
    int l = lattice.extent();
    grid_x_ = l / patch;
    grid_y_ = l / patch;
    volume_ = patch * patch;
    n_patches_ = grid_x_ * grid_y_;
    sites_.resize(static_cast<std::size_t>(n_patches_));
    for (int py = 0; py < grid_y_; ++py)
      for (int px = 0; px < grid_x_; ++px) {
        auto& s = sites_[static_cast<std::size_t>(px + grid_x_ * py)];
        for (int dy = 0; dy < patch; ++dy)
          for (int dx = 0; dx < patch; ++dx)
            s.push_back(lattice.site_at(px * patch + dx, py * patch + dy));
      }
  }
  rel_.resize(n_patches_, n_patches_);
  for (int i = 0; i < n_patches_; ++i)
    for (int j = 0; j < n_patches_; ++j) {
      int ix = i % grid_x_, iy = i / grid_x_;
      int jx = j % grid_x_, jy = j / grid_x_;
      int dx = ((jx - ix) % grid_x_ + grid_x_) % grid_x_;
      int dy = ((jy - iy) % grid_y_ + grid_y_) % grid_y_;
      rel_(i, j) = dx + grid_x_ * dy;
    }
}

std::vector<int> PatchMap::patch_translation(const Lattice& lattice, int axis) const {
  int b = (lattice.kind() == LatticeKind::Chain)
              ? lattice.size() / grid_x_
              : lattice.extent() / grid_x_;
  std::vector<int> perm(static_cast<std::size_t>(lattice.size()));
  for (int s = 0; s < lattice.size(); ++s)
    perm[static_cast<std::size_t>(s)] =
        lattice.translate(s, axis == 0 ? b : 0, axis == 1 ? b : 0);
  return perm;
}

int ParameterLayout::add(const std::string& name, int rows, int cols, Init init) {
  segs_.push_back({name, total_, rows, cols, init});
  total_ += rows * cols;
  return static_cast<int>(segs_.size()) - 1;
}

const ParameterLayout::Segment& ParameterLayout::at(const std::string& name) const {
  for (const auto& s : segs_)
    if (s.name == name) return s;
  throw ConfigError("parameters: unknown segment '" + name + "'");
}

bool ParameterLayout::has(const std::string& name) const {
  for (const auto& s : segs_)
    if (s.name == name) return true;
  return false;
}

namespace {

/// Eager executor: plain Eigen evaluation through the shared kernels.
struct EagerExec {
  using Ref = Matrix;
  const std::vector<Matrix>* segments;
  Matrix coupling_value;

  const Ref& param(int idx) { return (*segments)[static_cast<std::size_t>(idx)]; }
  const Ref& coupling() { return coupling_value; }
  Ref constant(Matrix m) { return m; }
  Ref matmul(const Ref& a, const Ref& b) { return a * b; }
  Ref matmul_nt(const Ref& a, const Ref& b) { return a * b.transpose(); }
  Ref add(const Ref& a, const Ref& b) { return a + b; }
  Ref scale(const Ref& a, double c) { return a * c; }
  Ref add_rowvec(const Ref& x, const Ref& b) {
    Matrix y = x;
    y.array().rowwise() += b.row(0).array();
    return y;
  }
  Ref broadcast_row(const Ref& b, int n) { return b.replicate(n, 1); }
  Ref gelu(const Ref& x) { return ad::kernels::gelu(x); }
  Ref layer_norm(const Ref& x, const Ref& g, const Ref& b) {
    return ad::kernels::layer_norm(x, g, b);
  }
  Ref softmax_rows(const Ref& x) { return ad::kernels::softmax_rows(x); }
  Ref sum_rows(const Ref& x) { return x.colwise().sum(); }
  Ref concat_cols(const Ref& a, const Ref& b) {
    Matrix y(a.rows(), a.cols() + b.cols());
    y << a, b;
    return y;
  }
  Ref gather(const Ref& p, const Eigen::MatrixXi& idx) {
    Matrix y(idx.rows(), idx.cols());
    for (Eigen::Index i = 0; i < idx.rows(); ++i)
      for (Eigen::Index j = 0; j < idx.cols(); ++j) y(i, j) = p(0, idx(i, j));
    return y;
  }
};

/// Tape executor: records every operation for the backward sweep. Parameter
/// leaves are created lazily and remembered per segment.
struct TapeExec {
  using Ref = int;
  ad::Tape* tape;
  const std::vector<Matrix>* segments;
  Matrix coupling_value;
  std::vector<int> param_ids;
  int coupling_id = -1;

  explicit TapeExec(ad::Tape* t, const std::vector<Matrix>* segs)
      : tape(t), segments(segs), param_ids(segs->size(), -1) {}

  const Ref& param(int idx) {
    auto i = static_cast<std::size_t>(idx);
    if (param_ids[i] < 0) param_ids[i] = tape->leaf((*segments)[i]);
    return param_ids[i];
  }
  const Ref& coupling() {
    if (coupling_id < 0) coupling_id = tape->leaf(coupling_value);
    return coupling_id;
  }
  Ref constant(Matrix m) { return tape->constant(std::move(m)); }
  Ref matmul(Ref a, Ref b) { return tape->matmul(a, b); }
  Ref matmul_nt(Ref a, Ref b) { return tape->matmul_nt(a, b); }
  Ref add(Ref a, Ref b) { return tape->add(a, b); }
  Ref scale(Ref a, double c) { return tape->scale(a, c); }
  Ref add_rowvec(Ref x, Ref b) { return tape->add_rowvec(x, b); }
  Ref broadcast_row(Ref b, int n) { return tape->broadcast_row(b, n); }
  Ref gelu(Ref x) { return tape->gelu(x); }
  Ref layer_norm(Ref x, Ref g, Ref b) { return tape->layer_norm(x, g, b); }
  Ref softmax_rows(Ref x) { return tape->softmax_rows(x); }
  Ref sum_rows(Ref x) { return tape->sum_rows(x); }
  Ref concat_cols(Ref a, Ref b) { return tape->concat_cols(a, b); }
  Ref gather(Ref p, const Eigen::MatrixXi& idx) { return tape->gather(p, idx); }
};

}  // namespace

WaveFunction::WaveFunction(ViTConfig config, Lattice lattice, int n_couplings)
    : config_(config),
      lattice_(lattice),
      n_couplings_(n_couplings),
      patches_(lattice, config.patch) {
  config_.validate(lattice_, n_couplings_);
  const int d = config_.dim;
  const int pv = patches_.patch_volume();
  const int n = patches_.n_patches();
  using Init = ParameterLayout::Init;

  if (config_.embedding == EmbeddingMode::ConcatScalar) {
    idx_.embed_w = layout_.add("embed.w", pv + n_couplings_, d, Init::LinearFanIn);
    idx_.embed_b = layout_.add("embed.b", 1, d, Init::Zero);
  } else {
    idx_.embed_sw = layout_.add("embed.sigma.w", pv, d / 2, Init::LinearFanIn);
    idx_.embed_sb = layout_.add("embed.sigma.b", 1, d / 2, Init::Zero);
    idx_.embed_gw = layout_.add("embed.gamma.w", pv, d / 2, Init::LinearFanIn);
    idx_.embed_gb = layout_.add("embed.gamma.b", 1, d / 2, Init::Zero);
  }
  if (config_.symmetrize == SymmetryMode::None)
    idx_.pos = layout_.add("pos", n, d, Init::SmallNoise);

  const int dh = d / config_.heads;
  for (int l = 0; l < config_.layers; ++l) {
    std::string pre = "layer" + std::to_string(l) + ".";
    LayerIdx li;
    li.ln1g = layout_.add(pre + "ln1.g", 1, d, Init::One);
    li.ln1b = layout_.add(pre + "ln1.b", 1, d, Init::Zero);
    for (int h = 0; h < config_.heads; ++h) {
      std::string hp = pre + "att.h" + std::to_string(h) + ".";
      if (config_.symmetrize == SymmetryMode::Translational) {
        li.rel.push_back(layout_.add(hp + "rel", 1, n, Init::SmallNoise));
      } else {
        li.wq.push_back(layout_.add(hp + "wq", d, dh, Init::LinearFanIn));
        li.wk.push_back(layout_.add(hp + "wk", d, dh, Init::LinearFanIn));
      }
      li.wv.push_back(layout_.add(hp + "wv", d, dh, Init::LinearFanIn));
    }
    li.wo = layout_.add(pre + "att.wo", d, d, Init::LinearFanIn);
    li.bo = layout_.add(pre + "att.bo", 1, d, Init::Zero);
    li.ln2g = layout_.add(pre + "ln2.g", 1, d, Init::One);
    li.ln2b = layout_.add(pre + "ln2.b", 1, d, Init::Zero);
    li.w1 = layout_.add(pre + "mlp.w1", d, 4 * d, Init::LinearFanIn);
    li.b1 = layout_.add(pre + "mlp.b1", 1, 4 * d, Init::Zero);
    li.w2 = layout_.add(pre + "mlp.w2", 4 * d, d, Init::LinearFanIn);
    li.b2 = layout_.add(pre + "mlp.b2", 1, d, Init::Zero);
    idx_.layers.push_back(std::move(li));
  }
  idx_.head_re = layout_.add("head.re", d, 1, Init::Head);
  idx_.head_im = layout_.add("head.im", d, 1, Init::Head);

  set_parameters(Vector::Zero(layout_.total()));
}

Vector WaveFunction::init_parameters(uint64_t seed) const {
  auto rng = make_engine(seed, 0x517);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector theta(layout_.total());
  for (const auto& seg : layout_.segments()) {
    double scale = 0.0;
    switch (seg.init) {
      case ParameterLayout::Init::LinearFanIn:
        scale = 1.0 / std::sqrt(static_cast<double>(seg.rows));
        break;
      case ParameterLayout::Init::SmallNoise:
        scale = 0.02;
        break;
      case ParameterLayout::Init::Head:
        scale = 0.01 / std::sqrt(static_cast<double>(seg.rows));
        break;
      case ParameterLayout::Init::Zero:
      case ParameterLayout::Init::One:
        scale = 0.0;
        break;
    }
    double base = (seg.init == ParameterLayout::Init::One) ? 1.0 : 0.0;
    for (int i = 0; i < seg.size(); ++i)
      theta(seg.offset + i) = base + (scale > 0.0 ? scale * normal(rng) : 0.0);
  }
  return theta;
}

void WaveFunction::set_parameters(const Vector& theta) {
  check(theta.size() == layout_.total(), "model: parameter vector has wrong length");
  theta_ = theta;
  cache_.clear();
  cache_.reserve(layout_.segments().size());
  for (const auto& seg : layout_.segments())
    cache_.push_back(
        Eigen::Map<const Matrix>(theta_.data() + seg.offset, seg.rows, seg.cols));
}

Matrix WaveFunction::patch_matrix(const SpinConfiguration& sigma) const {
  const auto& sites = patches_.sites();
  Matrix u(patches_.n_patches(), patches_.patch_volume());
  for (int p = 0; p < patches_.n_patches(); ++p)
    for (int v = 0; v < patches_.patch_volume(); ++v)
      u(p, v) = static_cast<double>(
          sigma.values[static_cast<std::size_t>(sites[static_cast<std::size_t>(p)][static_cast<std::size_t>(v)])]);
  return u;
}

Matrix WaveFunction::coupling_patch_matrix(const CouplingVector& gamma) const {
  const auto& sites = patches_.sites();
  Matrix u(patches_.n_patches(), patches_.patch_volume());
  for (int p = 0; p < patches_.n_patches(); ++p)
    for (int v = 0; v < patches_.patch_volume(); ++v)
      u(p, v) = gamma.values[static_cast<std::size_t>(
          sites[static_cast<std::size_t>(p)][static_cast<std::size_t>(v)])];
  return u;
}

template <class Exec>
typename Exec::Ref WaveFunction::build_forward(Exec& ex, const SpinConfiguration& sigma,
                                               const CouplingVector& gamma,
                                               typename Exec::Ref* im_out) const {
  if (sigma.size() != lattice_.size())
    throw ConfigError("model: configuration length does not match the lattice");
  if (gamma.size() != n_couplings_)
    throw ConfigError("model: coupling vector length does not match the model");
  using Ref = typename Exec::Ref;
  const int n = patches_.n_patches();
  const int d = config_.dim;
  const int dh = d / config_.heads;
  const bool translational = config_.symmetrize == SymmetryMode::Translational;

  Ref x = [&]() -> Ref {
    if (config_.embedding == EmbeddingMode::ConcatScalar) {
      Ref patches = ex.constant(patch_matrix(sigma));
      Ref grow = ex.broadcast_row(ex.coupling(), n);
      Ref full = ex.concat_cols(patches, grow);
      return ex.add_rowvec(ex.matmul(full, ex.param(idx_.embed_w)),
                           ex.param(idx_.embed_b));
    }
    Ref patches = ex.constant(patch_matrix(sigma));
    Ref es = ex.add_rowvec(ex.matmul(patches, ex.param(idx_.embed_sw)),
                           ex.param(idx_.embed_sb));
    Ref eg = ex.add_rowvec(ex.matmul(ex.coupling(), ex.param(idx_.embed_gw)),
                           ex.param(idx_.embed_gb));
    return ex.concat_cols(es, eg);
  }();
  if (!translational) x = ex.add(x, ex.param(idx_.pos));

  for (const LayerIdx& li : idx_.layers) {
    Ref h = ex.layer_norm(x, ex.param(li.ln1g), ex.param(li.ln1b));
    Ref heads_cat{};
    for (int k = 0; k < config_.heads; ++k) {
      Ref v = ex.matmul(h, ex.param(li.wv[static_cast<std::size_t>(k)]));
      Ref a = [&]() -> Ref {
        if (translational)
          return ex.softmax_rows(ex.gather(ex.param(li.rel[static_cast<std::size_t>(k)]),
                                           patches_.relative_index()));
        Ref q = ex.matmul(h, ex.param(li.wq[static_cast<std::size_t>(k)]));
        Ref kk = ex.matmul(h, ex.param(li.wk[static_cast<std::size_t>(k)]));
        return ex.softmax_rows(
            ex.scale(ex.matmul_nt(q, kk), 1.0 / std::sqrt(static_cast<double>(dh))));
      }();
      Ref o = ex.matmul(a, v);
      heads_cat = (k == 0) ? o : ex.concat_cols(heads_cat, o);
    }
    Ref att = ex.add_rowvec(ex.matmul(heads_cat, ex.param(li.wo)), ex.param(li.bo));
    x = ex.add(x, att);
    Ref h2 = ex.layer_norm(x, ex.param(li.ln2g), ex.param(li.ln2b));
    Ref m = ex.add_rowvec(ex.matmul(h2, ex.param(li.w1)), ex.param(li.b1));
    m = ex.add_rowvec(ex.matmul(ex.gelu(m), ex.param(li.w2)), ex.param(li.b2));
    x = ex.add(x, m);
  }

  Ref z = ex.sum_rows(x);
  *im_out = ex.matmul(z, ex.param(idx_.head_im));
  return ex.matmul(z, ex.param(idx_.head_re));
}

Complex WaveFunction::log_psi(const SpinConfiguration& sigma,
                              const CouplingVector& gamma) const {
  EagerExec ex;
  ex.segments = &cache_;
  ex.coupling_value = (config_.embedding == EmbeddingMode::ConcatScalar)
                          ? Eigen::Map<const Matrix>(gamma.values.data(), 1, gamma.size())
                          : coupling_patch_matrix(gamma);
  Matrix im;
  Matrix re = build_forward(ex, sigma, gamma, &im);
  return Complex(re(0, 0), im(0, 0));
}

WaveFunction::Gradients WaveFunction::log_psi_grad(const SpinConfiguration& sigma,
                                                   const CouplingVector& gamma) const {
  ad::Tape tape;
  TapeExec ex(&tape, &cache_);
  ex.coupling_value = (config_.embedding == EmbeddingMode::ConcatScalar)
                          ? Eigen::Map<const Matrix>(gamma.values.data(), 1, gamma.size())
                          : coupling_patch_matrix(gamma);
  int im_id = -1;
  int re_id = build_forward(ex, sigma, gamma, &im_id);
  tape.backward(re_id, im_id);

  Gradients out;
  out.log_psi = Complex(tape.value(re_id)(0, 0), tape.value(im_id)(0, 0));
  out.parameters.resize(layout_.total());
  int seg_idx = 0;
  for (const auto& seg : layout_.segments()) {
    int leaf = ex.param_ids[static_cast<std::size_t>(seg_idx)];
    if (leaf < 0) {
      out.parameters.segment(seg.offset, seg.size()).setZero();
    } else {
      Matrix gre = tape.adjoint_re(leaf);
      Matrix gim = tape.adjoint_im(leaf);
      for (int i = 0; i < seg.size(); ++i)
        out.parameters(seg.offset + i) =
            Complex(gre.data()[i], gim.data()[i]);  // column-major flatten
    }
    ++seg_idx;
  }

  out.couplings.resize(n_couplings_);
  if (ex.coupling_id < 0) {
    out.couplings.setZero();
  } else {
    Matrix gre = tape.adjoint_re(ex.coupling_id);
    Matrix gim = tape.adjoint_im(ex.coupling_id);
    if (config_.embedding == EmbeddingMode::ConcatScalar) {
      for (int c = 0; c < n_couplings_; ++c)
        out.couplings(c) = Complex(gre(0, c), gim(0, c));
    } else {
      const auto& sites = patches_.sites();
      for (int p = 0; p < patches_.n_patches(); ++p)
        for (int v = 0; v < patches_.patch_volume(); ++v)
          out.couplings(sites[static_cast<std::size_t>(p)][static_cast<std::size_t>(v)]) =
              Complex(gre(p, v), gim(p, v));
    }
  }
  return out;
}

WaveFunction::JacobianBatch WaveFunction::amplitude_jacobians(
    std::span<const std::pair<const SpinConfiguration*, const CouplingVector*>> batch)
    const {
  check(!batch.empty(), "model: jacobian batch must be nonempty");
  const auto m = static_cast<Eigen::Index>(batch.size());
  JacobianBatch out;
  out.log_psi.resize(m);
  out.params_re.resize(m, layout_.total());
  out.params_im.resize(m, layout_.total());
  out.coup_re.resize(m, n_couplings_);
  out.coup_im.resize(m, n_couplings_);
  for (Eigen::Index i = 0; i < m; ++i) {
    Gradients g = log_psi_grad(*batch[static_cast<std::size_t>(i)].first,
                               *batch[static_cast<std::size_t>(i)].second);
    out.log_psi(i) = g.log_psi;
    out.params_re.row(i) = g.parameters.real().transpose();
    out.params_im.row(i) = g.parameters.imag().transpose();
    out.coup_re.row(i) = g.couplings.real().transpose();
    out.coup_im.row(i) = g.couplings.imag().transpose();
  }
  return out;
}

}  // namespace evmc
