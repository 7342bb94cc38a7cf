#include "evmc/sr.hpp"

#include <Eigen/Cholesky>
#include <chrono>
#include <cmath>

#include "evmc/stats.hpp"

namespace evmc {

namespace {

struct Centered {
  ComplexVector energies;  // E_L - <E_L>
  Matrix o_re, o_im;       // centered rows
  Complex energy_mean;
};

Centered center(const SystemEstimate& sys) {
  const auto m = sys.local_energies.size();
  check(m > 0, "sr: per-system batch must be nonempty");
  check(sys.o_re.rows() == m && sys.o_im.rows() == m,
        "sr: jacobian rows misaligned with local energies");
  if (!sys.local_energies.allFinite())
    throw NumericsError("sr: non-finite local energy in batch (aborting step)");
  KahanSum sre, sim;
  for (Eigen::Index i = 0; i < m; ++i) {
    sre.add(sys.local_energies(i).real());
    sim.add(sys.local_energies(i).imag());
  }
  Centered c;
  c.energy_mean = Complex(sre.value() / static_cast<double>(m),
                          sim.value() / static_cast<double>(m));
  c.energies = sys.local_energies.array() - c.energy_mean;
  c.o_re = sys.o_re.rowwise() - sys.o_re.colwise().mean();
  c.o_im = sys.o_im.rowwise() - sys.o_im.colwise().mean();
  return c;
}

}  // namespace

Vector estimate_gradient(std::span<const SystemEstimate> systems) {
  check(!systems.empty(), "sr: need at least one system");
  const auto p = systems.front().o_re.cols();
  Vector g = Vector::Zero(p);
  for (const SystemEstimate& sys : systems) {
    Centered c = center(sys);
    const auto m = c.energies.size();
    // 2 Re{ <conj(eps) o> } = 2/M [Re(eps)^T A + Im(eps)^T B]
    g.noalias() += (2.0 / static_cast<double>(m)) *
                   (c.o_re.transpose() * c.energies.real() +
                    c.o_im.transpose() * c.energies.imag());
  }
  return g / static_cast<double>(systems.size());
}

Matrix estimate_qgt(std::span<const SystemEstimate> systems) {
  check(!systems.empty(), "sr: need at least one system");
  const auto p = systems.front().o_re.cols();
  Matrix s = Matrix::Zero(p, p);
  for (const SystemEstimate& sys : systems) {
    Centered c = center(sys);
    const double w = 1.0 / static_cast<double>(c.energies.size());
    s.selfadjointView<Eigen::Lower>().rankUpdate(c.o_re.transpose(), w);
    s.selfadjointView<Eigen::Lower>().rankUpdate(c.o_im.transpose(), w);
  }
  s /= static_cast<double>(systems.size());
  return s.selfadjointView<Eigen::Lower>();
}

KernelFactors build_kernel_factors(std::span<const SystemEstimate> systems) {
  check(!systems.empty(), "sr: need at least one system");
  const auto p = systems.front().o_re.cols();
  Eigen::Index total = 0;
  for (const SystemEstimate& sys : systems) total += 2 * sys.local_energies.size();
  KernelFactors kf;
  kf.x.resize(p, total);
  kf.f.resize(total);
  const double rinv = 1.0 / static_cast<double>(systems.size());
  Eigen::Index col = 0;
  for (const SystemEstimate& sys : systems) {
    Centered c = center(sys);
    const auto m = c.energies.size();
    const double w = std::sqrt(rinv / static_cast<double>(m));
    kf.x.middleCols(col, m) = w * c.o_re.transpose();
    kf.x.middleCols(col + m, m) = w * c.o_im.transpose();
    kf.f.segment(col, m) = 2.0 * w * c.energies.real();
    kf.f.segment(col + m, m) = 2.0 * w * c.energies.imag();
    col += 2 * m;
  }
  return kf;
}

namespace {
Vector spd_solve(const Matrix& a, const Vector& b, const char* what) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    double dmin = a.diagonal().minCoeff();
    double dmax = a.diagonal().maxCoeff();
    throw NumericsError(std::string(what) +
                        ": SPD factorization failed (diagonal range [" +
                        std::to_string(dmin) + ", " + std::to_string(dmax) + "])");
  }
  return llt.solve(b);
}
}  // namespace

Vector sr_step(const Matrix& qgt, const Vector& gradient, double eta, double lambda) {
  check(qgt.rows() == qgt.cols() && qgt.rows() == gradient.size(),
        "sr_step: inconsistent shapes");
  check(eta > 0 && lambda > 0, "sr_step: eta and lambda must be positive");
  Matrix reg = qgt;
  reg.diagonal().array() += lambda;
  Vector delta = -eta * spd_solve(reg, gradient, "sr_step");
  double rhs = eta * gradient.norm();
  double residual = (reg * delta + eta * gradient).norm();
  if (rhs > 0 && residual > 1e-8 * rhs)
    throw NumericsError("sr_step: solve residual " + std::to_string(residual / rhs) +
                        " (relative) exceeds 1e-8");
  return delta;
}

Vector sr_step_kernel(const KernelFactors& factors, double eta, double lambda) {
  check(eta > 0 && lambda > 0, "sr_step: eta and lambda must be positive");
  // (X X^T + l I)^{-1} X f = X (X^T X + l I)^{-1} f
  Matrix gram = Matrix::Zero(factors.x.cols(), factors.x.cols());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(factors.x.transpose());
  Matrix reg = gram.selfadjointView<Eigen::Lower>();
  reg.diagonal().array() += lambda;
  Vector y = spd_solve(reg, factors.f, "sr_step_kernel");
  return -eta * (factors.x * y);
}

OptimizeResult optimize(WaveFunction& model, const HamiltonianFamily& family,
                        const std::vector<CouplingVector>& ensemble,
                        const SRConfig& sr_config, const SamplerConfig& sampler_config,
                        const StepCallback& on_step, int start_step,
                        const std::vector<std::string>* rng_states) {
  sr_config.validate();
  SamplerConfig sampler = sampler_config;
  sampler.validate(static_cast<int>(ensemble.size()));

  const int p = model.n_parameters();
  const int m_total = sampler.total_samples;
  const bool kernel_mode = (sr_config.solver == SolverMode::Kernel) ||
                           (sr_config.solver == SolverMode::Auto && p > 2 * m_total);

  ChainPool pool(family, ensemble, sampler);
  if (rng_states) pool.restore_rng_states(*rng_states);
  LogAmplitudeFn log_amp = [&](const SpinConfiguration& s, const CouplingVector& g) {
    return model.log_psi(s, g);
  };

  OptimizeResult result;
  double initial_loss = 0.0;
  double initial_spread = 0.0;

  for (int step = start_step; step < sr_config.steps; ++step) {
    auto t0 = std::chrono::steady_clock::now();
    auto batches = pool.run(log_amp, step == 0 ? sampler.burnin_sweeps
                                               : sr_config.reequilibration_sweeps);

    std::vector<SystemEstimate> systems(ensemble.size());
    RunRecord rec;
    rec.step = step;
    for (std::size_t k = 0; k < ensemble.size(); ++k) {
      const SystemBatch& batch = batches[k];
      const auto mk = static_cast<Eigen::Index>(batch.samples.size());
      std::vector<std::pair<const SpinConfiguration*, const CouplingVector*>> refs;
      refs.reserve(batch.samples.size());
      for (const auto& s : batch.samples) refs.push_back({&s, &ensemble[k]});
      auto jac = model.amplitude_jacobians(refs);

      SystemEstimate& est = systems[k];
      est.local_energies.resize(mk);
      for (Eigen::Index i = 0; i < mk; ++i)
        est.local_energies(i) =
            local_energy(family, ensemble[k], batch.samples[static_cast<std::size_t>(i)],
                         [&](const SpinConfiguration& s) { return model.log_psi(s, ensemble[k]); });
      est.o_re = std::move(jac.params_re);
      est.o_im = std::move(jac.params_im);

      KahanSum mean_re;
      for (Eigen::Index i = 0; i < mk; ++i) mean_re.add(est.local_energies(i).real());
      double e_mean = mean_re.value() / static_cast<double>(mk);
      KahanSum var_acc;
      for (Eigen::Index i = 0; i < mk; ++i)
        var_acc.add(std::norm(est.local_energies(i) - Complex(e_mean, 0.0)));
      rec.energy_mean.push_back(e_mean);
      rec.energy_var.push_back(var_acc.value() / static_cast<double>(mk));
      rec.acceptance.push_back(batch.acceptance);
    }
    rec.loss = compensated_mean(rec.energy_mean);

    if (step == start_step) {
      initial_loss = rec.loss;
      double spread = compensated_variance(rec.energy_mean);
      double stat = 0.0;
      for (std::size_t k = 0; k < rec.energy_var.size(); ++k)
        stat = std::max(stat, std::sqrt(rec.energy_var[k] /
                                        static_cast<double>(m_total / ensemble.size())));
      initial_spread = std::max({std::sqrt(spread), stat, 1e-12});
    } else if (rec.loss >
               initial_loss + sr_config.divergence_factor * initial_spread) {
      result.aborted = true;
      result.abort_reason = "ensemble energy " + std::to_string(rec.loss) +
                            " exceeded initial " + std::to_string(initial_loss) +
                            " by more than " +
                            std::to_string(sr_config.divergence_factor) +
                            " x initial spread " + std::to_string(initial_spread);
      break;
    }

    Vector delta;
    if (kernel_mode) {
      KernelFactors kf = build_kernel_factors(systems);
      delta = sr_step_kernel(kf, sr_config.learning_rate, sr_config.diag_shift);
    } else {
      Vector g = estimate_gradient(systems);
      Matrix s = estimate_qgt(systems);
      delta = sr_step(s, g, sr_config.learning_rate, sr_config.diag_shift);
    }
    rec.dtheta_norm = delta.norm();

    model.set_parameters(model.parameters() + delta);

    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    if (on_step) on_step(rec, model.parameters(), pool);
    result.records.push_back(std::move(rec));
  }

  result.theta = model.parameters();
  return result;
}

}  // namespace evmc
