#include "evmc/runner.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "evmc/checkpoint.hpp"
#include "evmc/fidelity.hpp"
#include "evmc/observables.hpp"
#include "evmc/oracles.hpp"
#include "evmc/rng.hpp"
#include "evmc/sr.hpp"
#include "evmc/stats.hpp"

namespace evmc {

namespace fs = std::filesystem;

namespace {

std::string join_values(const std::vector<double>& vs) {
  std::ostringstream os;
  os << std::setprecision(12);
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i) os << ',';
    os << vs[i];
  }
  return os.str();
}

void atomic_write_text(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    check(os.good(), "runner: cannot write " + tmp.string());
    os << text;
  }
  fs::rename(tmp, path);
}

fs::path resolve_checkpoint(const std::string& name, const fs::path& out_dir) {
  fs::path p(name);
  if (p.is_absolute() || fs::exists(p)) return p;
  return out_dir / p;
}

/// Per-sample chain m^2 = (sum_i S^z_i)^2 / N^2 (equals the displacement
/// average of the zz correlator).
observables::Estimate chain_m2(const SystemBatch& batch, const Lattice& lattice) {
  std::vector<double> vals;
  vals.reserve(batch.samples.size());
  const double n = lattice.size();
  for (const auto& s : batch.samples) {
    double mz = 0.5 * s.total();
    vals.push_back(mz * mz / (n * n));
  }
  MeanError me = blocked_mean(vals, batch.chain_starts);
  return {me.mean, me.sigma};
}

int run_train(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  HamiltonianFamily family = cfg.build_family();
  auto ensemble = cfg.build_ensemble();
  WaveFunction model = cfg.build_model();

  SamplerConfig sampler = cfg.sampler;
  sampler.seed = mix_seed(cfg.seed, 0x5A);

  int start_step = 0;
  std::vector<std::string> rng_states;
  fs::path ckpt_path = out / "checkpoint.bin";
  if (fs::exists(ckpt_path)) {
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    check(ckpt.family == cfg.family && ckpt.extent == cfg.extent,
          "runner: existing checkpoint belongs to a different system");
    model.set_parameters(ckpt.theta);
    start_step = ckpt.step;
    rng_states = ckpt.rng_states;
    log << "resuming from step " << start_step << "\n";
    if (start_step >= cfg.optimizer.steps) {
      log << "training already complete\n";
      return 0;
    }
  } else {
    model.set_parameters(model.init_parameters(mix_seed(cfg.seed, 0x1417)));
  }

  std::ofstream records(out / "records.jsonl", std::ios::app);
  check(records.good(), "runner: cannot open records.jsonl");

  std::vector<std::string> latest_rng = rng_states;
  auto save = [&](int step, const Vector& theta) {
    Checkpoint ckpt;
    ckpt.family = cfg.family;
    ckpt.extent = cfg.extent;
    ckpt.n_couplings = family.n_couplings();
    ckpt.model = cfg.model;
    ckpt.step = step;
    ckpt.seed = cfg.seed;
    ckpt.rng_states = latest_rng;
    ckpt.theta = theta;
    save_checkpoint(ckpt_path, ckpt);
  };

  StepCallback on_step = [&](const RunRecord& rec, const Vector& theta,
                             const ChainPool& pool) {
    records << rec.to_json_line() << "\n";
    records.flush();
    latest_rng = pool.rng_states();
    if (cfg.checkpoint_every > 0 && (rec.step + 1) % cfg.checkpoint_every == 0)
      save(rec.step + 1, theta);
    if (rec.step % 10 == 0)
      log << "step " << rec.step << "  loss " << std::setprecision(8) << rec.loss
          << "  |dtheta| " << rec.dtheta_norm << "\n";
  };

  OptimizeResult result =
      optimize(model, family, ensemble, cfg.optimizer, sampler, on_step, start_step,
               rng_states.empty() ? nullptr : &rng_states);

  // final checkpoint reflects the last completed step
  int final_step = result.records.empty() ? start_step : result.records.back().step + 1;
  save(final_step, result.theta);

  std::ostringstream card;
  card << "# Model card\n\n"
       << "family: " << cfg.family << "\n"
       << "lattice extent: " << cfg.extent << "\n"
       << "systems: " << ensemble.size() << "\n"
       << "parameters: " << model.n_parameters() << "\n"
       << "steps: " << (result.records.empty() ? start_step : result.records.back().step + 1)
       << "\n";
  if (!result.records.empty()) {
    card << "final per-system energies:";
    for (double e : result.records.back().energy_mean) card << ' ' << e;
    card << "\n";
  }
  atomic_write_text(out / "model_card.md", card.str());

  if (result.aborted) {
    log << "aborted: " << result.abort_reason << "\n";
    return 2;
  }
  return 0;
}

int run_evaluate(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  const EvaluateSpec& spec = *cfg.evaluate;
  Checkpoint ckpt = load_checkpoint(resolve_checkpoint(spec.checkpoint, out));
  WaveFunction model = model_from_checkpoint(ckpt);
  HamiltonianFamily family = make_family(ckpt.family, ckpt.extent);

  CouplingDistribution dist = spec.distribution ? *spec.distribution : cfg.distribution;
  if (dist.kind == DistributionKind::PerSiteUniform) {
    dist.n_sites = family.lattice().size();
    dist.labels = family.coupling_labels();
  }
  auto gammas = sample_couplings(dist, cfg.seed);
  for (auto& g : gammas)
    if (g.labels.empty()) g.labels = family.coupling_labels();

  LogAmplitudeFn log_amp = [&](const SpinConfiguration& s, const CouplingVector& g) {
    return model.log_psi(s, g);
  };

  std::ostringstream table;
  table << "# columns: system_index\tgamma\tobservable\tvalue\tsigma\n";
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    SamplerConfig sampler = spec.sampler;
    sampler.seed = mix_seed(cfg.seed, 0xEA, k);
    auto batches = run_chains(family, {gammas[k]}, sampler, log_amp);
    const SystemBatch& batch = batches[0];
    if (batch.degenerate)
      log << "warning: degenerate sampling (acceptance " << batch.acceptance
          << ") at system " << k << "\n";

    for (const std::string& name : spec.observables) {
      observables::Estimate est;
      if (name == "energy") {
        est = observables::energy(batch, family, gammas[k], log_amp);
      } else if (name == "v_score") {
        est = observables::v_score(batch, family, gammas[k], log_amp);
      } else if (name == "m2_long_range") {
        est = observables::zz_long_range_m2(batch, family.lattice());
      } else if (name == "m2") {
        est = chain_m2(batch, family.lattice());
      } else if (name == "m2_neel" || name == "m2_stripe") {
        auto ops = observables::magnetic_order(batch, family, gammas[k], log_amp);
        est = (name == "m2_neel") ? ops.m2_neel : ops.m2_stripe;
      } else if (name == "d2") {
        est = observables::dimer_order_d2(batch, family.lattice());
      } else {
        throw ConfigError("config: unknown observable '" + name + "'");
      }
      table << k << '\t' << join_values(gammas[k].values) << '\t' << name << '\t'
            << std::setprecision(12) << est.value << '\t' << est.sigma << "\n";
    }
  }
  atomic_write_text(out / "observables.tsv", table.str());
  log << "wrote " << (out / "observables.tsv").string() << "\n";
  return 0;
}

int run_chi_sweep(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  const ChiSweepSpec& spec = *cfg.chi_sweep;
  Checkpoint ckpt = load_checkpoint(resolve_checkpoint(spec.checkpoint, out));
  WaveFunction model = model_from_checkpoint(ckpt);
  HamiltonianFamily family = make_family(ckpt.family, ckpt.extent);

  CouplingDistribution grid = spec.grid;
  auto gammas = sample_couplings(grid, cfg.seed);
  for (auto& g : gammas)
    if (g.labels.empty()) g.labels = family.coupling_labels();

  std::ostringstream table;
  table << "# columns: gamma components..., lambda_max, eigenvector components..., "
           "sigma_stat";
  if (spec.clip) table << ", lambda_display (clipped to [" << spec.clip->first << ", "
                       << spec.clip->second << "])";
  table << "\n";

  for (std::size_t k = 0; k < gammas.size(); ++k) {
    SamplerConfig sampler = spec.sampler;
    sampler.seed = mix_seed(cfg.seed, 0xC4, k);
    auto est = fidelity::chi(model, family, gammas[k], sampler);
    auto lead = fidelity::leading_direction(est.chi);
    table << std::setprecision(12);
    for (double v : gammas[k].values) table << v << '\t';
    table << lead.eigenvalue << '\t';
    if (lead.degenerate) {
      for (Eigen::Index i = 0; i < lead.eigenvector.size(); ++i) table << "degenerate\t";
    } else {
      for (Eigen::Index i = 0; i < lead.eigenvector.size(); ++i)
        table << lead.eigenvector(i) << '\t';
    }
    table << est.lambda_sigma;
    if (spec.clip)
      table << '\t'
            << std::clamp(lead.eigenvalue, spec.clip->first, spec.clip->second);
    table << "\n";
  }
  atomic_write_text(out / "chi_sweep.tsv", table.str());
  log << "wrote " << (out / "chi_sweep.tsv").string() << "\n";
  return 0;
}

int run_oracle(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  HamiltonianFamily family = cfg.build_family();
  OracleSpec spec = cfg.oracle ? *cfg.oracle : OracleSpec{};
  CouplingDistribution dist = spec.distribution ? *spec.distribution : cfg.distribution;
  if (dist.kind == DistributionKind::PerSiteUniform) {
    dist.n_sites = family.lattice().size();
    dist.labels = family.coupling_labels();
  }
  auto gammas = sample_couplings(dist, cfg.seed);
  for (auto& g : gammas)
    if (g.labels.empty()) g.labels = family.coupling_labels();

  std::ostringstream table;
  table << "# columns: system_index\tgamma\tquantity\tvalue\n";
  table << std::setprecision(14);
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    const CouplingVector& g = gammas[k];
    auto emit = [&](const std::string& name, double value) {
      table << k << '\t' << join_values(g.values) << '\t' << name << '\t' << value
            << "\n";
    };
    if (!family.is_heisenberg()) {
      std::vector<double> fields;
      if (family.tag() == Family::TfiChain)
        fields.assign(static_cast<std::size_t>(family.lattice().size()), g.values[0]);
      else
        fields = g.values;
      oracle::FreeFermionSolution ff(fields, family.exchange());
      emit("energy", ff.ground_energy());
      emit("m2", ff.squared_magnetization());
      if (spec.with_correlations)
        for (int r = 1; r <= family.lattice().size() / 2; ++r)
          emit("C(" + std::to_string(r) + ")", ff.correlation(r));
      if (spec.with_chi) {
        Matrix chi = oracle::exact_fidelity_susceptibility(family, g, spec.chi_eps);
        emit("chi", chi(0, 0));
      }
    } else {
      auto sol = oracle::exact_diagonalize(family, g);
      emit("energy", sol.energy);
      if (spec.with_correlations) {
        auto ops = observables::magnetic_order_ed(sol, family.lattice());
        emit("m2_neel", ops.m2_neel);
        emit("m2_stripe", ops.m2_stripe);
        emit("d2", ops.d2);
      }
      if (spec.with_chi) {
        Matrix chi = oracle::exact_fidelity_susceptibility(family, g, spec.chi_eps);
        for (int i = 0; i < chi.rows(); ++i)
          for (int j = 0; j <= i; ++j)
            emit("chi_" + std::to_string(i) + std::to_string(j), chi(i, j));
      }
    }
  }
  atomic_write_text(out / "oracle.tsv", table.str());
  log << "wrote " << (out / "oracle.tsv").string() << "\n";
  return 0;
}

}  // namespace

int run(RunConfig cfg, const RunOptions& options, std::ostream& log) {
  if (options.seed) cfg.seed = *options.seed;
  if (options.output_dir) cfg.output_dir = options.output_dir->string();
  check(options.workers >= 1, "runner: workers must be >= 1");
  check(!cfg.output_dir.empty(), "config: output_dir is required (or pass --out)");
  cfg.validate();

  fs::path out(cfg.output_dir);
  fs::create_directories(out);
  atomic_write_text(out / "config.json", cfg.to_json_text() + "\n");

  switch (cfg.mode) {
    case RunMode::Train:
      return run_train(cfg, out, log);
    case RunMode::Evaluate:
      return run_evaluate(cfg, out, log);
    case RunMode::ChiSweep:
      return run_chi_sweep(cfg, out, log);
    case RunMode::Oracle:
      return run_oracle(cfg, out, log);
  }
  return 1;
}

int run_verify(std::ostream& log, bool quick) {
  int failures = 0;
  auto report = [&](const std::string& name, bool ok, double value) {
    log << (ok ? "PASS" : "FAIL") << "  " << name << "  (discrepancy " << value
        << ")\n";
    if (!ok) ++failures;
  };

  // free-fermion vs dense diagonalization, uniform and random fields
  {
    double worst = 0.0;
    for (int n : {4, 8, quick ? 8 : 10}) {
      for (double h : {0.3, 1.0, 1.7}) {
        HamiltonianFamily fam = make_family("tfi_chain", n);
        CouplingVector g{{h}, {"h/J"}};
        auto ed = oracle::exact_diagonalize(fam, g);
        oracle::FreeFermionSolution ff(
            std::vector<double>(static_cast<std::size_t>(n), h), fam.exchange());
        worst = std::max(worst, std::abs(ed.energy - ff.ground_energy()));
      }
    }
    report("free-fermion vs dense energy (uniform fields)", worst <= 1e-9, worst);
  }
  {
    double worst = 0.0;
    for (uint64_t seed : {11ULL, 12ULL, 13ULL, 14ULL, 15ULL}) {
      int n = 8;
      auto rng = make_engine(seed, 0xFF);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      std::vector<double> fields(static_cast<std::size_t>(n));
      for (auto& f : fields) f = u(rng);
      HamiltonianFamily fam = make_family("random_tfi_chain", n);
      CouplingVector g{fields, fam.coupling_labels()};
      auto ed = oracle::exact_diagonalize(fam, g);
      oracle::FreeFermionSolution ff(fields, fam.exchange());
      worst = std::max(worst, std::abs(ed.energy - ff.ground_energy()));
      // Wick-determinant correlators vs dense diagonal expectations
      for (int r = 1; r < n; ++r) {
        std::vector<double> vals(ed.basis.size());
        for (std::size_t idx = 0; idx < ed.basis.size(); ++idx) {
          uint64_t bits = ed.basis[idx];
          double acc = 0.0;
          for (int i = 0; i < n; ++i) {
            double si = (bits >> i) & 1ULL ? 0.5 : -0.5;
            double sj = (bits >> ((i + r) % n)) & 1ULL ? 0.5 : -0.5;
            acc += si * sj;
          }
          vals[idx] = acc / n;
        }
        double dense = oracle::diagonal_expectation(ed, vals);
        worst = std::max(worst, std::abs(dense - ff.correlation(r)));
      }
    }
    report("free-fermion vs dense (random fields, energy + correlators)",
           worst <= 1e-9, worst);
  }
  // Lanczos vs dense on the same instance
  {
    HamiltonianFamily fam = make_family("tfi_chain", 10);
    CouplingVector g{{0.9}, {"h/J"}};
    auto dense = oracle::exact_diagonalize(fam, g, 1, 7, 1 << 12);
    auto sparse = oracle::exact_diagonalize(fam, g, 1, 7, 16);
    double d = std::abs(dense.energy - sparse.energy);
    report("lanczos vs dense diagonalization", d <= 1e-10, d);
  }
  if (!quick) {
    HamiltonianFamily fam = make_family("tfi_chain", 16);
    CouplingVector g{{1.0}, {"h/J"}};
    auto ed = oracle::exact_diagonalize(fam, g);
    oracle::FreeFermionSolution ff(std::vector<double>(16, 1.0), fam.exchange());
    double d = std::abs(ed.energy - ff.ground_energy());
    report("cross-oracle N=16 critical point", d <= 1e-9, d);
  }
  // finite-difference susceptibility: halving eps changes chi by < 1%
  {
    HamiltonianFamily fam = make_family("tfi_chain", 8);
    CouplingVector g{{0.9}, {"h/J"}};
    double c1 = oracle::exact_fidelity_susceptibility(fam, g, 1e-3)(0, 0);
    double c2 = oracle::exact_fidelity_susceptibility(fam, g, 5e-4)(0, 0);
    double rel = std::abs(c1 - c2) / std::abs(c2);
    report("fidelity susceptibility Richardson consistency", rel < 0.01, rel);
  }
  // Heisenberg: 2x2 plaquette ring energy and Lanczos agreement
  {
    HamiltonianFamily fam = make_family("j1j2_square", 2);
    CouplingVector g{{0.0}, {"J2/J1"}};
    auto dense = oracle::exact_diagonalize(fam, g, 1, 7, 1 << 12);
    auto sparse = oracle::exact_diagonalize(fam, g, 1, 7, 2);
    double d = std::abs(dense.energy - (-2.0)) + std::abs(dense.energy - sparse.energy);
    report("4-site Heisenberg ring energy -2 J1", d <= 1e-9, d);
  }
  log << (failures == 0 ? "verify: all checks passed\n"
                        : "verify: " + std::to_string(failures) + " check(s) failed\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace evmc
