#include "evmc/run_config.hpp"

#include <fstream>

#include "serde.hpp"

namespace evmc {

namespace {

using serde::expect_keys;
using serde::get_or;
using serde::json;
using serde::require;

RunMode mode_from_string(const std::string& s) {
  if (s == "train") return RunMode::Train;
  if (s == "evaluate") return RunMode::Evaluate;
  if (s == "chi-sweep") return RunMode::ChiSweep;
  if (s == "oracle") return RunMode::Oracle;
  throw ConfigError("config: mode must be train, evaluate, chi-sweep or oracle");
}

std::string mode_to_string(RunMode m) {
  switch (m) {
    case RunMode::Train:
      return "train";
    case RunMode::Evaluate:
      return "evaluate";
    case RunMode::ChiSweep:
      return "chi-sweep";
    case RunMode::Oracle:
      return "oracle";
  }
  return "?";
}

SamplerConfig sampler_from_json(const json& j, const std::string& path,
                                const SamplerConfig& defaults) {
  expect_keys(j,
              {"total_samples", "chains_per_system", "burnin_sweeps", "stride_sweeps",
               "acceptance_floor"},
              path);
  SamplerConfig s = defaults;
  s.total_samples = get_or(j, "total_samples", path, s.total_samples);
  s.chains_per_system = get_or(j, "chains_per_system", path, s.chains_per_system);
  s.burnin_sweeps = get_or(j, "burnin_sweeps", path, s.burnin_sweeps);
  s.stride_sweeps = get_or(j, "stride_sweeps", path, s.stride_sweeps);
  s.acceptance_floor = get_or(j, "acceptance_floor", path, s.acceptance_floor);
  return s;
}

json sampler_to_json(const SamplerConfig& s) {
  return json{{"total_samples", s.total_samples},
              {"chains_per_system", s.chains_per_system},
              {"burnin_sweeps", s.burnin_sweeps},
              {"stride_sweeps", s.stride_sweeps},
              {"acceptance_floor", s.acceptance_floor}};
}

SolverMode solver_from_string(const std::string& s) {
  if (s == "auto") return SolverMode::Auto;
  if (s == "direct") return SolverMode::Direct;
  if (s == "kernel") return SolverMode::Kernel;
  throw ConfigError("config: optimizer.solver must be auto, direct or kernel");
}

std::string solver_to_string(SolverMode m) {
  switch (m) {
    case SolverMode::Auto:
      return "auto";
    case SolverMode::Direct:
      return "direct";
    case SolverMode::Kernel:
      return "kernel";
  }
  return "?";
}

}  // namespace

RunConfig RunConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  check(is.good(), "config: cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(is)),
                   std::istreambuf_iterator<char>());
  return from_json_text(text);
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON (") + e.what() + ")");
  }
  expect_keys(j,
              {"mode", "seed", "output_dir", "hamiltonian", "model", "sampler",
               "optimizer", "evaluate", "chi_sweep", "oracle"},
              "");
  RunConfig cfg;
  cfg.mode = mode_from_string(get_or<std::string>(j, "mode", "", "train"));
  cfg.seed = get_or<uint64_t>(j, "seed", "", 1);
  cfg.output_dir = get_or<std::string>(j, "output_dir", "", "");

  const json& ham = j.contains("hamiltonian") ? j.at("hamiltonian") : json::object();
  expect_keys(ham, {"family", "extent", "distribution"}, "hamiltonian");
  cfg.family = get_or<std::string>(ham, "family", "hamiltonian", cfg.family);
  cfg.extent = get_or(ham, "extent", "hamiltonian", cfg.extent);
  if (ham.contains("distribution"))
    cfg.distribution = serde::distribution_from_json(ham.at("distribution"),
                                                     "hamiltonian.distribution");

  if (j.contains("model"))
    cfg.model = serde::vit_config_from_json(j.at("model"), "model");
  else
    cfg.model = ViTConfig{};

  if (j.contains("sampler"))
    cfg.sampler = sampler_from_json(j.at("sampler"), "sampler", SamplerConfig{});

  if (j.contains("optimizer")) {
    const json& opt = j.at("optimizer");
    expect_keys(opt,
                {"learning_rate", "diag_shift", "steps", "solver",
                 "reequilibration_sweeps", "checkpoint_every", "divergence_factor"},
                "optimizer");
    cfg.optimizer.learning_rate =
        get_or(opt, "learning_rate", "optimizer", cfg.optimizer.learning_rate);
    cfg.optimizer.diag_shift =
        get_or(opt, "diag_shift", "optimizer", cfg.optimizer.diag_shift);
    cfg.optimizer.steps = get_or(opt, "steps", "optimizer", cfg.optimizer.steps);
    cfg.optimizer.solver = solver_from_string(
        get_or<std::string>(opt, "solver", "optimizer", "auto"));
    cfg.optimizer.reequilibration_sweeps =
        get_or(opt, "reequilibration_sweeps", "optimizer",
               cfg.optimizer.reequilibration_sweeps);
    cfg.optimizer.divergence_factor = get_or(
        opt, "divergence_factor", "optimizer", cfg.optimizer.divergence_factor);
    cfg.checkpoint_every = get_or(opt, "checkpoint_every", "optimizer",
                                  cfg.checkpoint_every);
  }

  if (j.contains("evaluate")) {
    const json& ev = j.at("evaluate");
    expect_keys(ev, {"checkpoint", "distribution", "observables", "sampler"},
                "evaluate");
    EvaluateSpec spec;
    spec.checkpoint = get_or<std::string>(ev, "checkpoint", "evaluate", "checkpoint.bin");
    if (ev.contains("distribution"))
      spec.distribution =
          serde::distribution_from_json(ev.at("distribution"), "evaluate.distribution");
    spec.observables = get_or<std::vector<std::string>>(ev, "observables", "evaluate",
                                                        spec.observables);
    if (ev.contains("sampler"))
      spec.sampler = sampler_from_json(ev.at("sampler"), "evaluate.sampler",
                                       SamplerConfig{});
    cfg.evaluate = std::move(spec);
  }

  if (j.contains("chi_sweep")) {
    const json& cs = j.at("chi_sweep");
    expect_keys(cs, {"checkpoint", "grid", "sampler", "clip"}, "chi_sweep");
    ChiSweepSpec spec;
    spec.checkpoint = get_or<std::string>(cs, "checkpoint", "chi_sweep", "checkpoint.bin");
    spec.grid = serde::distribution_from_json(
        cs.contains("grid") ? cs.at("grid") : json::object(), "chi_sweep.grid");
    if (cs.contains("sampler"))
      spec.sampler = sampler_from_json(cs.at("sampler"), "chi_sweep.sampler",
                                       SamplerConfig{});
    if (cs.contains("clip")) {
      auto c = require<std::vector<double>>(cs, "clip", "chi_sweep");
      check(c.size() == 2 && c[0] < c[1], "config: chi_sweep.clip must be [lo, hi]");
      spec.clip = {c[0], c[1]};
    }
    cfg.chi_sweep = std::move(spec);
  }

  if (j.contains("oracle")) {
    const json& orc = j.at("oracle");
    expect_keys(orc, {"distribution", "with_correlations", "with_chi", "chi_eps"},
                "oracle");
    OracleSpec spec;
    if (orc.contains("distribution"))
      spec.distribution =
          serde::distribution_from_json(orc.at("distribution"), "oracle.distribution");
    spec.with_correlations =
        get_or(orc, "with_correlations", "oracle", spec.with_correlations);
    spec.with_chi = get_or(orc, "with_chi", "oracle", spec.with_chi);
    spec.chi_eps = get_or(orc, "chi_eps", "oracle", spec.chi_eps);
    cfg.oracle = std::move(spec);
  }

  return cfg;
}

std::string RunConfig::to_json_text() const {
  json j;
  j["mode"] = mode_to_string(mode);
  j["seed"] = seed;
  j["output_dir"] = output_dir;
  j["hamiltonian"] = {{"family", family},
                      {"extent", extent},
                      {"distribution", serde::distribution_to_json(distribution)}};
  j["model"] = serde::vit_config_to_json(model);
  j["sampler"] = sampler_to_json(sampler);
  j["optimizer"] = {{"learning_rate", optimizer.learning_rate},
                    {"diag_shift", optimizer.diag_shift},
                    {"steps", optimizer.steps},
                    {"solver", solver_to_string(optimizer.solver)},
                    {"reequilibration_sweeps", optimizer.reequilibration_sweeps},
                    {"divergence_factor", optimizer.divergence_factor},
                    {"checkpoint_every", checkpoint_every}};
  if (evaluate) {
    j["evaluate"] = {{"checkpoint", evaluate->checkpoint},
                     {"observables", evaluate->observables},
                     {"sampler", sampler_to_json(evaluate->sampler)}};
    if (evaluate->distribution)
      j["evaluate"]["distribution"] = serde::distribution_to_json(*evaluate->distribution);
  }
  if (chi_sweep) {
    j["chi_sweep"] = {{"checkpoint", chi_sweep->checkpoint},
                      {"grid", serde::distribution_to_json(chi_sweep->grid)},
                      {"sampler", sampler_to_json(chi_sweep->sampler)}};
    if (chi_sweep->clip)
      j["chi_sweep"]["clip"] = {chi_sweep->clip->first, chi_sweep->clip->second};
  }
  if (oracle) {
    j["oracle"] = {{"with_correlations", oracle->with_correlations},
                   {"with_chi", oracle->with_chi},
                   {"chi_eps", oracle->chi_eps}};
    if (oracle->distribution)
      j["oracle"]["distribution"] = serde::distribution_to_json(*oracle->distribution);
  }
  return j.dump(2);
}

HamiltonianFamily RunConfig::build_family() const {
  return make_family(family, extent);
}

std::vector<CouplingVector> RunConfig::build_ensemble() const {
  HamiltonianFamily fam = build_family();
  CouplingDistribution dist = distribution;
  if (dist.kind == DistributionKind::PerSiteUniform) {
    dist.n_sites = fam.lattice().size();
    dist.labels = fam.coupling_labels();
  }
  auto ensemble = sample_couplings(dist, seed);
  for (auto& g : ensemble) {
    if (g.labels.empty()) g.labels = fam.coupling_labels();
    fam.validate_couplings(g);
  }
  return ensemble;
}

WaveFunction RunConfig::build_model() const {
  HamiltonianFamily fam = build_family();
  return WaveFunction(model, fam.lattice(), fam.n_couplings());
}

void RunConfig::validate() const {
  HamiltonianFamily fam = build_family();
  model.validate(fam.lattice(), fam.n_couplings());
  if (mode == RunMode::Train) {
    check(distribution.size() > 0,
          "config: hamiltonian.distribution must define at least one system");
    sampler.validate(distribution.kind == DistributionKind::PerSiteUniform ||
                             distribution.kind == DistributionKind::UniformBox ||
                             distribution.kind == DistributionKind::AxisUniform
                         ? distribution.realizations
                         : distribution.size());
    optimizer.validate();
    check(checkpoint_every >= 0, "config: optimizer.checkpoint_every must be >= 0");
  }
  if (mode == RunMode::Evaluate)
    check(evaluate.has_value(), "config: evaluate mode needs an 'evaluate' section");
  if (mode == RunMode::ChiSweep)
    check(chi_sweep.has_value(), "config: chi-sweep mode needs a 'chi_sweep' section");
  if (mode == RunMode::Oracle)
    check(oracle.has_value() || distribution.size() > 0,
          "config: oracle mode needs couplings (oracle section or distribution)");
}

}  // namespace evmc
