#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "evmc/checkpoint.hpp"
#include "evmc/fidelity.hpp"
#include "evmc/hamiltonian.hpp"
#include "evmc/observables.hpp"
#include "evmc/oracles.hpp"
#include "evmc/run_config.hpp"
#include "evmc/runner.hpp"
#include "evmc/sampler.hpp"
#include "evmc/sr.hpp"
#include "evmc/vit.hpp"

namespace py = pybind11;
using namespace evmc;

namespace {

SpinConfiguration to_sigma(const std::vector<int>& values) {
  SpinConfiguration s;
  s.values.reserve(values.size());
  for (int v : values) {
    if (v != 1 && v != -1) throw ConfigError("spin values must be +1 or -1");
    s.values.push_back(static_cast<int8_t>(v));
  }
  return s;
}

CouplingVector to_gamma(const HamiltonianFamily& family,
                        const std::vector<double>& values) {
  CouplingVector g{values, family.coupling_labels()};
  family.validate_couplings(g);
  return g;
}

ViTConfig config_from_kwargs(int layers, int heads, int embed_dim, int patch,
                             const std::string& embedding,
                             const std::string& symmetrize) {
  ViTConfig cfg;
  cfg.layers = layers;
  cfg.heads = heads;
  cfg.dim = embed_dim;
  cfg.patch = patch;
  if (embedding == "concat")
    cfg.embedding = EmbeddingMode::ConcatScalar;
  else if (embedding == "split")
    cfg.embedding = EmbeddingMode::SplitPatches;
  else
    throw ConfigError("embedding must be 'concat' or 'split'");
  if (symmetrize == "translational")
    cfg.symmetrize = SymmetryMode::Translational;
  else if (symmetrize == "none")
    cfg.symmetrize = SymmetryMode::None;
  else
    throw ConfigError("symmetrize must be 'translational' or 'none'");
  return cfg;
}

SamplerConfig sampler_from_kwargs(int total_samples, int chains, int burnin,
                                  int stride, uint64_t seed) {
  SamplerConfig s;
  s.total_samples = total_samples;
  s.chains_per_system = chains;
  s.burnin_sweeps = burnin;
  s.stride_sweeps = stride;
  s.seed = seed;
  return s;
}

py::list batch_to_python(const std::vector<SystemBatch>& batches) {
  py::list out;
  for (const auto& b : batches) {
    const auto m = static_cast<Eigen::Index>(b.samples.size());
    const auto n = static_cast<Eigen::Index>(b.samples.empty() ? 0 : b.samples[0].size());
    Eigen::MatrixXi sigmas(m, n);
    ComplexVector logpsi(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < n; ++j)
        sigmas(i, j) = b.samples[static_cast<std::size_t>(i)].values[static_cast<std::size_t>(j)];
      logpsi(i) = b.log_psi[static_cast<std::size_t>(i)];
    }
    py::dict d;
    d["sigmas"] = sigmas;
    d["log_psi"] = logpsi;
    d["acceptance"] = b.acceptance;
    d["chain_starts"] = b.chain_starts;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_evmc, m) {
  m.doc() = "ensemble variational Monte Carlo core";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<NumericsError>(m, "NumericsError");

  py::class_<HamiltonianFamily>(m, "Family")
      .def(py::init([](const std::string& tag, int extent) {
             return make_family(tag, extent);
           }),
           py::arg("tag"), py::arg("extent"))
      .def_property_readonly("n_sites",
                             [](const HamiltonianFamily& f) { return f.lattice().size(); })
      .def_property_readonly("n_couplings", &HamiltonianFamily::n_couplings)
      .def_property_readonly("labels", &HamiltonianFamily::coupling_labels)
      .def_property_readonly(
          "tag", [](const HamiltonianFamily& f) {
            return HamiltonianFamily::tag_to_string(f.tag());
          })
      .def("diagonal_element",
           [](const HamiltonianFamily& f, const std::vector<double>& gamma,
              const std::vector<int>& sigma) {
             return f.diagonal_element(to_gamma(f, gamma), to_sigma(sigma));
           })
      .def("connected",
           [](const HamiltonianFamily& f, const std::vector<double>& gamma,
              const std::vector<int>& sigma) {
             auto conn = f.connected_configurations(to_gamma(f, gamma), to_sigma(sigma));
             py::list off;
             for (const auto& [sp, elem] : conn.offdiag) {
               std::vector<int> vals(sp.values.begin(), sp.values.end());
               off.append(py::make_tuple(vals, elem));
             }
             return py::make_tuple(conn.diagonal, off);
           });

  py::class_<WaveFunction>(m, "WaveFunction")
      .def(py::init([](const HamiltonianFamily& family, int layers, int heads,
                       int embed_dim, int patch, const std::string& embedding,
                       const std::string& symmetrize) {
             return WaveFunction(
                 config_from_kwargs(layers, heads, embed_dim, patch, embedding,
                                    symmetrize),
                 family.lattice(), family.n_couplings());
           }),
           py::arg("family"), py::arg("layers") = 2, py::arg("heads") = 4,
           py::arg("embed_dim") = 12, py::arg("patch") = 4,
           py::arg("embedding") = "concat", py::arg("symmetrize") = "translational")
      .def_property_readonly("n_parameters", &WaveFunction::n_parameters)
      .def("init_parameters", &WaveFunction::init_parameters, py::arg("seed") = 0)
      .def("set_parameters", &WaveFunction::set_parameters)
      .def("parameters", &WaveFunction::parameters)
      .def("log_psi",
           [](const WaveFunction& wf, const std::vector<int>& sigma,
              const std::vector<double>& gamma) {
             return wf.log_psi(to_sigma(sigma), CouplingVector{gamma, {}});
           })
      .def("jacobians",
           [](const WaveFunction& wf, const std::vector<std::vector<int>>& sigmas,
              const std::vector<double>& gamma) {
             CouplingVector g{gamma, {}};
             std::vector<SpinConfiguration> spins;
             spins.reserve(sigmas.size());
             for (const auto& s : sigmas) spins.push_back(to_sigma(s));
             std::vector<std::pair<const SpinConfiguration*, const CouplingVector*>>
                 refs;
             for (const auto& s : spins) refs.push_back({&s, &g});
             auto jac = wf.amplitude_jacobians(refs);
             Eigen::MatrixXcd params =
                 jac.params_re.cast<Complex>() + Complex(0, 1) * jac.params_im.cast<Complex>();
             Eigen::MatrixXcd coup =
                 jac.coup_re.cast<Complex>() + Complex(0, 1) * jac.coup_im.cast<Complex>();
             return py::make_tuple(jac.log_psi, params, coup);
           });

  m.def(
      "sample",
      [](const WaveFunction& model, const HamiltonianFamily& family,
         const std::vector<std::vector<double>>& gammas, int total_samples,
         int chains, int burnin, int stride, uint64_t seed) {
        std::vector<CouplingVector> ensemble;
        for (const auto& g : gammas) ensemble.push_back(to_gamma(family, g));
        auto batches = run_chains(
            family, ensemble, sampler_from_kwargs(total_samples, chains, burnin, stride, seed),
            [&](const SpinConfiguration& s, const CouplingVector& g) {
              return model.log_psi(s, g);
            });
        return batch_to_python(batches);
      },
      py::arg("model"), py::arg("family"), py::arg("gammas"),
      py::arg("total_samples") = 1024, py::arg("chains") = 8,
      py::arg("burnin") = 100, py::arg("stride") = 1, py::arg("seed") = 1);

  m.def(
      "local_energy",
      [](const WaveFunction& model, const HamiltonianFamily& family,
         const std::vector<double>& gamma, const std::vector<int>& sigma) {
        CouplingVector g = to_gamma(family, gamma);
        return local_energy(family, g, to_sigma(sigma),
                            [&](const SpinConfiguration& s) {
                              return model.log_psi(s, g);
                            });
      },
      py::arg("model"), py::arg("family"), py::arg("gamma"), py::arg("sigma"));

  m.def(
      "optimize",
      [](WaveFunction& model, const HamiltonianFamily& family,
         const std::vector<std::vector<double>>& gammas, int steps, double eta,
         double lambda, int total_samples, int chains, int burnin, int stride,
         uint64_t seed, const std::string& solver) {
        std::vector<CouplingVector> ensemble;
        for (const auto& g : gammas) ensemble.push_back(to_gamma(family, g));
        SRConfig sr;
        sr.steps = steps;
        sr.learning_rate = eta;
        sr.diag_shift = lambda;
        if (solver == "auto")
          sr.solver = SolverMode::Auto;
        else if (solver == "direct")
          sr.solver = SolverMode::Direct;
        else if (solver == "kernel")
          sr.solver = SolverMode::Kernel;
        else
          throw ConfigError("solver must be auto, direct or kernel");
        auto result = optimize(model, family, ensemble, sr,
                               sampler_from_kwargs(total_samples, chains, burnin,
                                                   stride, seed));
        py::list records;
        for (const auto& r : result.records) {
          py::dict d;
          d["step"] = r.step;
          d["energy"] = r.energy_mean;
          d["energy_var"] = r.energy_var;
          d["acceptance"] = r.acceptance;
          d["loss"] = r.loss;
          d["dtheta_norm"] = r.dtheta_norm;
          records.append(d);
        }
        py::dict out;
        out["records"] = records;
        out["aborted"] = result.aborted;
        return out;
      },
      py::arg("model"), py::arg("family"), py::arg("gammas"), py::arg("steps") = 100,
      py::arg("eta") = 0.03, py::arg("lambda") = 1e-4,
      py::arg("total_samples") = 1024, py::arg("chains") = 8, py::arg("burnin") = 100,
      py::arg("stride") = 1, py::arg("seed") = 1, py::arg("solver") = "auto");

  m.def(
      "measure_energy",
      [](const WaveFunction& model, const HamiltonianFamily& family,
         const std::vector<double>& gamma, int total_samples, int chains, int burnin,
         int stride, uint64_t seed) {
        CouplingVector g = to_gamma(family, gamma);
        LogAmplitudeFn log_amp = [&](const SpinConfiguration& s, const CouplingVector& gg) {
          return model.log_psi(s, gg);
        };
        auto batches = run_chains(family, {g},
                                  sampler_from_kwargs(total_samples, chains, burnin,
                                                      stride, seed),
                                  log_amp);
        auto est = observables::energy(batches[0], family, g, log_amp);
        return py::make_tuple(est.value, est.sigma);
      },
      py::arg("model"), py::arg("family"), py::arg("gamma"),
      py::arg("total_samples") = 1024, py::arg("chains") = 8, py::arg("burnin") = 100,
      py::arg("stride") = 1, py::arg("seed") = 1);

  m.def(
      "chi",
      [](const WaveFunction& model, const HamiltonianFamily& family,
         const std::vector<double>& gamma, int total_samples, int chains, int burnin,
         int stride, uint64_t seed) {
        auto est = fidelity::chi(model, family, to_gamma(family, gamma),
                                 sampler_from_kwargs(total_samples, chains, burnin,
                                                     stride, seed));
        return py::make_tuple(est.chi, est.lambda_sigma);
      },
      py::arg("model"), py::arg("family"), py::arg("gamma"),
      py::arg("total_samples") = 1024, py::arg("chains") = 8, py::arg("burnin") = 100,
      py::arg("stride") = 1, py::arg("seed") = 1);

  m.def("leading_direction", [](const Matrix& chi) {
    auto lead = fidelity::leading_direction(chi);
    return py::make_tuple(lead.eigenvalue, lead.eigenvector, lead.degenerate);
  });

  m.def(
      "collapse_fit",
      [](const std::vector<std::tuple<double, std::vector<double>, std::vector<double>>>&
             curves,
         const std::vector<double>& hc_grid, const std::vector<double>& nu_grid,
         double window) {
        std::vector<fidelity::SizedCurve> cs;
        for (const auto& [size, h, chi] : curves) cs.push_back({size, h, chi});
        auto fit = fidelity::collapse_fit(cs, hc_grid, nu_grid, window);
        return py::make_tuple(fit.critical, fit.exponent, fit.quality);
      },
      py::arg("curves"), py::arg("hc_grid"), py::arg("nu_grid"),
      py::arg("window") = 0.3);

  m.def("tfi_chain_exact", [](const std::vector<double>& fields, double coupling) {
    oracle::FreeFermionSolution ff(fields, coupling);
    py::dict d;
    d["energy"] = ff.ground_energy();
    d["m2"] = ff.squared_magnetization();
    std::vector<double> corr;
    for (int r = 0; r < ff.size(); ++r) corr.push_back(ff.correlation(r));
    d["correlation"] = corr;
    d["spectrum"] = ff.spectrum();
    return d;
  });

  m.def(
      "exact_diagonalize",
      [](const HamiltonianFamily& family, const std::vector<double>& gamma) {
        auto sol = oracle::exact_diagonalize(family, to_gamma(family, gamma));
        py::dict d;
        d["energy"] = sol.energy;
        d["excited"] = sol.excited;
        d["residual"] = sol.residual;
        return d;
      },
      py::arg("family"), py::arg("gamma"));

  m.def(
      "exact_chi",
      [](const HamiltonianFamily& family, const std::vector<double>& gamma, double eps) {
        return oracle::exact_fidelity_susceptibility(family, to_gamma(family, gamma), eps);
      },
      py::arg("family"), py::arg("gamma"), py::arg("eps") = 1e-3);

  m.def("save_checkpoint",
        [](const std::string& path, const WaveFunction& model,
           const std::string& family_tag, int extent, int step, uint64_t seed) {
          Checkpoint ckpt;
          ckpt.family = family_tag;
          ckpt.extent = extent;
          ckpt.n_couplings = model.n_couplings();
          ckpt.model = model.config();
          ckpt.step = step;
          ckpt.seed = seed;
          ckpt.theta = model.parameters();
          save_checkpoint(path, ckpt);
        },
        py::arg("path"), py::arg("model"), py::arg("family_tag"), py::arg("extent"),
        py::arg("step") = 0, py::arg("seed") = 0);

  m.def("load_checkpoint", [](const std::string& path) {
    Checkpoint ckpt = load_checkpoint(path);
    auto model = std::make_unique<WaveFunction>(model_from_checkpoint(ckpt));
    py::dict meta;
    meta["family"] = ckpt.family;
    meta["extent"] = ckpt.extent;
    meta["step"] = ckpt.step;
    return py::make_tuple(std::move(model), meta);
  });

  m.def(
      "run_config",
      [](const std::string& json_text, const std::string& out_dir) {
        RunConfig cfg = RunConfig::from_json_text(json_text);
        RunOptions opts;
        if (!out_dir.empty()) opts.output_dir = out_dir;
        std::ostringstream log;
        int rc = run(std::move(cfg), opts, log);
        return py::make_tuple(rc, log.str());
      },
      py::arg("json_text"), py::arg("out_dir") = "");

  m.def("verify", [](bool quick) {
    std::ostringstream log;
    int rc = run_verify(log, quick);
    return py::make_tuple(rc == 0, log.str());
  }, py::arg("quick") = true);
}
