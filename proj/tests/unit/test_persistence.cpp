#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "evmc/checkpoint.hpp"
#include "evmc/rng.hpp"
#include "evmc/run_config.hpp"
#include "evmc/run_record.hpp"

using namespace evmc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("evmc_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Checkpoint sample_checkpoint() {
  Checkpoint ckpt;
  ckpt.family = "tfi_chain";
  ckpt.extent = 8;
  ckpt.n_couplings = 1;
  ckpt.model.layers = 1;
  ckpt.model.heads = 2;
  ckpt.model.dim = 8;
  ckpt.model.patch = 4;
  ckpt.step = 17;
  ckpt.seed = 99;
  ckpt.rng_states = {"123 456 0101", "789 12 1010"};
  WaveFunction wf(ckpt.model, Lattice::chain(8), 1);
  ckpt.theta = wf.init_parameters(5);
  return ckpt;
}

}  // namespace

TEST_SUITE("persistence") {

TEST_CASE("checkpoint round-trips bit-exactly") {
  TempDir tmp;
  Checkpoint ckpt = sample_checkpoint();
  fs::path p = tmp.path / "checkpoint.bin";
  save_checkpoint(p, ckpt);
  Checkpoint loaded = load_checkpoint(p);
  CHECK(loaded.family == ckpt.family);
  CHECK(loaded.extent == ckpt.extent);
  CHECK(loaded.step == ckpt.step);
  CHECK(loaded.seed == ckpt.seed);
  CHECK(loaded.rng_states == ckpt.rng_states);
  REQUIRE(loaded.theta.size() == ckpt.theta.size());
  for (Eigen::Index i = 0; i < ckpt.theta.size(); ++i)
    CHECK(std::memcmp(&loaded.theta(i), &ckpt.theta(i), sizeof(double)) == 0);

  // save(load(x)) produces identical bytes
  fs::path p2 = tmp.path / "checkpoint2.bin";
  save_checkpoint(p2, loaded);
  std::ifstream a(p, std::ios::binary), b(p2, std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  CHECK(sa == sb);
}

TEST_CASE("checkpoint version and corruption checks") {
  TempDir tmp;
  Checkpoint ckpt = sample_checkpoint();
  fs::path p = tmp.path / "checkpoint.bin";
  save_checkpoint(p, ckpt);

  SUBCASE("wrong magic") {
    std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.write("NOPE", 4);
    f.close();
    CHECK_THROWS_AS(load_checkpoint(p), ConfigError);
  }
  SUBCASE("version mismatch is a hard error") {
    std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(8);
    uint32_t bad = 999;
    f.write(reinterpret_cast<const char*>(&bad), sizeof(bad));
    f.close();
    CHECK_THROWS_AS(load_checkpoint(p), ConfigError);
  }
  SUBCASE("truncated file never loads") {
    auto size = fs::file_size(p);
    fs::resize_file(p, size - 64);
    CHECK_THROWS_AS(load_checkpoint(p), ConfigError);
  }
  SUBCASE("no partially written checkpoint is left behind") {
    // writes go through a temp file plus rename; the temp must be gone
    for (const auto& entry : fs::directory_iterator(tmp.path))
      CHECK(entry.path().extension() != ".tmp");
  }
}

TEST_CASE("model rebuilt from a checkpoint evaluates identically") {
  TempDir tmp;
  Checkpoint ckpt = sample_checkpoint();
  fs::path p = tmp.path / "m.bin";
  save_checkpoint(p, ckpt);
  WaveFunction a = model_from_checkpoint(ckpt);
  WaveFunction b = model_from_checkpoint(load_checkpoint(p));
  auto rng = make_engine(1, 2);
  auto sigma = random_configuration(8, rng);
  CouplingVector g{{1.0}, {"h/J"}};
  CHECK(a.log_psi(sigma, g) == b.log_psi(sigma, g));
}

TEST_CASE("run records serialize to json lines") {
  RunRecord r;
  r.step = 3;
  r.energy_mean = {-1.5, -2.5};
  r.energy_var = {0.1, 0.2};
  r.acceptance = {0.7, 0.8};
  r.loss = -2.0;
  r.dtheta_norm = 0.05;
  r.wall_ms = 12.5;
  auto line = r.to_json_line();
  auto back = RunRecord::from_json_line(line);
  CHECK(back.step == r.step);
  CHECK(back.energy_mean == r.energy_mean);
  CHECK(back.loss == r.loss);
}

TEST_CASE("config parsing is strict about unknown keys") {
  std::string good = R"({
    "mode": "train",
    "seed": 3,
    "output_dir": "out",
    "hamiltonian": {"family": "tfi_chain", "extent": 16,
      "distribution": {"kind": "grid", "label": "h/J", "min": 0.8, "max": 1.2, "count": 5}},
    "model": {"layers": 2, "heads": 4, "embed_dim": 12, "patch": 4,
      "embedding": "concat", "symmetrize": "translational"},
    "sampler": {"total_samples": 100, "chains_per_system": 4, "burnin_sweeps": 10,
      "stride_sweeps": 1},
    "optimizer": {"learning_rate": 0.03, "diag_shift": 1e-4, "steps": 5,
      "solver": "auto", "checkpoint_every": 2}
  })";
  auto cfg = RunConfig::from_json_text(good);
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.distribution.size() == 5);

  SUBCASE("typo in a section") {
    std::string bad = good;
    bad.replace(bad.find("\"min\""), 5, "\"mim\"");
    CHECK_THROWS_WITH_AS(RunConfig::from_json_text(bad),
                         doctest::Contains("hamiltonian.distribution.mim"), ConfigError);
  }
  SUBCASE("typo at the top level") {
    std::string bad = good;
    bad.replace(bad.find("\"sampler\""), 9, "\"sampleur\"");
    CHECK_THROWS_WITH_AS(RunConfig::from_json_text(bad),
                         doctest::Contains("sampleur"), ConfigError);
  }
  SUBCASE("budget divisibility is validated") {
    std::string bad = good;
    bad.replace(bad.find("\"total_samples\": 100"), 20, "\"total_samples\": 101");
    auto c = RunConfig::from_json_text(bad);
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SUBCASE("config text round-trips") {
    auto c2 = RunConfig::from_json_text(cfg.to_json_text());
    CHECK(c2.to_json_text() == cfg.to_json_text());
  }
}

TEST_CASE("grid distributions return exactly the grid points") {
  CouplingDistribution dist;
  dist.kind = DistributionKind::Grid;
  dist.labels = {"h/J"};
  dist.lo = {0.8};
  dist.hi = {1.2};
  dist.counts = {5};
  auto gs = sample_couplings(dist, 1);
  REQUIRE(gs.size() == 5);
  for (int k = 0; k < 5; ++k)
    CHECK(gs[static_cast<std::size_t>(k)].values[0] ==
          doctest::Approx(0.8 + 0.1 * k).epsilon(1e-14));

  SUBCASE("degenerate grid yields copies") {
    dist.lo = {1.0};
    dist.hi = {1.0};
    dist.counts = {7};
    auto copies = sample_couplings(dist, 1);
    REQUIRE(copies.size() == 7);
    for (const auto& g : copies) CHECK(g.values[0] == 1.0);
  }
}

TEST_CASE("per-site uniform draws are reproducible and within range") {
  CouplingDistribution dist;
  dist.kind = DistributionKind::PerSiteUniform;
  dist.h0 = 1.0;
  dist.n_sites = 64;
  dist.realizations = 200;
  auto a = sample_couplings(dist, 9);
  auto b = sample_couplings(dist, 9);
  REQUIRE(a.size() == 200);
  CHECK(a[13].values == b[13].values);
  double mean = 0.0;
  for (const auto& g : a)
    for (double v : g.values) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      mean += v;
    }
  mean /= 200.0 * 64.0;
  // 3 sigma of the mean of 12800 U[0,1] draws
  CHECK(std::abs(mean - 0.5) < 3.0 * std::sqrt(1.0 / 12.0 / 12800.0));
}

TEST_CASE("empty or invalid distributions are rejected") {
  CouplingDistribution dist;
  dist.kind = DistributionKind::Grid;
  dist.labels = {"h/J"};
  dist.lo = {1.0};
  dist.hi = {1.0};
  dist.counts = {0};
  CHECK_THROWS_AS(sample_couplings(dist, 1), ConfigError);
  dist.kind = DistributionKind::PerSiteUniform;
  dist.realizations = -3;
  CHECK_THROWS_AS(sample_couplings(dist, 1), ConfigError);
}

}  // TEST_SUITE
