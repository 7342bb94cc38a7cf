#include "evmc/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "evmc/hamiltonian.hpp"
#include "serde.hpp"

namespace evmc {

namespace {
constexpr char kMagic[8] = {'E', 'V', 'M', 'C', 'C', 'K', 'P', 'T'};
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  serde::json meta;
  meta["family"] = ckpt.family;
  meta["extent"] = ckpt.extent;
  meta["n_couplings"] = ckpt.n_couplings;
  meta["model"] = serde::vit_config_to_json(ckpt.model);
  meta["step"] = ckpt.step;
  meta["seed"] = ckpt.seed;
  meta["rng_states"] = ckpt.rng_states;
  {
    // segment table documents the flattening order
    WaveFunction wf = model_from_checkpoint_shape(ckpt);
    serde::json segs = serde::json::array();
    for (const auto& s : wf.layout().segments())
      segs.push_back({{"name", s.name}, {"rows", s.rows}, {"cols", s.cols}});
    meta["segments"] = segs;
  }
  std::string meta_str = meta.dump();

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    check(os.good(), "checkpoint: cannot open " + tmp.string() + " for writing");
    os.write(kMagic, sizeof(kMagic));
    uint32_t version = Checkpoint::kVersion;
    os.write(reinterpret_cast<const char*>(&version), sizeof(version));
    uint64_t meta_len = meta_str.size();
    os.write(reinterpret_cast<const char*>(&meta_len), sizeof(meta_len));
    os.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));
    uint64_t p = static_cast<uint64_t>(ckpt.theta.size());
    os.write(reinterpret_cast<const char*>(&p), sizeof(p));
    os.write(reinterpret_cast<const char*>(ckpt.theta.data()),
             static_cast<std::streamsize>(p * sizeof(double)));
    os.flush();
    check(os.good(), "checkpoint: write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  check(is.good(), "checkpoint: cannot open " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is.good() || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ConfigError("checkpoint: " + path.string() + " is not a checkpoint file");
  uint32_t version = 0;
  is.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (!is.good() || version != Checkpoint::kVersion)
    throw ConfigError("checkpoint: version " + std::to_string(version) +
                      " does not match supported version " +
                      std::to_string(Checkpoint::kVersion));
  uint64_t meta_len = 0;
  is.read(reinterpret_cast<char*>(&meta_len), sizeof(meta_len));
  check(is.good() && meta_len < (1ULL << 30), "checkpoint: corrupt metadata length");
  std::string meta_str(meta_len, '\0');
  is.read(meta_str.data(), static_cast<std::streamsize>(meta_len));
  check(is.good(), "checkpoint: truncated metadata");

  serde::json meta;
  try {
    meta = serde::json::parse(meta_str);
  } catch (const serde::json::exception&) {
    throw ConfigError("checkpoint: corrupt metadata JSON");
  }

  Checkpoint ckpt;
  ckpt.family = meta.at("family").get<std::string>();
  ckpt.extent = meta.at("extent").get<int>();
  ckpt.n_couplings = meta.at("n_couplings").get<int>();
  ckpt.model = serde::vit_config_from_json(meta.at("model"), "checkpoint.model");
  ckpt.step = meta.at("step").get<int>();
  ckpt.seed = meta.at("seed").get<uint64_t>();
  ckpt.rng_states = meta.at("rng_states").get<std::vector<std::string>>();

  uint64_t p = 0;
  is.read(reinterpret_cast<char*>(&p), sizeof(p));
  check(is.good() && p < (1ULL << 28), "checkpoint: corrupt parameter count");
  ckpt.theta.resize(static_cast<Eigen::Index>(p));
  is.read(reinterpret_cast<char*>(ckpt.theta.data()),
          static_cast<std::streamsize>(p * sizeof(double)));
  check(is.good(), "checkpoint: truncated parameter block");

  // consistency: the advertised segment table must match the rebuilt model
  WaveFunction wf = model_from_checkpoint(ckpt);
  const auto& segs = meta.at("segments");
  check(segs.size() == wf.layout().segments().size(),
        "checkpoint: segment table does not match the model");
  for (std::size_t i = 0; i < wf.layout().segments().size(); ++i) {
    const auto& s = wf.layout().segments()[i];
    check(segs[i].at("name").get<std::string>() == s.name &&
              segs[i].at("rows").get<int>() == s.rows &&
              segs[i].at("cols").get<int>() == s.cols,
          "checkpoint: segment '" + s.name + "' does not match the model");
  }
  return ckpt;
}

WaveFunction model_from_checkpoint_shape(const Checkpoint& ckpt) {
  HamiltonianFamily family = make_family(ckpt.family, ckpt.extent);
  check(ckpt.n_couplings == family.n_couplings(),
        "checkpoint: coupling count does not match family " + ckpt.family);
  return WaveFunction(ckpt.model, family.lattice(), ckpt.n_couplings);
}

WaveFunction model_from_checkpoint(const Checkpoint& ckpt) {
  WaveFunction wf = model_from_checkpoint_shape(ckpt);
  check(ckpt.theta.size() == wf.n_parameters(),
        "checkpoint: parameter vector length does not match the model");
  wf.set_parameters(ckpt.theta);
  return wf;
}

}  // namespace evmc
