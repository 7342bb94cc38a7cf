#include "serde.hpp"

namespace evmc::serde {

json vit_config_to_json(const ViTConfig& cfg) {
  return json{{"layers", cfg.layers},
              {"heads", cfg.heads},
              {"embed_dim", cfg.dim},
              {"patch", cfg.patch},
              {"embedding",
               cfg.embedding == EmbeddingMode::ConcatScalar ? "concat" : "split"},
              {"symmetrize",
               cfg.symmetrize == SymmetryMode::Translational ? "translational"
                                                             : "none"}};
}

ViTConfig vit_config_from_json(const json& j, const std::string& path) {
  expect_keys(j, {"layers", "heads", "embed_dim", "patch", "embedding", "symmetrize"},
              path);
  ViTConfig cfg;
  cfg.layers = get_or(j, "layers", path, cfg.layers);
  cfg.heads = get_or(j, "heads", path, cfg.heads);
  cfg.dim = get_or(j, "embed_dim", path, cfg.dim);
  cfg.patch = get_or(j, "patch", path, cfg.patch);
  std::string emb = get_or<std::string>(j, "embedding", path, "concat");
  if (emb == "concat")
    cfg.embedding = EmbeddingMode::ConcatScalar;
  else if (emb == "split")
    cfg.embedding = EmbeddingMode::SplitPatches;
  else
    throw ConfigError("config: '" + path + ".embedding' must be concat or split");
  std::string sym = get_or<std::string>(j, "symmetrize", path, "translational");
  if (sym == "translational")
    cfg.symmetrize = SymmetryMode::Translational;
  else if (sym == "none")
    cfg.symmetrize = SymmetryMode::None;
  else
    throw ConfigError("config: '" + path + ".symmetrize' must be translational or none");
  return cfg;
}

json distribution_to_json(const CouplingDistribution& dist) {
  json j;
  switch (dist.kind) {
    case DistributionKind::Grid:
      j["kind"] = "grid";
      j["label"] = dist.labels[0];
      j["min"] = dist.lo[0];
      j["max"] = dist.hi[0];
      j["count"] = dist.counts[0];
      break;
    case DistributionKind::Grid2D:
      j["kind"] = "grid2d";
      j["labels"] = dist.labels;
      j["min"] = dist.lo;
      j["max"] = dist.hi;
      j["counts"] = dist.counts;
      break;
    case DistributionKind::UniformBox:
      j["kind"] = "uniform_box";
      j["labels"] = dist.labels;
      j["min"] = dist.lo;
      j["max"] = dist.hi;
      j["realizations"] = dist.realizations;
      break;
    case DistributionKind::PerSiteUniform:
      j["kind"] = "per_site_uniform";
      j["h0"] = dist.h0;
      j["realizations"] = dist.realizations;
      break;
    case DistributionKind::AxisUniform:
      j["kind"] = "axis_uniform";
      j["labels"] = dist.labels;
      j["min"] = dist.lo[0];
      j["max"] = dist.hi[0];
      j["realizations"] = dist.realizations;
      break;
    case DistributionKind::ExplicitList: {
      j["kind"] = "explicit";
      json vals = json::array();
      for (const auto& g : dist.explicit_list) vals.push_back(g.values);
      j["values"] = vals;
      if (!dist.explicit_list.empty()) j["labels"] = dist.explicit_list[0].labels;
      break;
    }
  }
  return j;
}

CouplingDistribution distribution_from_json(const json& j, const std::string& path) {
  std::string kind = require<std::string>(j, "kind", path);
  CouplingDistribution dist;
  if (kind == "grid") {
    expect_keys(j, {"kind", "label", "min", "max", "count"}, path);
    dist.kind = DistributionKind::Grid;
    dist.labels = {require<std::string>(j, "label", path)};
    dist.lo = {require<double>(j, "min", path)};
    dist.hi = {require<double>(j, "max", path)};
    dist.counts = {require<int>(j, "count", path)};
  } else if (kind == "grid2d") {
    expect_keys(j, {"kind", "labels", "min", "max", "counts"}, path);
    dist.kind = DistributionKind::Grid2D;
    dist.labels = require<std::vector<std::string>>(j, "labels", path);
    dist.lo = require<std::vector<double>>(j, "min", path);
    dist.hi = require<std::vector<double>>(j, "max", path);
    dist.counts = require<std::vector<int>>(j, "counts", path);
  } else if (kind == "uniform_box") {
    expect_keys(j, {"kind", "labels", "min", "max", "realizations"}, path);
    dist.kind = DistributionKind::UniformBox;
    dist.labels = require<std::vector<std::string>>(j, "labels", path);
    dist.lo = require<std::vector<double>>(j, "min", path);
    dist.hi = require<std::vector<double>>(j, "max", path);
    dist.realizations = require<int>(j, "realizations", path);
  } else if (kind == "per_site_uniform") {
    expect_keys(j, {"kind", "h0", "realizations"}, path);
    dist.kind = DistributionKind::PerSiteUniform;
    dist.h0 = require<double>(j, "h0", path);
    dist.realizations = require<int>(j, "realizations", path);
    // n_sites filled in from the lattice by the caller
  } else if (kind == "axis_uniform") {
    expect_keys(j, {"kind", "labels", "min", "max", "realizations"}, path);
    dist.kind = DistributionKind::AxisUniform;
    dist.labels = require<std::vector<std::string>>(j, "labels", path);
    dist.lo = {require<double>(j, "min", path)};
    dist.hi = {require<double>(j, "max", path)};
    dist.realizations = require<int>(j, "realizations", path);
  } else if (kind == "explicit") {
    expect_keys(j, {"kind", "values", "labels"}, path);
    dist.kind = DistributionKind::ExplicitList;
    auto labels = get_or<std::vector<std::string>>(j, "labels", path, {});
    for (const auto& row : require<std::vector<std::vector<double>>>(j, "values", path))
      dist.explicit_list.push_back({row, labels});
  } else {
    throw ConfigError("config: '" + path + ".kind' has unknown value '" + kind + "'");
  }
  return dist;
}

}  // namespace evmc::serde
