#include "hetgnn/datasets.hpp"

namespace hetgnn {

std::vector<std::string> dataset_names() { return {"sbm1k", "pl1k", "pl10k"}; }

Dataset make_dataset(const std::string& name, std::uint64_t seed) {
  GeneratorParams p;
  Dataset ds;
  if (name == "sbm1k") {
    p.kind = GeneratorKind::kSbm;
    p.blocks = 4;
    p.p_in = 0.05;
    p.p_out = 0.005;
    ds = synthetic_graph(1000, p, 32, 4, seed == 0 ? 1 : seed);
  } else if (name == "pl1k") {
    p.kind = GeneratorKind::kPowerLaw;
    ds = synthetic_graph(1000, p, 16, 4, seed == 0 ? 7 : seed);
  } else if (name == "pl10k") {
    p.kind = GeneratorKind::kPowerLaw;
    ds = synthetic_graph(10000, p, 256, 8, seed == 0 ? 7 : seed);
  } else {
    throw ConfigError("unknown dataset '" + name + "' (built-ins: sbm1k, pl1k, pl10k)");
  }
  ds.name = name;
  return ds;
}

Dataset load_dataset(const std::string& spec, std::size_t feat_dim, std::uint64_t seed) {
  for (const auto& n : dataset_names()) {
    if (n == spec) return make_dataset(spec);
  }
  const std::filesystem::path path(spec);
  if (!std::filesystem::exists(path)) {
    throw ConfigError("dataset '" + spec + "' is neither a built-in nor an existing file");
  }
  if (path.extension() == ".bin") return load_binary(path);
  return load_edge_list(path, feat_dim, seed);
}

}  // namespace hetgnn
