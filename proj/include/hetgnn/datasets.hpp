#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hetgnn/graph.hpp"

namespace hetgnn {

// Built-in synthetic datasets:
//  sbm1k  1,000 vertices, 4 planted communities (labels = community), 32 features
//  pl1k   1,000-vertex power-law graph, 16 features, 4 random classes
//  pl10k  10,000-vertex power-law graph, 256 features, 8 random classes
// The power-law presets reuse the topology seed 7 unless `seed` is given.
std::vector<std::string> dataset_names();
Dataset make_dataset(const std::string& name, std::uint64_t seed = 0);

// A built-in name, a binary cache (*.bin) or an edge list path.
Dataset load_dataset(const std::string& spec, std::size_t feat_dim = 32, std::uint64_t seed = 1);

}  // namespace hetgnn
