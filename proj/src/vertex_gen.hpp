#pragma once

#include <cstdint>
#include <vector>

#include "hetgnn/dense.hpp"

namespace hetgnn::detail {

// Features = centroid[label] * signal + N(0, noise^2). signal = 0 gives the
// purely random features used for unlabeled graphs.
DenseMatrix generate_features(const std::vector<std::int32_t>& labels, std::int32_t num_classes,
                              std::size_t feat_dim, double signal, double noise,
                              std::uint64_t seed);

std::vector<std::int32_t> random_labels(std::size_t n, std::int32_t num_classes,
                                        std::uint64_t seed);

}  // namespace hetgnn::detail
