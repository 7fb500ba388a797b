#pragma once

#include <algorithm>
#include <iterator>
#include <random>
#include <set>
#include <vector>

#include "hetgnn/graph.hpp"
#include "hetgnn/sampler.hpp"

namespace hetgnn {

// Brute-force replay written without the library sampler: uniform k-hop
// expansion with std::sample, counting the bottom frontier once per batch.
inline std::vector<double> replay_counts(const Graph& g, std::vector<VertexId> train, const Fanouts& f, int rounds,
                                         std::size_t batch, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> counts(g.num_vertices(), 0);
  for (int r = 0; r < rounds; ++r) {
    std::shuffle(train.begin(), train.end(), rng);
    for (std::size_t lo = 0; lo < train.size(); lo += batch) {
      std::vector<VertexId> front(train.begin() + static_cast<std::ptrdiff_t>(lo),
                                  train.begin() + static_cast<std::ptrdiff_t>(std::min(train.size(), lo + batch)));
      for (std::size_t l = f.size(); l-- > 0;) {
        std::set<VertexId> next(front.begin(), front.end());
        for (VertexId v : front) {
          std::vector<VertexId> cand;
          for (VertexId u : g.in_neighbors(v)) {
            if (u != v) cand.push_back(u);
          }
          std::vector<VertexId> pick;
          std::sample(cand.begin(), cand.end(), std::back_inserter(pick), f[l], rng);
          next.insert(pick.begin(), pick.end());
        }
        front.assign(next.begin(), next.end());
      }
      for (VertexId v : front) counts[v]++;
    }
  }
  return counts;
}

}  // namespace hetgnn
