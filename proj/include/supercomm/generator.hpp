#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "supercomm/error.hpp"
#include "supercomm/graph.hpp"
#include "supercomm/partition.hpp"
#include "supercomm/rng.hpp"

namespace supercomm {

struct PlantedGraph {
  Graph graph;
  Partition planted;
};

namespace generator_detail {

// Visits a Bernoulli(p) subset of the indices 0..count-1 by geometric
// skipping, so the cost is proportional to the number of hits.
template <typename Visit>
void bernoulli_indices(std::uint64_t count, double p, Rng& rng, Visit&& visit) {
  if (p <= 0.0 || count == 0) return;
  if (p >= 1.0) {
    for (std::uint64_t i = 0; i < count; ++i) visit(i);
    return;
  }
  const double log_q = std::log1p(-p);
  std::uint64_t i = 0;
  while (true) {
    const double u = uniform_real(rng);
    // 1 - u lies in (0, 1]; log of it is finite.
    const double skip = std::floor(std::log1p(-u) / log_q);
    if (skip >= static_cast<double>(count - i)) return;
    i += static_cast<std::uint64_t>(skip);
    visit(i);
    if (++i >= count) return;
  }
}

}  // namespace generator_detail

/// Planted-partition block model: n nodes in k near-equal groups (the
/// first n mod k groups get one extra node), every unordered pair linked
/// independently with probability p_in inside a group and p_out across.
inline PlantedGraph planted_partition(std::size_t n, std::size_t k, double p_in, double p_out,
                                      std::uint64_t rng_seed) {
  if (k < 1 || n < k) throw Error("planted partition needs n >= k >= 1");
  if (!(p_in >= 0.0 && p_in <= 1.0 && p_out >= 0.0 && p_out <= 1.0)) {
    throw Error("probabilities must lie in [0, 1]");
  }
  if (p_out > p_in) throw Error("planted partition needs p_out <= p_in");

  std::vector<std::size_t> start(k + 1, 0);
  for (std::size_t g = 0; g < k; ++g) start[g + 1] = start[g] + n / k + (g < n % k ? 1 : 0);
  std::vector<CommunityId> labels(n);
  for (std::size_t g = 0; g < k; ++g) {
    for (std::size_t i = start[g]; i < start[g + 1]; ++i) labels[i] = static_cast<CommunityId>(g);
  }

  Rng rng(rng_seed);
  std::vector<Edge> edges;
  // Within group g: pairs (a, b), a < b, enumerated row by row.
  for (std::size_t g = 0; g < k; ++g) {
    const std::uint64_t size = start[g + 1] - start[g];
    const std::uint64_t pairs = size * (size - 1) / 2;
    std::uint64_t row = 0;
    std::uint64_t row_start = 0;  // linear index of pair (row, row + 1)
    generator_detail::bernoulli_indices(pairs, p_in, rng, [&](std::uint64_t idx) {
      while (idx >= row_start + (size - 1 - row)) {
        row_start += size - 1 - row;
        ++row;
      }
      const std::uint64_t col = row + 1 + (idx - row_start);
      edges.push_back({static_cast<NodeId>(start[g] + row), static_cast<NodeId>(start[g] + col), 1.0});
    });
  }
  // Between groups g < h: a full rectangular block.
  for (std::size_t g = 0; g < k; ++g) {
    for (std::size_t h = g + 1; h < k; ++h) {
      const std::uint64_t rows = start[g + 1] - start[g];
      const std::uint64_t cols = start[h + 1] - start[h];
      generator_detail::bernoulli_indices(rows * cols, p_out, rng, [&](std::uint64_t idx) {
        edges.push_back({static_cast<NodeId>(start[g] + idx / cols), static_cast<NodeId>(start[h] + idx % cols), 1.0});
      });
    }
  }
  return {Graph::from_edges(n, edges), Partition::from_labels(labels)};
}

}  // namespace supercomm
