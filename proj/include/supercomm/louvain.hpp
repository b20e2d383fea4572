#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "supercomm/error.hpp"
#include "supercomm/graph.hpp"
#include "supercomm/partition.hpp"
#include "supercomm/rng.hpp"

namespace supercomm {

/// Newman-Girvan modularity with resolution gamma:
///   Q = 1/(2M') sum_{i,j} [a_ij - gamma k_i k_j / (2M')] delta(z_i, z_j)
/// over ordered pairs, with k_i the strength and M' the total edge weight.
inline double modularity(const Graph& g, const Partition& p, double gamma = 1.0) {
  check_partition(g, p);
  if (!(gamma > 0.0)) throw Error("resolution must be positive");
  const double two_m = g.total_strength();
  if (g.num_edges() == 0 || two_m <= 0.0) throw Error("undefined modularity: graph has no edges");
  std::vector<double> tot(p.num_communities(), 0.0);
  double internal = 0.0;  // sum over ordered pairs inside communities
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    tot[p[i]] += g.strength(i);
    for (const Neighbor& nb : g.neighbors(i)) {
      if (p[nb.node] == p[i]) internal += nb.weight;
    }
  }
  double null_term = 0.0;
  for (double t : tot) null_term += t * t;
  return (internal - gamma * null_term / two_m) / two_m;
}

namespace louvain_detail {

// Graph at one aggregation level. Self loops are kept apart from the
// adjacency; `self_loop[i]` is the ordered-pair weight a_ii (twice the
// undirected weight collapsed into i).
struct LevelGraph {
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> nbr;
  std::vector<double> weight;
  std::vector<double> self_loop;
  std::vector<double> strength;
  double two_m = 0.0;

  std::size_t size() const noexcept { return strength.size(); }
};

inline LevelGraph from_graph(const Graph& g) {
  LevelGraph lg;
  const std::size_t n = g.num_nodes();
  lg.offsets.resize(n + 1);
  lg.self_loop.assign(n, 0.0);
  lg.strength.resize(n);
  for (NodeId i = 0; i < n; ++i) {
    lg.offsets[i + 1] = lg.offsets[i] + g.unweighted_degree(i);
    for (const Neighbor& nb : g.neighbors(i)) {
      lg.nbr.push_back(nb.node);
      lg.weight.push_back(nb.weight);
    }
    lg.strength[i] = g.strength(i);
  }
  lg.two_m = g.total_strength();
  return lg;
}

// Collapses each community of `comm` (dense ids 0..k-1) into one node.
inline LevelGraph aggregate(const LevelGraph& lg, const std::vector<std::uint32_t>& comm, std::size_t k) {
  LevelGraph out;
  out.offsets.assign(k + 1, 0);
  out.self_loop.assign(k, 0.0);
  out.strength.assign(k, 0.0);
  out.two_m = lg.two_m;

  std::vector<std::vector<std::uint32_t>> members(k);
  for (std::uint32_t i = 0; i < lg.size(); ++i) members[comm[i]].push_back(i);

  std::vector<double> acc(k, 0.0);
  std::vector<std::uint32_t> touched;
  for (std::uint32_t c = 0; c < k; ++c) {
    for (std::uint32_t i : members[c]) {
      out.strength[c] += lg.strength[i];
      out.self_loop[c] += lg.self_loop[i];
      for (std::size_t e = lg.offsets[i]; e < lg.offsets[i + 1]; ++e) {
        const std::uint32_t d = comm[lg.nbr[e]];
        if (d == c) {
          out.self_loop[c] += lg.weight[e];
          continue;
        }
        if (acc[d] == 0.0) touched.push_back(d);
        acc[d] += lg.weight[e];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (std::uint32_t d : touched) {
      out.nbr.push_back(d);
      out.weight.push_back(acc[d]);
      acc[d] = 0.0;
    }
    touched.clear();
    out.offsets[c + 1] = out.nbr.size();
  }
  return out;
}

// Modularity of a community assignment on a level graph.
inline double level_modularity(const LevelGraph& lg, const std::vector<std::uint32_t>& comm, double gamma) {
  std::vector<double> tot(lg.size(), 0.0);
  double internal = 0.0;
  for (std::uint32_t i = 0; i < lg.size(); ++i) {
    tot[comm[i]] += lg.strength[i];
    internal += lg.self_loop[i];
    for (std::size_t e = lg.offsets[i]; e < lg.offsets[i + 1]; ++e) {
      if (comm[lg.nbr[e]] == comm[i]) internal += lg.weight[e];
    }
  }
  double null_term = 0.0;
  for (double t : tot) null_term += t * t;
  return (internal - gamma * null_term / lg.two_m) / lg.two_m;
}

// Insertion score of a node with strength `k_i` into a community with
// total strength `tot_c` (node excluded) to which it links with weight
// `k_ic`. Differences of scores times 2/(2m) are modularity differences.
inline double insertion_score(double k_ic, double tot_c, double k_i, double gamma, double two_m) {
  return k_ic - gamma * tot_c * k_i / two_m;
}

// Exact change in modularity when node i moves from comm[i] to `target`.
inline double move_delta(const LevelGraph& lg, const std::vector<std::uint32_t>& comm, std::uint32_t i,
                         std::uint32_t target, double gamma) {
  const std::uint32_t from = comm[i];
  if (from == target) return 0.0;
  double k_from = 0.0;
  double k_to = 0.0;
  for (std::size_t e = lg.offsets[i]; e < lg.offsets[i + 1]; ++e) {
    const std::uint32_t d = comm[lg.nbr[e]];
    if (d == from) k_from += lg.weight[e];
    if (d == target) k_to += lg.weight[e];
  }
  double tot_from = 0.0;
  double tot_to = 0.0;
  for (std::uint32_t j = 0; j < lg.size(); ++j) {
    if (j == i) continue;
    if (comm[j] == from) tot_from += lg.strength[j];
    if (comm[j] == target) tot_to += lg.strength[j];
  }
  const double ki = lg.strength[i];
  return 2.0 *
         (insertion_score(k_to, tot_to, ki, gamma, lg.two_m) -
          insertion_score(k_from, tot_from, ki, gamma, lg.two_m)) /
         lg.two_m;
}

struct LocalMoveOutcome {
  std::size_t moves = 0;
  double gain = 0.0;  // total modularity increase
};

// Repeated sweeps of greedy single-node moves. `comm` holds community ids
// in 0..n-1 and is updated in place.
inline LocalMoveOutcome local_moves(const LevelGraph& lg, std::vector<std::uint32_t>& comm, double gamma,
                                    Rng& rng, double tolerance) {
  const std::size_t n = lg.size();
  std::vector<double> tot(n, 0.0);
  for (std::uint32_t i = 0; i < n; ++i) tot[comm[i]] += lg.strength[i];

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  shuffle(order, rng);

  std::vector<double> link(n, 0.0);
  std::vector<char> is_touched(n, 0);
  std::vector<std::uint32_t> touched;

  LocalMoveOutcome outcome;
  while (true) {
    double sweep_gain = 0.0;
    std::size_t sweep_moves = 0;
    for (std::uint32_t i : order) {
      const std::uint32_t current = comm[i];
      const double ki = lg.strength[i];
      for (std::size_t e = lg.offsets[i]; e < lg.offsets[i + 1]; ++e) {
        const std::uint32_t d = comm[lg.nbr[e]];
        if (!is_touched[d]) {
          is_touched[d] = 1;
          touched.push_back(d);
        }
        link[d] += lg.weight[e];
      }
      tot[current] -= ki;
      const double stay = insertion_score(link[current], tot[current], ki, gamma, lg.two_m);
      std::uint32_t best = current;
      double best_score = stay;
      for (std::uint32_t d : touched) {
        if (d == current) continue;
        const double s = insertion_score(link[d], tot[d], ki, gamma, lg.two_m);
        // Keep the current community on ties, otherwise lowest id.
        if (s > best_score || (s == best_score && best != current && d < best)) {
          best = d;
          best_score = s;
        }
      }
      tot[best] += ki;
      if (best != current) {
        comm[i] = best;
        sweep_gain += 2.0 * (best_score - stay) / lg.two_m;
        ++sweep_moves;
      }
      for (std::uint32_t d : touched) {
        link[d] = 0.0;
        is_touched[d] = 0;
      }
      touched.clear();
    }
    outcome.moves += sweep_moves;
    outcome.gain += sweep_gain;
    if (sweep_moves == 0 || sweep_gain < tolerance) break;
  }
  return outcome;
}

// Renumbers ids densely in order of first appearance; returns count.
inline std::size_t densify(std::vector<std::uint32_t>& comm) {
  std::vector<std::uint32_t> remap(comm.size(), UINT32_MAX);
  std::uint32_t next = 0;
  for (auto& c : comm) {
    if (remap[c] == UINT32_MAX) remap[c] = next++;
    c = remap[c];
  }
  return next;
}

}  // namespace louvain_detail

struct LouvainOptions {
  double gamma = 1.0;
  std::uint64_t rng_seed = 0;
  double tolerance = 1e-10;  // per-sweep modularity gain that ends a level
  std::size_t max_levels = 64;
};

struct LouvainResult {
  Partition partition;
  double modularity = 0.0;
  std::vector<double> level_modularity;  // after each aggregation level
};

/// Two-phase Louvain: local moves in a seeded random node order, then
/// aggregation, repeated until a level makes no move.
inline LouvainResult louvain(const Graph& g, const LouvainOptions& opts) {
  if (g.num_edges() == 0) throw Error("undefined modularity: graph has no edges");
  if (!(opts.gamma > 0.0)) throw Error("resolution must be positive");
  using namespace louvain_detail;

  Rng rng(opts.rng_seed);
  LevelGraph level = from_graph(g);
  std::vector<std::uint32_t> node_comm(g.num_nodes());
  std::iota(node_comm.begin(), node_comm.end(), 0u);

  LouvainResult result;
  for (std::size_t depth = 0; depth < opts.max_levels; ++depth) {
    std::vector<std::uint32_t> comm(level.size());
    std::iota(comm.begin(), comm.end(), 0u);
    const auto outcome = local_moves(level, comm, opts.gamma, rng, opts.tolerance);
    if (outcome.moves == 0) break;
    const std::size_t k = densify(comm);
    for (auto& c : node_comm) c = comm[c];
    result.level_modularity.push_back(level_modularity(level, comm, opts.gamma));
    if (k == level.size()) break;
    level = aggregate(level, comm, k);
  }
  result.partition = Partition::from_labels(node_comm);
  result.modularity = modularity(g, result.partition, opts.gamma);
  return result;
}

inline LouvainResult louvain(const Graph& g, double gamma, std::uint64_t rng_seed) {
  LouvainOptions opts;
  opts.gamma = gamma;
  opts.rng_seed = rng_seed;
  return louvain(g, opts);
}

}  // namespace supercomm
