#pragma once

#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "supercomm/error.hpp"
#include "supercomm/graph.hpp"
#include "supercomm/partition.hpp"
#include "supercomm/seeding.hpp"

namespace supercomm {

using SuperNodeId = std::uint32_t;

inline constexpr SuperNodeId kPeriphery = std::numeric_limits<SuperNodeId>::max();
inline constexpr std::size_t kNotAbsorbed = std::numeric_limits<std::size_t>::max();
inline constexpr std::size_t kDefaultMaxOrder = 5;

/// Which super node each original node belongs to.
struct SuperNodeAssignment {
  std::vector<SuperNodeId> assign;      // per node; kPeriphery if unassigned
  std::vector<std::size_t> absorbed_at; // 0 for seeds, kNotAbsorbed for periphery
  std::size_t max_order = 0;
  std::vector<NodeId> seed_of;          // super node -> seed node

  std::size_t num_nodes() const noexcept { return assign.size(); }
  std::size_t num_supernodes() const noexcept { return seed_of.size(); }

  std::size_t periphery_count() const {
    std::size_t c = 0;
    for (SuperNodeId s : assign) c += (s == kPeriphery);
    return c;
  }

  std::vector<std::size_t> member_counts() const {
    std::vector<std::size_t> counts(num_supernodes(), 0);
    for (SuperNodeId s : assign) {
      if (s != kPeriphery) ++counts[s];
    }
    return counts;
  }
};

/// Contracted network over super nodes (no self loops).
struct SuperNodeNetwork {
  Graph graph;
  std::vector<double> internal_weight;    // original weight inside each super node
  std::vector<std::size_t> member_count;  // original nodes per super node
  double periphery_edge_weight = 0.0;     // weight of edges touching the periphery

  double cross_weight() const noexcept { return graph.total_weight(); }

  double total_internal_weight() const {
    double t = 0.0;
    for (double w : internal_weight) t += w;
    return t;
  }
};

/// Grows one super node per seed by synchronized breadth-first rounds.
/// In round o every unassigned node adjacent to an already assigned node is
/// claimed; a node reachable from several super nodes goes to the one it is
/// most strongly connected to (lowest index on ties). Nodes left after
/// `max_order` rounds form the periphery.
inline SuperNodeAssignment grow_supernodes(const Graph& g, const SeedSet& seeds,
                                           std::size_t max_order = kDefaultMaxOrder) {
  if (seeds.seeds.empty()) throw Error("no seeds");
  if (max_order < 1) throw Error("maximum neighborhood order must be at least 1");
  const std::size_t n = g.num_nodes();

  SuperNodeAssignment a;
  a.assign.assign(n, kPeriphery);
  a.absorbed_at.assign(n, kNotAbsorbed);
  a.max_order = max_order;
  a.seed_of = seeds.seeds;

  std::vector<NodeId> frontier;
  for (SuperNodeId s = 0; s < seeds.seeds.size(); ++s) {
    const NodeId v = seeds.seeds[s];
    if (v >= n) throw Error("seed index out of range");
    if (a.assign[v] != kPeriphery) throw Error("duplicate seed");
    a.assign[v] = s;
    a.absorbed_at[v] = 0;
    frontier.push_back(v);
  }

  // Per-candidate scratch: accumulated weight into each super node.
  std::vector<double> link(seeds.seeds.size(), 0.0);
  std::vector<SuperNodeId> touched;
  std::vector<char> queued(n, 0);

  for (std::size_t order = 1; order <= max_order && !frontier.empty(); ++order) {
    std::vector<NodeId> candidates;
    for (NodeId u : frontier) {
      for (const Neighbor& nb : g.neighbors(u)) {
        if (a.assign[nb.node] == kPeriphery && !queued[nb.node]) {
          queued[nb.node] = 1;
          candidates.push_back(nb.node);
        }
      }
    }
    std::sort(candidates.begin(), candidates.end());

    std::vector<SuperNodeId> choice(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const NodeId v = candidates[c];
      for (const Neighbor& nb : g.neighbors(v)) {
        const SuperNodeId s = a.assign[nb.node];
        // Only nodes assigned in earlier rounds count.
        if (s == kPeriphery || a.absorbed_at[nb.node] >= order) continue;
        if (link[s] == 0.0) touched.push_back(s);
        link[s] += nb.weight;
      }
      SuperNodeId best = kPeriphery;
      double best_w = -1.0;
      for (SuperNodeId s : touched) {
        if (link[s] > best_w || (link[s] == best_w && s < best)) {
          best = s;
          best_w = link[s];
        }
      }
      for (SuperNodeId s : touched) link[s] = 0.0;
      touched.clear();
      choice[c] = best;
    }

    for (std::size_t c = 0; c < candidates.size(); ++c) {
      a.assign[candidates[c]] = choice[c];
      a.absorbed_at[candidates[c]] = order;
      queued[candidates[c]] = 0;
    }
    frontier = std::move(candidates);
  }
  return a;
}

inline void check_assignment(const Graph& g, const SuperNodeAssignment& a) {
  if (a.num_nodes() != g.num_nodes()) throw Error("assignment does not match graph size");
  for (SuperNodeId s : a.assign) {
    if (s != kPeriphery && s >= a.num_supernodes()) throw Error("super node index out of range");
  }
}

/// Sums original edge weights between distinct super nodes. Edges inside a
/// super node and edges touching the periphery are tallied separately.
inline SuperNodeNetwork contract(const Graph& g, const SuperNodeAssignment& a) {
  check_assignment(g, a);
  const std::size_t s = a.num_supernodes();
  SuperNodeNetwork net;
  net.internal_weight.assign(s, 0.0);
  net.member_count = a.member_counts();

  std::vector<Edge> cross;
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    for (const Neighbor& nb : g.neighbors(u)) {
      if (nb.node <= u) continue;
      const SuperNodeId su = a.assign[u];
      const SuperNodeId sv = a.assign[nb.node];
      if (su == kPeriphery || sv == kPeriphery) {
        net.periphery_edge_weight += nb.weight;
      } else if (su == sv) {
        net.internal_weight[su] += nb.weight;
      } else {
        cross.push_back({su, sv, nb.weight});
      }
    }
  }
  net.graph = Graph::from_edges(s, cross);
  return net;
}

/// Lifts a partition of the super nodes to the original nodes. All
/// periphery nodes share one extra community.
inline Partition map_partition(const Partition& sp, const SuperNodeAssignment& a) {
  if (sp.size() != a.num_supernodes()) {
    throw Error("super-node partition has " + std::to_string(sp.size()) + " entries, expected " +
                std::to_string(a.num_supernodes()));
  }
  const auto periphery_label = static_cast<CommunityId>(sp.num_communities());
  std::vector<CommunityId> z(a.num_nodes());
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = a.assign[i] == kPeriphery ? periphery_label : sp[a.assign[i]];
  }
  return Partition::from_labels(z);
}

/// Two-column text "external_node_id supernode_index", "P" for periphery.
inline void write_assignment(const Graph& g, const SuperNodeAssignment& a, std::ostream& out) {
  check_assignment(g, a);
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    out << g.label(i) << ' ';
    if (a.assign[i] == kPeriphery) {
      out << 'P';
    } else {
      out << a.assign[i];
    }
    out << '\n';
  }
}

/// Reads the two-column assignment format. `absorbed_at` and `seed_of`
/// cannot be recovered from it; seeds are left empty apart from the count,
/// and orders are marked unknown.
inline SuperNodeAssignment read_assignment(const Graph& g, std::istream& in) {
  SuperNodeAssignment a;
  a.assign.assign(g.num_nodes(), kPeriphery);
  a.absorbed_at.assign(g.num_nodes(), kNotAbsorbed);
  std::vector<char> seen(g.num_nodes(), 0);
  std::size_t max_index = 0;
  bool any = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto tokens = detail::split_ws(body);
    if (tokens.size() != 2) throw ParseError(lineno, "expected 'node supernode'");
    const auto node = g.find(tokens[0]);
    if (!node) throw ParseError(lineno, "unknown node '" + std::string(tokens[0]) + "'");
    if (seen[*node]) throw ParseError(lineno, "node listed twice");
    seen[*node] = 1;
    if (tokens[1] == "P") continue;
    SuperNodeId s = 0;
    auto [ptr, ec] = std::from_chars(tokens[1].data(), tokens[1].data() + tokens[1].size(), s);
    if (ec != std::errc{} || ptr != tokens[1].data() + tokens[1].size() || s == kPeriphery) {
      throw ParseError(lineno, "bad super node index '" + std::string(tokens[1]) + "'");
    }
    a.assign[*node] = s;
    max_index = std::max<std::size_t>(max_index, s);
    any = true;
  }
  for (char c : seen) {
    if (!c) throw Error("assignment file does not cover every node");
  }
  if (!any) throw Error("assignment has no super nodes");
  a.seed_of.assign(max_index + 1, 0);
  std::vector<char> has(max_index + 1, 0);
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    if (a.assign[i] != kPeriphery && !has[a.assign[i]]) {
      has[a.assign[i]] = 1;
      a.seed_of[a.assign[i]] = i;
    }
  }
  for (char c : has) {
    if (!c) throw Error("super node indices are not contiguous");
  }
  return a;
}

}  // namespace supercomm
