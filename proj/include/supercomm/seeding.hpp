#pragma once

#include <algorithm>
#include <numeric>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "supercomm/error.hpp"
#include "supercomm/graph.hpp"

namespace supercomm {

enum class SeedMethod { corehd, degree };

inline std::string_view to_string(SeedMethod m) {
  return m == SeedMethod::corehd ? "corehd" : "degree";
}

inline SeedMethod parse_seed_method(std::string_view s) {
  if (s == "corehd") return SeedMethod::corehd;
  if (s == "degree") return SeedMethod::degree;
  throw Error("unknown seed method '" + std::string(s) + "'");
}

// One CoreHD selection. `from_core` is false for seeds picked by the
// highest-degree fallback after the 2-core has vanished.
struct SeedStep {
  NodeId node;
  std::size_t degree;
  bool from_core;
};

struct SeedSet {
  NodeSet seeds;
  SeedMethod method = SeedMethod::corehd;
  std::size_t requested = 0;
  std::vector<SeedStep> trace;

  std::size_t size() const noexcept { return seeds.size(); }

  std::size_t fallback_count() const {
    return static_cast<std::size_t>(
        std::count_if(trace.begin(), trace.end(), [](const SeedStep& s) { return !s.from_core; }));
  }
};

namespace detail {

inline void check_seed_count(const Graph& g, std::size_t s) {
  if (s < 1) throw Error("at least one seed is required");
  if (s > g.num_nodes()) throw Error("more seeds than nodes");
}

// Nodes sorted by decreasing unweighted degree, ties by lowest index.
inline std::vector<NodeId> nodes_by_degree(const Graph& g) {
  std::vector<NodeId> order(g.num_nodes());
  std::iota(order.begin(), order.end(), NodeId{0});
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    return g.unweighted_degree(a) > g.unweighted_degree(b);
  });
  return order;
}

}  // namespace detail

/// The s highest-degree nodes, ties broken by lowest index.
inline SeedSet degree_seeds(const Graph& g, std::size_t s) {
  detail::check_seed_count(g, s);
  SeedSet out;
  out.method = SeedMethod::degree;
  out.requested = s;
  auto order = detail::nodes_by_degree(g);
  for (std::size_t i = 0; i < s; ++i) {
    out.seeds.push_back(order[i]);
    out.trace.push_back({order[i], g.unweighted_degree(order[i]), false});
  }
  return out;
}

/// CoreHD: repeatedly take the highest-degree node of the current 2-core,
/// remove it and re-peel. Once the 2-core is empty the remaining seeds are
/// the highest-degree unselected nodes of the original graph.
inline SeedSet corehd_seeds(const Graph& g, std::size_t s) {
  detail::check_seed_count(g, s);
  const std::size_t n = g.num_nodes();

  // Degree within the current core; `alive` marks core membership.
  std::vector<std::size_t> deg(n);
  std::vector<char> alive(n, 1);
  for (NodeId i = 0; i < n; ++i) deg[i] = g.unweighted_degree(i);

  // Max-degree first, lowest id on ties.
  auto cmp = [](const std::pair<std::size_t, NodeId>& a, const std::pair<std::size_t, NodeId>& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  };
  std::set<std::pair<std::size_t, NodeId>, decltype(cmp)> queue(cmp);

  std::vector<NodeId> stack;
  auto kill = [&](NodeId u) {
    alive[u] = 0;
    stack.push_back(u);
  };
  auto peel = [&] {
    while (!stack.empty()) {
      const NodeId u = stack.back();
      stack.pop_back();
      for (const Neighbor& nb : g.neighbors(u)) {
        const NodeId v = nb.node;
        if (!alive[v]) continue;
        queue.erase({deg[v], v});
        --deg[v];
        if (deg[v] < 2) {
          kill(v);
        } else {
          queue.insert({deg[v], v});
        }
      }
    }
  };

  for (NodeId i = 0; i < n; ++i) {
    if (deg[i] < 2) kill(i);
  }
  for (NodeId i = 0; i < n; ++i) {
    if (alive[i]) queue.insert({deg[i], i});
  }
  peel();

  SeedSet out;
  out.method = SeedMethod::corehd;
  out.requested = s;
  std::vector<char> selected(n, 0);
  while (out.seeds.size() < s && !queue.empty()) {
    const auto [d, u] = *queue.begin();
    queue.erase(queue.begin());
    out.seeds.push_back(u);
    out.trace.push_back({u, d, true});
    selected[u] = 1;
    kill(u);
    peel();
  }
  if (out.seeds.size() < s) {
    for (NodeId u : detail::nodes_by_degree(g)) {
      if (out.seeds.size() == s) break;
      if (selected[u]) continue;
      selected[u] = 1;
      out.seeds.push_back(u);
      out.trace.push_back({u, g.unweighted_degree(u), false});
    }
  }
  return out;
}

inline SeedSet select_seeds(const Graph& g, std::size_t s, SeedMethod method) {
  return method == SeedMethod::corehd ? corehd_seeds(g, s) : degree_seeds(g, s);
}

}  // namespace supercomm
