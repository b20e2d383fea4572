#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "supercomm/error.hpp"

namespace supercomm {

using NodeId = std::uint32_t;

// Ordered, duplicate-free list of dense node indices.
using NodeSet = std::vector<NodeId>;

struct Neighbor {
  NodeId node;
  double weight;
};

struct Edge {
  NodeId u;
  NodeId v;
  double weight = 1.0;
};

/// Immutable undirected weighted graph in CSR form.
///
/// Adjacency is symmetric, has no self loops and only strictly positive
/// weights. Every node carries an external label; dense ids are 0..N-1.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph from an arbitrary edge list. Self loops are dropped and
  /// parallel or reciprocal edges merged by summing their weights.
  /// `labels` may be empty, in which case node i is labelled "i".
  static Graph from_edges(std::size_t num_nodes, std::span<const Edge> edges,
                          std::vector<std::string> labels = {}) {
    if (!labels.empty() && labels.size() != num_nodes) {
      throw Error("label count does not match node count");
    }
    std::vector<Edge> canon;
    canon.reserve(edges.size());
    for (const Edge& e : edges) {
      if (e.u >= num_nodes || e.v >= num_nodes) throw std::out_of_range("edge endpoint out of range");
      if (!(e.weight > 0.0)) throw Error("edge weights must be strictly positive");
      if (e.u == e.v) continue;
      canon.push_back({std::min(e.u, e.v), std::max(e.u, e.v), e.weight});
    }
    std::sort(canon.begin(), canon.end(), [](const Edge& a, const Edge& b) {
      return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    std::size_t out = 0;
    for (std::size_t i = 0; i < canon.size(); ++i) {
      if (out > 0 && canon[out - 1].u == canon[i].u && canon[out - 1].v == canon[i].v) {
        canon[out - 1].weight += canon[i].weight;
      } else {
        canon[out++] = canon[i];
      }
    }
    canon.resize(out);

    Graph g;
    g.offsets_.assign(num_nodes + 1, 0);
    for (const Edge& e : canon) {
      ++g.offsets_[e.u + 1];
      ++g.offsets_[e.v + 1];
    }
    for (std::size_t i = 0; i < num_nodes; ++i) g.offsets_[i + 1] += g.offsets_[i];
    g.adj_.resize(2 * canon.size());
    std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    // Edges are sorted by (u, v), so filling in this order leaves every
    // adjacency list sorted by neighbor id.
    for (const Edge& e : canon) g.adj_[cursor[e.u]++] = {e.v, e.weight};
    for (const Edge& e : canon) g.adj_[cursor[e.v]++] = {e.u, e.weight};
    for (NodeId i = 0; i < num_nodes; ++i) {
      auto first = g.adj_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]);
      auto last = g.adj_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i + 1]);
      std::sort(first, last, [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
    }

    g.strength_.assign(num_nodes, 0.0);
    g.unit_weights_ = true;
    for (const Edge& e : canon) {
      g.strength_[e.u] += e.weight;
      g.strength_[e.v] += e.weight;
      g.total_weight_ += e.weight;
      if (e.weight != 1.0) g.unit_weights_ = false;
    }
    g.num_edges_ = canon.size();

    if (labels.empty()) {
      labels.reserve(num_nodes);
      for (std::size_t i = 0; i < num_nodes; ++i) labels.push_back(std::to_string(i));
    }
    g.labels_ = std::move(labels);
    g.index_.reserve(num_nodes);
    for (NodeId i = 0; i < num_nodes; ++i) {
      if (!g.index_.emplace(g.labels_[i], i).second) throw Error("duplicate node label '" + g.labels_[i] + "'");
    }
    return g;
  }

  std::size_t num_nodes() const noexcept { return strength_.size(); }
  std::size_t num_edges() const noexcept { return num_edges_; }

  std::span<const Neighbor> neighbors(NodeId i) const {
    return {adj_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }

  /// Strength k_i = sum_j a_ij.
  double strength(NodeId i) const { return strength_[i]; }
  std::size_t unweighted_degree(NodeId i) const { return offsets_[i + 1] - offsets_[i]; }

  /// Total edge weight M' (sum over unordered pairs).
  double total_weight() const noexcept { return total_weight_; }
  /// Sum of strengths, 2 M'.
  double total_strength() const noexcept { return 2.0 * total_weight_; }

  bool is_unweighted() const noexcept { return unit_weights_; }

  const std::string& label(NodeId i) const { return labels_[i]; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  std::optional<NodeId> find(std::string_view label) const {
    auto it = index_.find(std::string(label));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Each undirected edge once, with u < v, sorted.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(num_edges_);
    for (NodeId u = 0; u < num_nodes(); ++u) {
      for (const Neighbor& nb : neighbors(u)) {
        if (u < nb.node) out.push_back({u, nb.node, nb.weight});
      }
    }
    return out;
  }

  /// Weight of edge (u, v), 0 if absent.
  double edge_weight(NodeId u, NodeId v) const {
    auto nbrs = neighbors(u);
    auto it = std::lower_bound(nbrs.begin(), nbrs.end(), v,
                               [](const Neighbor& a, NodeId x) { return a.node < x; });
    return (it != nbrs.end() && it->node == v) ? it->weight : 0.0;
  }

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> adj_;
  std::vector<double> strength_;
  std::size_t num_edges_ = 0;
  double total_weight_ = 0.0;
  bool unit_weights_ = true;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeId> index_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n\v\f";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    if (i >= s.size()) break;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

/// Parses a SNAP-style edge list: one "u v" or "u v w" per line, '#'
/// comments, arbitrary node tokens remapped densely in first-appearance
/// order. The graph is treated as undirected.
inline Graph parse_edge_list(std::istream& in) {
  std::vector<std::string> labels;
  std::unordered_map<std::string, NodeId> index;
  std::vector<Edge> edges;
  auto intern = [&](std::string_view tok) {
    auto [it, inserted] = index.emplace(std::string(tok), static_cast<NodeId>(labels.size()));
    if (inserted) labels.emplace_back(tok);
    return it->second;
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto tokens = detail::split_ws(body);
    if (tokens.size() < 2) throw ParseError(lineno, "expected at least two tokens");
    if (tokens.size() > 3) throw ParseError(lineno, "expected at most three tokens");
    double w = 1.0;
    if (tokens.size() == 3) {
      auto parsed = detail::parse_double(tokens[2]);
      if (!parsed) throw ParseError(lineno, "non-numeric weight '" + std::string(tokens[2]) + "'");
      if (!(*parsed > 0.0) || *parsed == std::numeric_limits<double>::infinity()) {
        throw ParseError(lineno, "weight must be positive and finite");
      }
      w = *parsed;
    }
    const NodeId u = intern(tokens[0]);
    const NodeId v = intern(tokens[1]);
    edges.push_back({u, v, w});
  }
  if (edges.empty()) throw Error("no edges");
  const std::size_t n = labels.size();
  return Graph::from_edges(n, edges, std::move(labels));
}

inline Graph parse_edge_list(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_edge_list(in);
}

/// Writes one line per undirected edge using external labels. Weights are
/// emitted only for weighted graphs, with round-trip precision.
inline void write_edge_list(const Graph& g, std::ostream& out) {
  const bool weighted = !g.is_unweighted();
  const auto old_precision = out.precision(17);
  for (const Edge& e : g.edges()) {
    out << g.label(e.u) << ' ' << g.label(e.v);
    if (weighted) out << ' ' << e.weight;
    out << '\n';
  }
  out.precision(old_precision);
}

/// Strength of node i.
inline double degree(const Graph& g, NodeId i) {
  if (i >= g.num_nodes()) throw std::out_of_range("node index out of range");
  return g.strength(i);
}

/// Nodes of the k-core (unweighted degree), in increasing index order.
inline NodeSet k_core(const Graph& g, std::size_t k) {
  if (k < 1) throw Error("k must be at least 1");
  const std::size_t n = g.num_nodes();
  std::vector<std::size_t> deg(n);
  std::vector<char> removed(n, 0);
  std::vector<NodeId> stack;
  for (NodeId i = 0; i < n; ++i) {
    deg[i] = g.unweighted_degree(i);
    if (deg[i] < k) {
      removed[i] = 1;
      stack.push_back(i);
    }
  }
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    for (const Neighbor& nb : g.neighbors(u)) {
      if (removed[nb.node]) continue;
      if (--deg[nb.node] < k) {
        removed[nb.node] = 1;
        stack.push_back(nb.node);
      }
    }
  }
  NodeSet core;
  for (NodeId i = 0; i < n; ++i) {
    if (!removed[i]) core.push_back(i);
  }
  return core;
}

/// Reusable breadth-first ball collector. Not thread safe; one per thread.
class BallCollector {
 public:
  explicit BallCollector(const Graph& g) : g_(&g), dist_(g.num_nodes(), kUnseen) {}

  /// Nodes at hop distance 1..order from `source`, in BFS order. The
  /// returned view is valid until the next call.
  std::span<const NodeId> collect(NodeId source, std::size_t order) {
    for (NodeId v : visited_) dist_[v] = kUnseen;
    visited_.clear();
    dist_[source] = 0;
    std::size_t head = 0;
    std::vector<NodeId>& q = visited_;
    q.push_back(source);
    while (head < q.size()) {
      const NodeId u = q[head++];
      if (dist_[u] >= order) continue;
      for (const Neighbor& nb : g_->neighbors(u)) {
        if (dist_[nb.node] != kUnseen) continue;
        dist_[nb.node] = dist_[u] + 1;
        q.push_back(nb.node);
      }
    }
    return std::span<const NodeId>(q).subspan(1);
  }

  /// Distance of `v` in the last collected ball.
  std::size_t distance(NodeId v) const { return dist_[v]; }

  static constexpr std::size_t kUnseen = std::numeric_limits<std::size_t>::max();

 private:
  const Graph* g_;
  std::vector<std::size_t> dist_;
  std::vector<NodeId> visited_;
};

/// All nodes j != i with hop distance <= order, in BFS order.
inline NodeSet neighborhood(const Graph& g, NodeId i, std::size_t order) {
  if (i >= g.num_nodes()) throw std::out_of_range("node index out of range");
  if (order < 1) throw Error("neighborhood order must be at least 1");
  BallCollector ball(g);
  auto span = ball.collect(i, order);
  return NodeSet(span.begin(), span.end());
}

/// Induced subgraph on `nodes` (kept in the given order). Labels are
/// carried over from g.
inline Graph induced_subgraph(const Graph& g, std::span<const NodeId> nodes) {
  constexpr NodeId kAbsent = std::numeric_limits<NodeId>::max();
  std::vector<NodeId> local(g.num_nodes(), kAbsent);
  std::vector<std::string> labels;
  labels.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (local[nodes[i]] != kAbsent) throw Error("duplicate node in subgraph selection");
    local[nodes[i]] = static_cast<NodeId>(i);
    labels.push_back(g.label(nodes[i]));
  }
  std::vector<Edge> edges;
  for (NodeId u : nodes) {
    for (const Neighbor& nb : g.neighbors(u)) {
      if (local[nb.node] != kAbsent && u < nb.node) edges.push_back({local[u], local[nb.node], nb.weight});
    }
  }
  return Graph::from_edges(nodes.size(), edges, std::move(labels));
}

/// Subgraph induced by all nodes of unweighted degree >= 2 together with
/// their first and second neighbors. Original node order is preserved.
inline Graph extract_core_subgraph(const Graph& g) {
  if (g.num_nodes() == 0) throw Error("empty graph");
  const std::size_t n = g.num_nodes();
  std::vector<int> dist(n, -1);
  std::vector<NodeId> frontier;
  for (NodeId i = 0; i < n; ++i) {
    if (g.unweighted_degree(i) >= 2) {
      dist[i] = 0;
      frontier.push_back(i);
    }
  }
  if (frontier.empty()) throw Error("degenerate graph: no node of degree >= 2");
  for (int hop = 1; hop <= 2; ++hop) {
    std::vector<NodeId> next;
    for (NodeId u : frontier) {
      for (const Neighbor& nb : g.neighbors(u)) {
        if (dist[nb.node] < 0) {
          dist[nb.node] = hop;
          next.push_back(nb.node);
        }
      }
    }
    frontier = std::move(next);
  }
  NodeSet keep;
  for (NodeId i = 0; i < n; ++i) {
    if (dist[i] >= 0) keep.push_back(i);
  }
  return induced_subgraph(g, keep);
}

/// Drops edge weights: every present edge gets weight 1.
inline Graph binarize(const Graph& g) {
  auto edges = g.edges();
  for (Edge& e : edges) e.weight = 1.0;
  return Graph::from_edges(g.num_nodes(), edges, g.labels());
}

}  // namespace supercomm
