#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "supercomm/compression.hpp"
#include "supercomm/error.hpp"
#include "supercomm/graph.hpp"
#include "supercomm/partition.hpp"
#include "supercomm/rng.hpp"

namespace supercomm {

/// Block connection probabilities of a non-degree-corrected SBM.
struct BlockModelParams {
  std::size_t k = 0;
  std::vector<double> pi;  // k x k, row-major, symmetric

  BlockModelParams() = default;
  explicit BlockModelParams(std::size_t blocks) : k(blocks), pi(blocks * blocks, 0.0) {}

  double& operator()(std::size_t a, std::size_t b) { return pi[a * k + b]; }
  double operator()(std::size_t a, std::size_t b) const { return pi[a * k + b]; }
};

/// Count data the Bernoulli SBM is evaluated on. A plain graph has unit
/// node sizes; a contracted network carries each super node's member count
/// and the number of original edges inside it, so that block statistics
/// equal those of the original graph under the lifted partition.
struct SbmData {
  Graph graph;                       // edge weights are edge counts
  std::vector<double> node_size;     // original nodes per vertex
  std::vector<double> inner_edges;   // original edges inside each vertex

  std::size_t num_nodes() const noexcept { return graph.num_nodes(); }

  double total_size() const {
    double t = 0.0;
    for (double s : node_size) t += s;
    return t;
  }

  /// Unordered pairs of original nodes.
  double num_pairs() const {
    const double n = total_size();
    return n * (n - 1.0) / 2.0;
  }
};

inline void require_unweighted(const Graph& g) {
  if (!g.is_unweighted()) throw Error("the Bernoulli block model needs an unweighted graph");
}

inline SbmData sbm_data(const Graph& g) {
  require_unweighted(g);
  SbmData d;
  d.graph = g;
  d.node_size.assign(g.num_nodes(), 1.0);
  d.inner_edges.assign(g.num_nodes(), 0.0);
  return d;
}

/// How a weighted super-node network is turned into SBM input.
enum class SuperNodeSbmMode {
  multiplicity,  // sizes and edge counts of the original graph
  binarize,      // each super node one vertex, edge present iff weight > 0
};

inline std::string_view to_string(SuperNodeSbmMode m) {
  return m == SuperNodeSbmMode::multiplicity ? "multiplicity" : "binarize";
}

inline SuperNodeSbmMode parse_supernode_sbm_mode(std::string_view s) {
  if (s == "multiplicity") return SuperNodeSbmMode::multiplicity;
  if (s == "binarize") return SuperNodeSbmMode::binarize;
  throw Error("unknown super-node SBM mode '" + std::string(s) + "'");
}

inline SbmData sbm_data(const SuperNodeNetwork& net, SuperNodeSbmMode mode) {
  if (mode == SuperNodeSbmMode::binarize) return sbm_data(binarize(net.graph));
  auto integral = [](double w) { return std::abs(w - std::round(w)) < 1e-9; };
  for (const Edge& e : net.graph.edges()) {
    if (!integral(e.weight)) throw Error("multiplicity mode needs an unweighted original graph");
  }
  SbmData d;
  d.graph = net.graph;
  d.node_size.assign(net.member_count.begin(), net.member_count.end());
  d.inner_edges = net.internal_weight;
  for (double w : d.inner_edges) {
    if (!integral(w)) throw Error("multiplicity mode needs an unweighted original graph");
  }
  return d;
}

namespace sbm_detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Profile log-likelihood contribution of a block pair with `e` edges among
// `n` possible pairs: e ln(e/n) + (n-e) ln(1 - e/n), zero when e = 0 or
// e = n.
inline double profile_term(double e, double n) {
  if (e <= 0.0 || e >= n) return 0.0;
  const double p = e / n;
  return e * std::log(p) + (n - e) * std::log1p(-p);
}

// Log-likelihood of a block pair at fixed pi.
inline double fixed_term(double e, double n, double pi) {
  double out = 0.0;
  if (e > 0.0) {
    if (pi <= 0.0) return kNegInf;
    out += e * std::log(pi);
  }
  if (n - e > 0.0) {
    if (pi >= 1.0) return kNegInf;
    out += (n - e) * std::log1p(-pi);
  }
  return out;
}

inline double pair_count(double size_a, double size_b, bool same) {
  return same ? size_a * (size_a - 1.0) / 2.0 : size_a * size_b;
}

inline std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

// Block sizes and sparse block-pair edge counts (diagonal: within).
struct BlockCounts {
  std::size_t k = 0;
  std::vector<double> size;
  std::unordered_map<std::uint64_t, double> edges;

  double e(std::uint32_t a, std::uint32_t b) const {
    auto it = edges.find(pair_key(a, b));
    return it == edges.end() ? 0.0 : it->second;
  }
  double n(std::uint32_t a, std::uint32_t b) const { return pair_count(size[a], size[b], a == b); }
};

inline BlockCounts count_blocks(const SbmData& d, const Partition& p) {
  if (p.size() != d.num_nodes()) throw Error("partition size does not match graph");
  BlockCounts c;
  c.k = p.num_communities();
  c.size.assign(c.k, 0.0);
  for (NodeId i = 0; i < d.num_nodes(); ++i) {
    c.size[p[i]] += d.node_size[i];
    if (d.inner_edges[i] > 0.0) c.edges[pair_key(p[i], p[i])] += d.inner_edges[i];
    for (const Neighbor& nb : d.graph.neighbors(i)) {
      if (nb.node < i) continue;
      c.edges[pair_key(p[i], p[nb.node])] += nb.weight;
    }
  }
  return c;
}

}  // namespace sbm_detail

/// Maximum-likelihood pi for a fixed partition: observed edges over
/// possible pairs per block pair; 0 where no pair exists.
inline BlockModelParams estimate_pi(const SbmData& d, const Partition& p) {
  const auto c = sbm_detail::count_blocks(d, p);
  BlockModelParams params(c.k);
  for (std::uint32_t a = 0; a < c.k; ++a) {
    for (std::uint32_t b = 0; b < c.k; ++b) {
      const double n = c.n(a, b);
      params(a, b) = n > 0.0 ? c.e(a, b) / n : 0.0;
    }
  }
  return params;
}

inline BlockModelParams estimate_pi(const Graph& g, const Partition& p) {
  return estimate_pi(sbm_data(g), p);
}

/// Log-likelihood over unordered node pairs. Returns -infinity when pi
/// assigns probability zero to an observed pair state.
inline double sbm_loglik(const SbmData& d, const Partition& p, const BlockModelParams& params) {
  if (params.k != p.num_communities()) throw Error("parameter block count does not match partition");
  for (std::size_t a = 0; a < params.k; ++a) {
    for (std::size_t b = 0; b < params.k; ++b) {
      const double v = params(a, b);
      if (!(v >= 0.0 && v <= 1.0)) throw Error("block probabilities must lie in [0, 1]");
      if (v != params(b, a)) throw Error("block probability matrix must be symmetric");
    }
  }
  const auto c = sbm_detail::count_blocks(d, p);
  double total = 0.0;
  for (std::uint32_t a = 0; a < c.k; ++a) {
    for (std::uint32_t b = a; b < c.k; ++b) {
      const double t = sbm_detail::fixed_term(c.e(a, b), c.n(a, b), params(a, b));
      if (t == sbm_detail::kNegInf) return t;
      total += t;
    }
  }
  return total;
}

inline double sbm_loglik(const Graph& g, const Partition& p, const BlockModelParams& params) {
  return sbm_loglik(sbm_data(g), p, params);
}

/// Log-likelihood at the maximum-likelihood pi.
inline double profile_loglik(const SbmData& d, const Partition& p) {
  const auto c = sbm_detail::count_blocks(d, p);
  double total = 0.0;
  for (const auto& [key, e] : c.edges) {
    const auto a = static_cast<std::uint32_t>(key >> 32);
    const auto b = static_cast<std::uint32_t>(key & 0xffffffffu);
    total += sbm_detail::profile_term(e, c.n(a, b));
  }
  return total;
}

namespace sbm_detail {

// Mutable block state with incrementally maintained profile log-likelihood.
// Blocks are identified by the index of a vertex they started from; dead
// blocks are empty.
class BlockState {
 public:
  explicit BlockState(const SbmData& d) : d_(&d) {
    const std::size_t n = d.num_nodes();
    block_of_.resize(n);
    size_.resize(n);
    members_.assign(n, 1);
    edges_.resize(n);
    alive_pos_.resize(n);
    for (NodeId i = 0; i < n; ++i) {
      block_of_[i] = i;
      size_[i] = d.node_size[i];
      if (d.inner_edges[i] > 0.0) edges_[i][i] = d.inner_edges[i];
      for (const Neighbor& nb : d.graph.neighbors(i)) {
        edges_[i][nb.node] = nb.weight;
        if (i < nb.node) add_pair(i, nb.node);
      }
      alive_pos_[i] = alive_.size();
      alive_.push_back(i);
    }
    loglik_ = from_scratch();
  }

  std::size_t num_blocks() const noexcept { return alive_.size(); }
  double loglik() const noexcept { return loglik_; }
  std::uint32_t block_of(NodeId v) const { return block_of_[v]; }
  const std::vector<std::uint32_t>& alive() const noexcept { return alive_; }
  const std::vector<std::uint64_t>& connected_pairs() const noexcept { return pairs_; }
  std::size_t members(std::uint32_t b) const { return members_[b]; }

  static std::pair<std::uint32_t, std::uint32_t> unpack(std::uint64_t key) {
    return {static_cast<std::uint32_t>(key >> 32), static_cast<std::uint32_t>(key & 0xffffffffu)};
  }

  // Log-likelihood recomputed from the current block assignment.
  double from_scratch() const {
    std::vector<std::uint32_t> labels(block_of_.begin(), block_of_.end());
    return profile_loglik(*d_, Partition::from_labels(labels));
  }

  double merge_delta(std::uint32_t r, std::uint32_t s) const {
    if (r == s) return 0.0;
    const double sr = size_[r];
    const double ss = size_[s];
    const double merged = sr + ss;
    double before = 0.0;
    double after = 0.0;
    double inner = 0.0;
    for (const auto& [t, e] : edges_[r]) {
      before += profile_term(e, pair_count(sr, size_[t], t == r));
      if (t == r || t == s) inner += e;
    }
    for (const auto& [t, e] : edges_[s]) {
      if (t == r) continue;
      before += profile_term(e, pair_count(ss, size_[t], t == s));
      if (t == s) inner += e;
    }
    for (const auto& [t, e] : edges_[r]) {
      if (t == r || t == s) continue;
      auto it = edges_[s].find(t);
      const double joint = e + (it == edges_[s].end() ? 0.0 : it->second);
      after += profile_term(joint, merged * size_[t]);
    }
    for (const auto& [t, e] : edges_[s]) {
      if (t == r || t == s || edges_[r].count(t)) continue;
      after += profile_term(e, merged * size_[t]);
    }
    after += profile_term(inner, pair_count(merged, merged, true));
    return after - before;
  }

  // Folds block s into block r.
  void merge(std::uint32_t r, std::uint32_t s, std::vector<std::vector<NodeId>>& block_nodes) {
    if (r == s) return;
    loglik_ += merge_delta(r, s);
    double inner_s = 0.0;
    for (const auto& [t, e] : edges_[s]) {
      if (t == s || t == r) {
        inner_s += e;
        continue;
      }
      edges_[t].erase(s);
      edges_[t][r] += e;
      edges_[r][t] += e;
      remove_pair(s, t);
      add_pair(r, t);
    }
    if (edges_[r].count(s)) {
      edges_[r].erase(s);
      remove_pair(r, s);
    }
    if (inner_s > 0.0) edges_[r][r] += inner_s;
    edges_[s].clear();
    size_[r] += size_[s];
    size_[s] = 0.0;
    members_[r] += members_[s];
    members_[s] = 0;
    for (NodeId v : block_nodes[s]) block_of_[v] = r;
    block_nodes[r].insert(block_nodes[r].end(), block_nodes[s].begin(), block_nodes[s].end());
    block_nodes[s].clear();
    kill(s);
  }

  // Change in log-likelihood when vertex v moves to block `target`.
  double move_delta(NodeId v, std::uint32_t target) {
    const std::uint32_t r = block_of_[v];
    const std::uint32_t s = target;
    if (r == s) return 0.0;
    collect_links(v);
    const double sv = d_->node_size[v];
    const double self = d_->inner_edges[v];
    const double sr = size_[r];
    const double ss = size_[s];
    const double kr = link_of(r);
    const double ks = link_of(s);

    double before = 0.0;
    double after = 0.0;
    auto visit_other = [&](std::uint32_t t) {
      const double ert = edge(r, t);
      const double est = edge(s, t);
      const double kt = link_of(t);
      before += profile_term(ert, sr * size_[t]) + profile_term(est, ss * size_[t]);
      after += profile_term(ert - kt, (sr - sv) * size_[t]) + profile_term(est + kt, (ss + sv) * size_[t]);
    };
    for (const auto& [t, e] : edges_[r]) {
      if (t != r && t != s) visit_other(t);
    }
    for (const auto& [t, e] : edges_[s]) {
      if (t != r && t != s && !edges_[r].count(t)) visit_other(t);
    }
    const double err = edge(r, r);
    const double ess = edge(s, s);
    const double ers = edge(r, s);
    before += profile_term(err, pair_count(sr, sr, true)) + profile_term(ess, pair_count(ss, ss, true)) +
              profile_term(ers, sr * ss);
    after += profile_term(err - kr - self, pair_count(sr - sv, sr - sv, true)) +
             profile_term(ess + ks + self, pair_count(ss + sv, ss + sv, true)) +
             profile_term(ers - ks + kr, (sr - sv) * (ss + sv));
    clear_links();
    return after - before;
  }

  void move(NodeId v, std::uint32_t target, std::vector<std::vector<NodeId>>& block_nodes) {
    const std::uint32_t r = block_of_[v];
    const std::uint32_t s = target;
    if (r == s) return;
    loglik_ += move_delta(v, s);
    const double self = d_->inner_edges[v];
    // Each incident edge v-u moves from (r, block(u)) to (s, block(u)).
    for (const Neighbor& nb : d_->graph.neighbors(v)) {
      const std::uint32_t t = block_of_[nb.node];
      add_edge(r, t, -nb.weight);
      add_edge(s, t, nb.weight);
    }
    if (self > 0.0) {
      add_edge(r, r, -self);
      add_edge(s, s, self);
    }
    size_[r] -= d_->node_size[v];
    size_[s] += d_->node_size[v];
    --members_[r];
    ++members_[s];
    auto& from = block_nodes[r];
    from.erase(std::find(from.begin(), from.end(), v));
    block_nodes[s].push_back(v);
    block_of_[v] = s;
  }

 private:
  static std::uint64_t key(std::uint32_t a, std::uint32_t b) { return pair_key(a, b); }

  void add_pair(std::uint32_t a, std::uint32_t b) {
    if (a == b) return;
    const auto k = key(a, b);
    if (pair_pos_.count(k)) return;
    pair_pos_[k] = pairs_.size();
    pairs_.push_back(k);
  }

  void remove_pair(std::uint32_t a, std::uint32_t b) {
    if (a == b) return;
    auto it = pair_pos_.find(key(a, b));
    if (it == pair_pos_.end()) return;
    const std::size_t pos = it->second;
    pair_pos_.erase(it);
    if (pos + 1 != pairs_.size()) {
      pairs_[pos] = pairs_.back();
      pair_pos_[pairs_[pos]] = pos;
    }
    pairs_.pop_back();
  }

  void kill(std::uint32_t b) {
    const std::size_t pos = alive_pos_[b];
    alive_[pos] = alive_.back();
    alive_pos_[alive_[pos]] = pos;
    alive_.pop_back();
  }

  double edge(std::uint32_t a, std::uint32_t b) const {
    auto it = edges_[a].find(b);
    return it == edges_[a].end() ? 0.0 : it->second;
  }

  // Adds `w` to the (a, b) block edge count, keeping both orientations and
  // the connected-pair index in sync. Counts are integral, so exact zero
  // marks an absent entry.
  void add_edge(std::uint32_t a, std::uint32_t b, double w) {
    auto bump = [&](std::uint32_t x, std::uint32_t y) {
      double& slot = edges_[x][y];
      slot += w;
      if (std::abs(slot) < 1e-9) edges_[x].erase(y);
    };
    bump(a, b);
    if (a != b) {
      bump(b, a);
      if (edges_[a].count(b)) {
        add_pair(a, b);
      } else {
        remove_pair(a, b);
      }
    }
  }

  void collect_links(NodeId v) {
    for (const Neighbor& nb : d_->graph.neighbors(v)) {
      const std::uint32_t t = block_of_[nb.node];
      links_[t] += nb.weight;
    }
  }

  double link_of(std::uint32_t t) const {
    auto it = links_.find(t);
    return it == links_.end() ? 0.0 : it->second;
  }

  void clear_links() {
    links_.clear();
  }

  const SbmData* d_;
  std::vector<std::uint32_t> block_of_;
  std::vector<double> size_;
  std::vector<std::size_t> members_;
  std::vector<std::unordered_map<std::uint32_t, double>> edges_;
  std::vector<std::uint64_t> pairs_;
  std::unordered_map<std::uint64_t, std::size_t> pair_pos_;
  std::vector<std::uint32_t> alive_;
  std::vector<std::size_t> alive_pos_;
  double loglik_ = 0.0;
  std::unordered_map<std::uint32_t, double> links_;
};

}  // namespace sbm_detail

struct SbmOptions {
  std::size_t k = 1;
  std::uint64_t rng_seed = 0;
  std::size_t sweeps = 10;
  std::size_t stall_limit = 10;      // rejected merges before the greedy fallback
  std::size_t move_candidates = 8;   // neighbor blocks sampled per node move
};

struct SbmFit {
  Partition partition;
  double loglik = 0.0;
  std::size_t accepted_merges = 0;   // by the Metropolis rule
  std::size_t fallback_merges = 0;   // by the greedy fallback
  std::size_t node_moves = 0;
};

/// Agglomerative fit: from singleton blocks, random merge proposals
/// (uniform over connected block pairs) accepted by the Metropolis rule on
/// the profile log-likelihood, with the best recent proposal forced after
/// `stall_limit` rejections, until k blocks remain. Then `sweeps` rounds of
/// single-vertex moves that are kept only when the likelihood increases.
inline SbmFit fit_sbm(const SbmData& d, const SbmOptions& opts) {
  const std::size_t n = d.num_nodes();
  if (opts.k == 0) throw Error("number of blocks must be positive");
  if (opts.k > n) throw Error("more blocks than nodes");

  Rng rng(opts.rng_seed);
  sbm_detail::BlockState state(d);
  std::vector<std::vector<NodeId>> block_nodes(n);
  for (NodeId i = 0; i < n; ++i) block_nodes[i] = {i};

  SbmFit fit;
  std::size_t rejections = 0;
  double best_delta = -std::numeric_limits<double>::infinity();
  std::pair<std::uint32_t, std::uint32_t> best_pair{0, 0};
  while (state.num_blocks() > opts.k) {
    std::uint32_t r = 0;
    std::uint32_t s = 0;
    const auto& pairs = state.connected_pairs();
    if (!pairs.empty()) {
      std::tie(r, s) = sbm_detail::BlockState::unpack(pairs[uniform_index(rng, pairs.size())]);
    } else {
      const auto& alive = state.alive();
      const auto i = uniform_index(rng, alive.size());
      auto j = uniform_index(rng, alive.size() - 1);
      if (j >= i) ++j;
      r = alive[i];
      s = alive[j];
    }
    // Keep the block with more vertices as the survivor.
    if (state.members(s) > state.members(r) || (state.members(s) == state.members(r) && s < r)) std::swap(r, s);
    const double delta = state.merge_delta(r, s);
    if (delta >= 0.0 || uniform_real(rng) < std::exp(delta)) {
      state.merge(r, s, block_nodes);
      ++fit.accepted_merges;
    } else {
      if (delta > best_delta) {
        best_delta = delta;
        best_pair = {r, s};
      }
      if (++rejections < opts.stall_limit) continue;
      state.merge(best_pair.first, best_pair.second, block_nodes);
      ++fit.fallback_merges;
    }
    rejections = 0;
    best_delta = -std::numeric_limits<double>::infinity();
  }

  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::vector<std::uint32_t> candidates;
  for (std::size_t sweep = 0; sweep < opts.sweeps && state.num_blocks() > 1; ++sweep) {
    shuffle(order, rng);
    for (NodeId v : order) {
      const std::uint32_t r = state.block_of(v);
      if (state.members(r) == 1) continue;
      candidates.clear();
      const auto nbrs = d.graph.neighbors(v);
      for (std::size_t c = 0; c < opts.move_candidates && !nbrs.empty(); ++c) {
        const std::uint32_t t = state.block_of(nbrs[uniform_index(rng, nbrs.size())].node);
        if (t != r && std::find(candidates.begin(), candidates.end(), t) == candidates.end()) candidates.push_back(t);
      }
      const auto& alive = state.alive();
      const std::uint32_t random_block = alive[uniform_index(rng, alive.size())];
      if (random_block != r && std::find(candidates.begin(), candidates.end(), random_block) == candidates.end()) {
        candidates.push_back(random_block);
      }
      std::uint32_t best = r;
      double best_gain = 0.0;
      for (std::uint32_t t : candidates) {
        const double gain = state.move_delta(v, t);
        if (gain > best_gain + 1e-12) {
          best = t;
          best_gain = gain;
        }
      }
      if (best != r) {
        state.move(v, best, block_nodes);
        ++fit.node_moves;
      }
    }
  }

  std::vector<std::uint32_t> labels(n);
  for (NodeId i = 0; i < n; ++i) labels[i] = state.block_of(i);
  fit.partition = Partition::from_labels(labels);
  fit.loglik = profile_loglik(d, fit.partition);
  return fit;
}

inline SbmFit fit_sbm(const Graph& g, std::size_t k, std::uint64_t rng_seed, std::size_t sweeps = 10) {
  SbmOptions opts;
  opts.k = k;
  opts.rng_seed = rng_seed;
  opts.sweeps = sweeps;
  return fit_sbm(sbm_data(g), opts);
}

/// Per-parameter penalty used for choosing K: half the log of the number of
/// node pairs for each of the K(K+1)/2 free block probabilities.
inline double k_penalty(std::size_t k, double num_pairs) {
  const double params = static_cast<double>(k) * static_cast<double>(k + 1) / 2.0;
  return params * std::log(num_pairs) / 2.0;
}

struct KSelection {
  std::size_t k = 0;
  struct Row {
    std::size_t k;
    double loglik;
    double score;
  };
  std::vector<Row> table;
  SbmFit best_fit;
};

/// Fits every K in [k_min, k_max] and keeps the best penalized profile
/// log-likelihood (lowest K on ties).
inline KSelection select_k_detailed(const SbmData& d, std::size_t k_min, std::size_t k_max, std::uint64_t rng_seed,
                                    std::size_t sweeps = 10) {
  if (k_min < 1 || k_min > k_max) throw Error("invalid K range");
  if (k_max > d.num_nodes()) throw Error("more blocks than nodes");
  const double pairs = std::max(d.num_pairs(), 1.0);
  KSelection out;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = k_min; k <= k_max; ++k) {
    SbmOptions opts;
    opts.k = k;
    opts.rng_seed = rng_seed;
    opts.sweeps = sweeps;
    auto fit = fit_sbm(d, opts);
    const double score = fit.loglik - k_penalty(k, pairs);
    out.table.push_back({k, fit.loglik, score});
    if (score > best) {
      best = score;
      out.k = k;
      out.best_fit = std::move(fit);
    }
  }
  return out;
}

inline std::size_t select_k(const Graph& g, std::size_t k_min, std::size_t k_max, std::uint64_t rng_seed) {
  return select_k_detailed(sbm_data(g), k_min, k_max, rng_seed).k;
}

}  // namespace supercomm
