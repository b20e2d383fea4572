#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "supercomm/error.hpp"
#include "supercomm/graph.hpp"
#include "supercomm/partition.hpp"

namespace supercomm {

/// Normalized mutual information, MI divided by the mean of the two
/// entropies (natural logs). Two single-community partitions score 1; any
/// pair with zero mutual information scores 0.
inline double nmi(const Partition& a, const Partition& b) {
  if (a.size() != b.size()) throw Error("partitions have different lengths");
  const std::size_t n = a.size();
  if (n == 0) throw Error("empty partitions");
  const auto size_a = a.community_sizes();
  const auto size_b = b.community_sizes();
  std::unordered_map<std::uint64_t, std::size_t> joint;
  joint.reserve(std::min(n, size_a.size() * size_b.size()));
  for (std::size_t i = 0; i < n; ++i) {
    ++joint[(static_cast<std::uint64_t>(a[i]) << 32) | b[i]];
  }
  const double total = static_cast<double>(n);
  auto entropy = [&](const std::vector<std::size_t>& sizes) {
    double h = 0.0;
    for (std::size_t s : sizes) {
      if (s == 0) continue;
      const double p = static_cast<double>(s) / total;
      h -= p * std::log(p);
    }
    return h;
  };
  const double ha = entropy(size_a);
  const double hb = entropy(size_b);
  if (ha == 0.0 && hb == 0.0) return 1.0;
  double mi = 0.0;
  for (const auto& [key, count] : joint) {
    const auto ca = static_cast<std::size_t>(key >> 32);
    const auto cb = static_cast<std::size_t>(key & 0xffffffffu);
    const double pij = static_cast<double>(count) / total;
    mi += pij * std::log(static_cast<double>(count) * total /
                         (static_cast<double>(size_a[ca]) * static_cast<double>(size_b[cb])));
  }
  if (mi <= 0.0) return 0.0;
  return std::clamp(mi / ((ha + hb) / 2.0), 0.0, 1.0);
}

/// Midranks (1-based, ties averaged) of a vector of keys.
inline std::vector<double> midranks(const std::vector<double>& keys) {
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return keys[x] < keys[y]; });
  std::vector<double> ranks(keys.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && keys[order[j + 1]] == keys[order[i]]) ++j;
    const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = mid;
    i = j + 1;
  }
  return ranks;
}

/// Ranks nodes by the size of their community (midranks for ties).
inline std::vector<double> community_size_ranking(const Partition& p) {
  const auto sizes = p.community_sizes();
  std::vector<double> key(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) key[i] = static_cast<double>(sizes[p[i]]);
  return midranks(key);
}

/// Kendall's tau-b in O(n log n) (Knight's algorithm).
inline double kendall_tau(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error("kendall_tau: vectors differ in length");
  const std::size_t n = x.size();
  if (n < 2) throw Error("kendall_tau: need at least two observations");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });

  auto tie_pairs = [](std::size_t t) { return static_cast<double>(t) * static_cast<double>(t - 1) / 2.0; };

  double ties_x = 0.0;
  double ties_xy = 0.0;
  {
    std::size_t run_x = 1;
    std::size_t run_xy = 1;
    for (std::size_t i = 1; i < n; ++i) {
      const bool same_x = x[idx[i]] == x[idx[i - 1]];
      const bool same_y = y[idx[i]] == y[idx[i - 1]];
      if (same_x) {
        ++run_x;
        if (same_y) {
          ++run_xy;
        } else {
          ties_xy += tie_pairs(run_xy);
          run_xy = 1;
        }
      } else {
        ties_x += tie_pairs(run_x);
        ties_xy += tie_pairs(run_xy);
        run_x = 1;
        run_xy = 1;
      }
    }
    ties_x += tie_pairs(run_x);
    ties_xy += tie_pairs(run_xy);
  }

  // Merge sort on y counting inversions (discordant pairs).
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];
  std::vector<double> buffer(n);
  double swaps = 0.0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n);
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo;
      std::size_t j = mid;
      std::size_t k = lo;
      while (i < mid && j < hi) {
        if (ys[j] < ys[i]) {
          swaps += static_cast<double>(mid - i);
          buffer[k++] = ys[j++];
        } else {
          buffer[k++] = ys[i++];
        }
      }
      while (i < mid) buffer[k++] = ys[i++];
      while (j < hi) buffer[k++] = ys[j++];
    }
    std::swap(ys, buffer);
  }

  double ties_y = 0.0;
  {
    std::size_t run = 1;
    for (std::size_t i = 1; i < n; ++i) {
      if (ys[i] == ys[i - 1]) {
        ++run;
      } else {
        ties_y += tie_pairs(run);
        run = 1;
      }
    }
    ties_y += tie_pairs(run);
  }

  const double pairs = tie_pairs(n);
  const double denom = (pairs - ties_x) * (pairs - ties_y);
  if (!(denom > 0.0)) throw Error("degenerate ranking: kendall_tau undefined for constant input");
  const double s = pairs - ties_x - ties_y + ties_xy - 2.0 * swaps;
  return std::clamp(s / std::sqrt(denom), -1.0, 1.0);
}

/// Which nodes count as the neighborhood of order o.
enum class NeighborhoodMode {
  within,  // hop distance 1..o
  exact,   // hop distance exactly o
};

inline std::string_view to_string(NeighborhoodMode m) { return m == NeighborhoodMode::within ? "within" : "exact"; }

inline NeighborhoodMode parse_neighborhood_mode(std::string_view s) {
  if (s == "within") return NeighborhoodMode::within;
  if (s == "exact") return NeighborhoodMode::exact;
  throw Error("unknown neighborhood mode '" + std::string(s) + "'");
}

namespace metrics_detail {

// Sparse community histogram of one node's neighborhood.
struct NeighborCounts {
  std::vector<std::pair<CommunityId, std::size_t>> counts;
  std::size_t total = 0;
};

inline NeighborCounts count_neighbors(BallCollector& ball, const Partition& p, NodeId i, std::size_t order,
                                      NeighborhoodMode mode, std::vector<std::size_t>& scratch) {
  NeighborCounts out;
  std::vector<CommunityId> seen;
  for (NodeId j : ball.collect(i, order)) {
    if (mode == NeighborhoodMode::exact && ball.distance(j) != order) continue;
    if (scratch[p[j]]++ == 0) seen.push_back(p[j]);
    ++out.total;
  }
  std::sort(seen.begin(), seen.end());
  for (CommunityId c : seen) {
    out.counts.emplace_back(c, scratch[c]);
    scratch[c] = 0;
  }
  return out;
}

}  // namespace metrics_detail

/// Fraction of node i's order-o neighborhood in each community. All zeros
/// when the neighborhood is empty.
inline std::vector<double> neighbor_community_distribution(const Graph& g, const Partition& p, NodeId i,
                                                           std::size_t order,
                                                           NeighborhoodMode mode = NeighborhoodMode::within) {
  check_partition(g, p);
  if (i >= g.num_nodes()) throw std::out_of_range("node index out of range");
  if (order < 1) throw Error("neighborhood order must be at least 1");
  BallCollector ball(g);
  std::vector<std::size_t> scratch(p.num_communities(), 0);
  const auto nc = metrics_detail::count_neighbors(ball, p, i, order, mode, scratch);
  std::vector<double> dist(p.num_communities(), 0.0);
  for (const auto& [c, count] : nc.counts) {
    dist[c] = static_cast<double>(count) / static_cast<double>(nc.total);
  }
  return dist;
}

/// Area under the ROC curve of `scores` for binary `labels`, with tied
/// scores counted half (Mann-Whitney midrank form).
inline double auc(const std::vector<double>& scores, const std::vector<char>& labels) {
  if (scores.size() != labels.size()) throw Error("auc: scores and labels differ in length");
  const auto ranks = midranks(scores);
  double pos = 0.0;
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i]) {
      pos += 1.0;
      rank_sum += ranks[i];
    }
  }
  const double neg = static_cast<double>(scores.size()) - pos;
  if (pos == 0.0 || neg == 0.0) throw Error("auc: need both positive and negative examples");
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

struct MinAucResult {
  double min_auc = 0.0;
  std::vector<double> per_community;      // NaN for skipped communities
  std::vector<CommunityId> skipped;       // lacking positives or negatives
};

/// For each community, predicts membership from the fraction of each node's
/// neighborhood inside it and scores the prediction by ROC AUC. Returns the
/// smallest AUC over communities that have both members and non-members.
inline MinAucResult min_auc_detailed(const Graph& g, const Partition& p, std::size_t order,
                                     NeighborhoodMode mode = NeighborhoodMode::within) {
  check_partition(g, p);
  if (order < 1) throw Error("neighborhood order must be at least 1");
  const std::size_t n = g.num_nodes();
  const std::size_t k = p.num_communities();
  const auto sizes = p.community_sizes();

  // Nonzero scores grouped by community.
  std::vector<std::vector<std::pair<double, NodeId>>> by_comm(k);
  {
    BallCollector ball(g);
    std::vector<std::size_t> scratch(k, 0);
    for (NodeId i = 0; i < n; ++i) {
      const auto nc = metrics_detail::count_neighbors(ball, p, i, order, mode, scratch);
      for (const auto& [c, count] : nc.counts) {
        by_comm[c].emplace_back(static_cast<double>(count) / static_cast<double>(nc.total), i);
      }
    }
  }

  MinAucResult out;
  out.per_community.assign(k, std::numeric_limits<double>::quiet_NaN());
  out.min_auc = std::numeric_limits<double>::infinity();
  for (CommunityId c = 0; c < k; ++c) {
    const double pos = static_cast<double>(sizes[c]);
    const double neg = static_cast<double>(n) - pos;
    if (pos == 0.0 || neg == 0.0) {
      out.skipped.push_back(c);
      continue;
    }
    auto& entries = by_comm[c];
    std::sort(entries.begin(), entries.end());
    // Zero scores form one tie block below every nonzero score.
    const std::size_t zeros = n - entries.size();
    std::size_t pos_nonzero = 0;
    double rank_sum = 0.0;
    std::size_t i = 0;
    while (i < entries.size()) {
      std::size_t j = i;
      while (j + 1 < entries.size() && entries[j + 1].first == entries[i].first) ++j;
      const double mid = static_cast<double>(zeros) + (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t t = i; t <= j; ++t) {
        if (p[entries[t].second] == c) {
          rank_sum += mid;
          ++pos_nonzero;
        }
      }
      i = j + 1;
    }
    const double pos_zero = pos - static_cast<double>(pos_nonzero);
    rank_sum += pos_zero * (static_cast<double>(zeros) + 1.0) / 2.0;
    const double value = (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
    out.per_community[c] = value;
    out.min_auc = std::min(out.min_auc, value);
  }
  if (out.skipped.size() == k) throw Error("degenerate partition for AUC");
  return out;
}

inline double min_auc(const Graph& g, const Partition& p, std::size_t order,
                      NeighborhoodMode mode = NeighborhoodMode::within) {
  return min_auc_detailed(g, p, order, mode).min_auc;
}

}  // namespace supercomm
