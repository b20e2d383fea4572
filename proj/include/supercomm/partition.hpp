#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "supercomm/error.hpp"
#include "supercomm/graph.hpp"

namespace supercomm {

using CommunityId = std::uint32_t;

/// Node-to-community assignment with dense labels 0..K-1.
class Partition {
 public:
  Partition() = default;

  /// Relabels arbitrary community ids densely in first-appearance order.
  template <typename Label>
  static Partition from_labels(std::span<const Label> raw) {
    std::unordered_map<Label, CommunityId> remap;
    std::vector<CommunityId> labels(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      auto [it, inserted] = remap.emplace(raw[i], static_cast<CommunityId>(remap.size()));
      labels[i] = it->second;
    }
    return Partition(std::move(labels), remap.size());
  }

  template <typename Label>
  static Partition from_labels(const std::vector<Label>& raw) {
    return from_labels(std::span<const Label>(raw));
  }

  static Partition singletons(std::size_t n) {
    std::vector<CommunityId> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<CommunityId>(i);
    return Partition(std::move(labels), n);
  }

  static Partition single_community(std::size_t n) {
    return Partition(std::vector<CommunityId>(n, 0), n == 0 ? 0 : 1);
  }

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t num_communities() const noexcept { return k_; }
  CommunityId operator[](std::size_t i) const { return labels_[i]; }
  const std::vector<CommunityId>& labels() const noexcept { return labels_; }

  std::vector<std::size_t> community_sizes() const {
    std::vector<std::size_t> sizes(k_, 0);
    for (CommunityId c : labels_) ++sizes[c];
    return sizes;
  }

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  Partition(std::vector<CommunityId> labels, std::size_t k) : labels_(std::move(labels)), k_(k) {}

  std::vector<CommunityId> labels_;
  std::size_t k_ = 0;
};

inline void check_partition(const Graph& g, const Partition& p) {
  if (p.size() != g.num_nodes()) {
    throw Error("partition covers " + std::to_string(p.size()) + " nodes, graph has " +
                std::to_string(g.num_nodes()));
  }
}

/// Two-column text: "external_node_id community_id".
inline void write_partition(const Graph& g, const Partition& p, std::ostream& out) {
  check_partition(g, p);
  for (NodeId i = 0; i < g.num_nodes(); ++i) out << g.label(i) << ' ' << p[i] << '\n';
}

/// Reads the two-column format back against the labels of g. Community ids
/// are re-densified; every node of g must be listed exactly once.
inline Partition read_partition(const Graph& g, std::istream& in) {
  constexpr std::int64_t kMissing = -1;
  std::vector<std::int64_t> raw(g.num_nodes(), kMissing);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto tokens = detail::split_ws(body);
    if (tokens.size() != 2) throw ParseError(lineno, "expected 'node community'");
    const auto node = g.find(tokens[0]);
    if (!node) throw ParseError(lineno, "unknown node '" + std::string(tokens[0]) + "'");
    std::int64_t c = 0;
    auto [ptr, ec] = std::from_chars(tokens[1].data(), tokens[1].data() + tokens[1].size(), c);
    if (ec != std::errc{} || ptr != tokens[1].data() + tokens[1].size() || c < 0) {
      throw ParseError(lineno, "bad community id '" + std::string(tokens[1]) + "'");
    }
    if (raw[*node] != kMissing) throw ParseError(lineno, "node listed twice");
    raw[*node] = c;
  }
  for (auto c : raw) {
    if (c == kMissing) throw Error("partition file does not cover every node");
  }
  return Partition::from_labels(raw);
}

}  // namespace supercomm
