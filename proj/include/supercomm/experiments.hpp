#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "supercomm/compression.hpp"
#include "supercomm/error.hpp"
#include "supercomm/graph.hpp"
#include "supercomm/louvain.hpp"
#include "supercomm/metrics.hpp"
#include "supercomm/parallel.hpp"
#include "supercomm/partition.hpp"
#include "supercomm/rng.hpp"
#include "supercomm/sbm.hpp"

namespace supercomm {

/// A network view community detection can run on. Partitions found on it
/// are lifted back to the original nodes.
struct Representation {
  std::string name;
  Graph graph;
  std::optional<SbmData> sbm;  // absent when the block model cannot run on this input
  std::string sbm_error;
  std::optional<SuperNodeAssignment> assignment;

  static Representation full(const Graph& g) {
    Representation r;
    r.name = "full";
    r.graph = g;
    r.set_sbm([&] { return sbm_data(g); });
    return r;
  }

  static Representation supernode(const SuperNodeNetwork& net, const SuperNodeAssignment& a,
                                  SuperNodeSbmMode mode = SuperNodeSbmMode::multiplicity) {
    Representation r;
    r.name = "supernode";
    r.graph = net.graph;
    r.set_sbm([&] { return sbm_data(net, mode); });
    r.assignment = a;
    return r;
  }

  const SbmData& sbm_input() const {
    if (!sbm) throw Error(sbm_error);
    return *sbm;
  }

  // Louvain legs still run when the block-model input is unavailable.
  template <typename Make>
  void set_sbm(Make&& make) {
    try {
      sbm = make();
    } catch (const Error& e) {
      sbm_error = e.what();
    }
  }

  std::size_t original_size() const { return assignment ? assignment->num_nodes() : graph.num_nodes(); }

  Partition lift(const Partition& p) const { return assignment ? map_partition(p, *assignment) : p; }
};

struct Detection {
  Partition partition;  // over the original nodes
  double objective = 0.0;
};

inline Detection detect_louvain(const Representation& rep, double gamma, std::uint64_t rng_seed) {
  auto r = louvain(rep.graph, gamma, rng_seed);
  return {rep.lift(r.partition), r.modularity};
}

inline Detection detect_sbm(const Representation& rep, std::size_t k, std::uint64_t rng_seed, std::size_t sweeps) {
  SbmOptions opts;
  opts.k = k;
  opts.rng_seed = rng_seed;
  opts.sweeps = sweeps;
  auto fit = fit_sbm(rep.sbm_input(), opts);
  return {rep.lift(fit.partition), fit.loglik};
}

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr() const { return q3 - q1; }
};

// Linearly interpolated quantile of sorted data.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline Summary summarize(std::vector<double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) {
    s.mean = s.median = s.q1 = s.q3 = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  std::sort(values.begin(), values.end());
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(values.size());
  s.median = quantile_sorted(values, 0.5);
  s.q1 = quantile_sorted(values, 0.25);
  s.q3 = quantile_sorted(values, 0.75);
  return s;
}

/// 50 log-spaced resolutions in [0.05, 2.5].
inline std::vector<double> default_gamma_grid(std::size_t points = 50, double lo = 0.05, double hi = 2.5) {
  if (points == 0) throw Error("empty resolution grid");
  if (points == 1) return {lo};
  std::vector<double> grid(points);
  const double step = std::log(hi / lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = lo * std::exp(step * static_cast<double>(i));
  grid.back() = hi;
  return grid;
}

struct ResolutionRow {
  double gamma;
  double tau;  // NaN when the ranking comparison is undefined
  std::size_t communities;
};

struct ResolutionMatch {
  double gamma_star = 0.0;
  double tau_star = std::numeric_limits<double>::quiet_NaN();
  bool matched_by_count = false;  // target ranking was constant
  std::vector<ResolutionRow> table;
};

/// Sweeps Louvain over `gammas` and picks the resolution whose partition
/// ranks nodes by community size most like `target` (Kendall tau-b; lowest
/// gamma on ties). A target whose size ranking is constant makes tau
/// undefined everywhere; the closest community count is used instead.
inline ResolutionMatch match_resolution(const Graph& g, const Partition& target, const std::vector<double>& gammas,
                                        std::uint64_t rng_seed, std::size_t jobs = 1) {
  check_partition(g, target);
  if (gammas.empty()) throw Error("empty resolution grid");
  const auto target_rank = community_size_ranking(target);
  const bool target_constant =
      std::adjacent_find(target_rank.begin(), target_rank.end(), std::not_equal_to<>()) == target_rank.end();

  ResolutionMatch out;
  out.table.resize(gammas.size());
  parallel_for(gammas.size(), jobs, [&](std::size_t i) {
    const auto found = louvain(g, gammas[i], rng_seed).partition;
    double tau = std::numeric_limits<double>::quiet_NaN();
    if (!target_constant) {
      try {
        tau = kendall_tau(community_size_ranking(found), target_rank);
      } catch (const Error&) {
        // constant ranking of the found partition; tau undefined
      }
    }
    out.table[i] = {gammas[i], tau, found.num_communities()};
  });

  auto lower_gamma = [](const ResolutionRow& a, const ResolutionRow& b) {
    return a.gamma < b.gamma;
  };
  std::optional<std::size_t> best;
  if (!target_constant) {
    for (std::size_t i = 0; i < out.table.size(); ++i) {
      const auto& row = out.table[i];
      if (std::isnan(row.tau)) continue;
      if (!best || row.tau > out.table[*best].tau ||
          (row.tau == out.table[*best].tau && lower_gamma(row, out.table[*best]))) {
        best = i;
      }
    }
  }
  if (!best) {
    out.matched_by_count = true;
    const auto target_k = static_cast<double>(target.num_communities());
    for (std::size_t i = 0; i < out.table.size(); ++i) {
      const auto gap = [&](std::size_t j) { return std::abs(static_cast<double>(out.table[j].communities) - target_k); };
      if (!best || gap(i) < gap(*best) || (gap(i) == gap(*best) && lower_gamma(out.table[i], out.table[*best]))) best = i;
    }
  }
  out.gamma_star = out.table[*best].gamma;
  out.tau_star = out.table[*best].tau;
  return out;
}

struct VariabilityResult {
  std::vector<Detection> louvain_runs;
  std::vector<Detection> sbm_runs;
  std::vector<double> louvain_louvain;  // C(runs, 2) values
  std::vector<double> sbm_sbm;          // C(runs, 2) values
  std::vector<double> louvain_sbm;      // runs^2 values
};

inline std::vector<double> pairwise_nmi(const std::vector<Detection>& runs) {
  std::vector<double> out;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (std::size_t j = i + 1; j < runs.size(); ++j) out.push_back(nmi(runs[i].partition, runs[j].partition));
  }
  return out;
}

inline std::vector<double> cross_nmi(const std::vector<Detection>& a, const std::vector<Detection>& b) {
  std::vector<double> out;
  for (const auto& x : a) {
    for (const auto& y : b) out.push_back(nmi(x.partition, y.partition));
  }
  return out;
}

struct VariabilitySettings {
  std::size_t runs = 10;
  double gamma = 1.0;
  std::size_t k = 2;
  std::size_t sweeps = 10;
  std::uint64_t rng_seed = 0;
  bool identical_seeds = false;  // every run uses rng_seed itself
  std::size_t jobs = 1;
};

/// Independent Louvain and SBM runs with derived seeds, compared pairwise
/// by NMI within and between the two algorithms.
inline VariabilityResult variability_experiment(const Representation& rep, const VariabilitySettings& s) {
  if (s.runs < 2) throw Error("variability needs at least two runs");
  VariabilityResult out;
  out.louvain_runs.resize(s.runs);
  out.sbm_runs.resize(s.runs);
  const std::uint64_t louvain_stream = derive_seed(s.rng_seed, 1);
  const std::uint64_t sbm_stream = derive_seed(s.rng_seed, 2);
  parallel_for(2 * s.runs, s.jobs, [&](std::size_t task) {
    const std::size_t r = task % s.runs;
    if (task < s.runs) {
      const auto seed = s.identical_seeds ? s.rng_seed : derive_seed(louvain_stream, r);
      out.louvain_runs[r] = detect_louvain(rep, s.gamma, seed);
    } else {
      const auto seed = s.identical_seeds ? s.rng_seed : derive_seed(sbm_stream, r);
      out.sbm_runs[r] = detect_sbm(rep, s.k, seed, s.sweeps);
    }
  });
  out.louvain_louvain = pairwise_nmi(out.louvain_runs);
  out.sbm_sbm = pairwise_nmi(out.sbm_runs);
  out.louvain_sbm = cross_nmi(out.louvain_runs, out.sbm_runs);
  return out;
}

inline VariabilityResult variability_experiment(const Graph& g, std::size_t runs, double gamma, std::size_t k,
                                                std::uint64_t rng_seed) {
  VariabilitySettings s;
  s.runs = runs;
  s.gamma = gamma;
  s.k = k;
  s.rng_seed = rng_seed;
  return variability_experiment(Representation::full(g), s);
}

struct TimingStats {
  std::vector<double> seconds;
  double median = 0.0;
  double min = 0.0;
};

/// Wall-clock timing of `leg` over `repetitions` runs.
template <typename Leg>
TimingStats benchmark(Leg&& leg, std::size_t repetitions) {
  if (repetitions < 1) throw Error("benchmark needs at least one repetition");
  TimingStats t;
  for (std::size_t i = 0; i < repetitions; ++i) {
    const auto start = std::chrono::steady_clock::now();
    leg();
    const auto stop = std::chrono::steady_clock::now();
    t.seconds.push_back(std::chrono::duration<double>(stop - start).count());
  }
  auto sorted = t.seconds;
  std::sort(sorted.begin(), sorted.end());
  t.median = quantile_sorted(sorted, 0.5);
  t.min = sorted.front();
  return t;
}

}  // namespace supercomm
