#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "supercomm/compression.hpp"
#include "supercomm/experiments.hpp"
#include "supercomm/graph.hpp"
#include "supercomm/metrics.hpp"
#include "supercomm/sbm.hpp"
#include "supercomm/seeding.hpp"

namespace supercomm {

inline constexpr const char* kVersion = "0.1.0";

struct CompressionSettings {
  std::size_t num_supernodes = 500;
  std::size_t max_order = kDefaultMaxOrder;
  SeedMethod seed_method = SeedMethod::corehd;
};

struct Compressed {
  SeedSet seeds;
  SuperNodeAssignment assignment;
  SuperNodeNetwork network;

  bool conserves(const Graph& g, double rel_tol = 1e-9) const {
    const double total = g.total_weight();
    const double parts = network.cross_weight() + network.total_internal_weight() + network.periphery_edge_weight;
    return std::abs(parts - total) <= rel_tol * std::max(1.0, std::abs(total));
  }
};

/// Seeds, grows and contracts. S is capped at the node count.
inline Compressed compress(const Graph& g, const CompressionSettings& s) {
  Compressed c;
  c.seeds = select_seeds(g, std::min(s.num_supernodes, g.num_nodes()), s.seed_method);
  c.assignment = grow_supernodes(g, c.seeds, s.max_order);
  c.network = contract(g, c.assignment);
  return c;
}

struct EvalSettings {
  std::uint64_t master_seed = 0;
  std::size_t runs = 10;
  std::vector<std::size_t> orders{1, 2, 3};
  std::vector<double> gammas = default_gamma_grid();
  CompressionSettings compression;
  std::size_t k_min = 1;
  std::size_t k_max = 10;
  std::size_t sweeps = 10;
  NeighborhoodMode neighborhood_mode = NeighborhoodMode::within;
  SuperNodeSbmMode supernode_sbm = SuperNodeSbmMode::multiplicity;
  std::size_t timing_repetitions = 1;
  std::size_t supernode_partitions = 5;  // compared against each full-network run
  std::size_t jobs = 1;
};

struct NmiPopulation {
  std::string label;           // louvain-louvain, sbm-sbm, louvain-sbm, full-vs-supernode/<alg>
  std::string representation;  // full, supernode, or full|supernode
  std::vector<double> values;
  Summary summary;
};

struct AucRecord {
  std::string representation;
  std::string algorithm;
  std::size_t order = 0;
  double value = 0.0;
  std::size_t skipped = 0;
};

struct EvaluationReport {
  std::string network;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::map<std::string, double> runtimes;  // leg -> median seconds
  std::vector<NmiPopulation> nmi_pairs;
  double matched_gamma = std::numeric_limits<double>::quiet_NaN();
  double matched_tau = std::numeric_limits<double>::quiet_NaN();
  bool matched_by_count = false;
  std::size_t matched_k = 0;
  std::vector<ResolutionRow> resolution_table;
  std::vector<KSelection::Row> k_table;
  std::vector<AucRecord> min_auc;
  std::map<std::string, std::string> provenance;
  std::vector<std::string> failures;

  bool ok() const noexcept { return failures.empty(); }

  const NmiPopulation* find_nmi(const std::string& label, const std::string& representation) const {
    for (const auto& p : nmi_pairs) {
      if (p.label == label && p.representation == representation) return &p;
    }
    return nullptr;
  }

  std::optional<double> find_auc(const std::string& representation, const std::string& algorithm,
                                 std::size_t order) const {
    for (const auto& r : min_auc) {
      if (r.representation == representation && r.algorithm == algorithm && r.order == order) return r.value;
    }
    return std::nullopt;
  }
};

namespace pipeline_detail {

// Seed streams per leg.
enum : std::uint64_t {
  kLouvainTiming = 11,
  kSbmTiming = 12,
  kKSelection = 13,
  kVariability = 14,
  kResolution = 15,
};

}  // namespace pipeline_detail

/// Runs every experiment leg on one network: compression, runtimes,
/// model selection, variability, full-vs-supernode agreement, resolution
/// matching and min-AUC. A failing leg is recorded and the rest continue
/// where their inputs exist.
inline EvaluationReport evaluate_network(const std::string& name, const Graph& g, const EvalSettings& s,
                                         std::uint64_t network_seed) {
  using namespace pipeline_detail;
  EvaluationReport rep;
  rep.network = name;
  rep.nodes = g.num_nodes();
  rep.edges = g.num_edges();

  auto leg = [&](const std::string& label, auto&& fn) {
    try {
      fn();
      return true;
    } catch (const std::exception& e) {
      rep.failures.push_back(label + ": " + e.what());
      return false;
    }
  };

  std::optional<Compressed> comp;
  leg("compression", [&] {
    const auto t = benchmark([&] { comp = compress(g, s.compression); }, s.timing_repetitions);
    rep.runtimes["compression"] = t.median;
    if (!comp->conserves(g)) throw Error("edge weight conservation violated");
  });

  auto& prov = rep.provenance;
  prov["version"] = kVersion;
  prov["master_seed"] = std::to_string(s.master_seed);
  prov["network_seed"] = std::to_string(network_seed);
  prov["num_supernodes"] = std::to_string(std::min(s.compression.num_supernodes, g.num_nodes()));
  prov["max_order"] = std::to_string(s.compression.max_order);
  prov["seed_method"] = std::string(to_string(s.compression.seed_method));
  prov["runs"] = std::to_string(s.runs);
  prov["sweeps"] = std::to_string(s.sweeps);
  prov["k_range"] = std::to_string(s.k_min) + ".." + std::to_string(s.k_max);
  prov["gamma_grid_points"] = std::to_string(s.gammas.size());
  prov["neighborhood_mode"] = std::string(to_string(s.neighborhood_mode));
  prov["supernode_sbm"] = std::string(to_string(s.supernode_sbm));
  prov["growth_rule"] = "synchronized-frontier/strongest-link/lowest-index";
  prov["corehd_fallback"] = "highest-degree-residual";
  prov["k_selection"] = "profile-loglik minus K(K+1)/4 ln(pairs)";
  prov["nmi_normalization"] = "mean-entropy";
  prov["auc_ties"] = "midrank";
  if (comp) {
    prov["periphery_nodes"] = std::to_string(comp->assignment.periphery_count());
    prov["fallback_seeds"] = std::to_string(comp->seeds.fallback_count());
    prov["supernode_edges"] = std::to_string(comp->network.graph.num_edges());
  }

  const Representation full = Representation::full(g);
  std::optional<Representation> sn;
  if (comp) leg("supernode representation", [&] { sn = Representation::supernode(comp->network, comp->assignment, s.supernode_sbm); });

  // Matched K: model selection on the super-node representation.
  if (sn) {
    leg("sbm_model_selection/supernode", [&] {
      const std::size_t k_hi = std::min(s.k_max, sn->sbm_input().num_nodes());
      KSelection sel;
      const auto t = benchmark([&] { sel = select_k_detailed(sn->sbm_input(), std::min(s.k_min, k_hi), k_hi,
                                                             derive_seed(network_seed, kKSelection), s.sweeps); },
                               s.timing_repetitions);
      rep.runtimes["sbm_model_selection/supernode"] = t.median;
      rep.matched_k = sel.k;
      rep.k_table = sel.table;
    });
  }

  // Detection runtimes.
  const auto louvain_seed = derive_seed(network_seed, kLouvainTiming);
  const auto sbm_seed = derive_seed(network_seed, kSbmTiming);
  leg("louvain/full", [&] {
    rep.runtimes["louvain/full"] =
        benchmark([&] { (void)louvain(full.graph, 1.0, louvain_seed); }, s.timing_repetitions).median;
  });
  if (sn) {
    leg("louvain/supernode", [&] {
      rep.runtimes["louvain/supernode"] =
          benchmark([&] { (void)louvain(sn->graph, 1.0, louvain_seed); }, s.timing_repetitions).median;
    });
  }
  if (rep.matched_k > 0) {
    leg("sbm/full", [&] {
      rep.runtimes["sbm/full"] =
          benchmark([&] { (void)detect_sbm(full, rep.matched_k, sbm_seed, s.sweeps); }, s.timing_repetitions).median;
    });
    leg("sbm/supernode", [&] {
      rep.runtimes["sbm/supernode"] =
          benchmark([&] { (void)detect_sbm(*sn, rep.matched_k, sbm_seed, s.sweeps); }, s.timing_repetitions).median;
    });
  }

  // Variability within and between algorithms.
  std::map<std::string, VariabilityResult> var;
  if (rep.matched_k > 0) {
    for (const Representation* r : {&full, sn ? static_cast<const Representation*>(&*sn) : nullptr}) {
      if (!r) continue;
      leg("variability/" + r->name, [&] {
        VariabilitySettings vs;
        vs.runs = s.runs;
        vs.k = rep.matched_k;
        vs.sweeps = s.sweeps;
        vs.rng_seed = derive_seed(network_seed, kVariability);
        vs.jobs = s.jobs;
        auto result = variability_experiment(*r, vs);
        rep.nmi_pairs.push_back({"louvain-louvain", r->name, result.louvain_louvain, summarize(result.louvain_louvain)});
        rep.nmi_pairs.push_back({"sbm-sbm", r->name, result.sbm_sbm, summarize(result.sbm_sbm)});
        rep.nmi_pairs.push_back({"louvain-sbm", r->name, result.louvain_sbm, summarize(result.louvain_sbm)});
        var.emplace(r->name, std::move(result));
      });
    }
  }
  if (var.count("full") && var.count("supernode")) {
    leg("full-vs-supernode", [&] {
      const auto& f = var.at("full");
      const auto& n = var.at("supernode");
      const std::size_t m = std::min(s.supernode_partitions, n.louvain_runs.size());
      const std::vector<Detection> sn_louvain(n.louvain_runs.begin(), n.louvain_runs.begin() + static_cast<std::ptrdiff_t>(m));
      const std::vector<Detection> sn_sbm(n.sbm_runs.begin(), n.sbm_runs.begin() + static_cast<std::ptrdiff_t>(m));
      auto lv = cross_nmi(f.louvain_runs, sn_louvain);
      auto sb = cross_nmi(f.sbm_runs, sn_sbm);
      rep.nmi_pairs.push_back({"full-vs-supernode/louvain", "full|supernode", lv, summarize(lv)});
      rep.nmi_pairs.push_back({"full-vs-supernode/sbm", "full|supernode", sb, summarize(sb)});
    });
  }

  // Resolution matched to the super-node Louvain partition.
  if (var.count("supernode")) {
    leg("matched_gamma", [&] {
      const auto m = match_resolution(g, var.at("supernode").louvain_runs.front().partition, s.gammas,
                                      derive_seed(network_seed, kResolution), s.jobs);
      rep.matched_gamma = m.gamma_star;
      rep.matched_tau = m.tau_star;
      rep.matched_by_count = m.matched_by_count;
      rep.resolution_table = m.table;
    });
  }

  // Local agreement.
  for (const auto& [rep_name, result] : var) {
    for (const auto& [alg, runs] : {std::pair<std::string, const std::vector<Detection>*>{"louvain", &result.louvain_runs},
                                    std::pair<std::string, const std::vector<Detection>*>{"sbm", &result.sbm_runs}}) {
      for (std::size_t order : s.orders) {
        leg("min_auc/" + rep_name + "/" + alg + "/" + std::to_string(order), [&] {
          const auto r = min_auc_detailed(g, runs->front().partition, order, s.neighborhood_mode);
          rep.min_auc.push_back({rep_name, alg, order, r.min_auc, r.skipped.size()});
        });
      }
    }
  }
  return rep;
}

}  // namespace supercomm
