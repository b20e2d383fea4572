#pragma once

#include <cmath>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "supercomm/compression.hpp"
#include "supercomm/experiments.hpp"
#include "supercomm/graph.hpp"
#include "supercomm/partition.hpp"
#include "supercomm/pipeline.hpp"

namespace supercomm {

using json = nlohmann::ordered_json;

inline constexpr int kReportSchemaVersion = 1;

// NaN and infinities become null.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const Summary& s) {
  return {{"count", s.count}, {"mean", number(s.mean)}, {"median", number(s.median)},
          {"q1", number(s.q1)},   {"q3", number(s.q3)},     {"iqr", number(s.iqr())}};
}

inline json assignment_json(const Graph& g, const SuperNodeAssignment& a) {
  check_assignment(g, a);
  json nodes = json::array();
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    const bool periphery = a.assign[i] == kPeriphery;
    nodes.push_back({{"node", g.label(i)},
                     {"supernode", periphery ? json("P") : json(a.assign[i])},
                     {"absorbed_at", a.absorbed_at[i] == kNotAbsorbed ? json(nullptr) : json(a.absorbed_at[i])}});
  }
  json seeds = json::array();
  for (NodeId s : a.seed_of) seeds.push_back(g.label(s));
  return {{"max_order", a.max_order},
          {"num_supernodes", a.num_supernodes()},
          {"periphery", a.periphery_count()},
          {"seeds", seeds},
          {"nodes", nodes}};
}

inline json partition_json(const Graph& g, const Partition& p) {
  check_partition(g, p);
  json labels = json::object();
  for (NodeId i = 0; i < g.num_nodes(); ++i) labels[g.label(i)] = p[i];
  return {{"num_communities", p.num_communities()}, {"labels", labels}};
}

/// Deterministic part of an evaluation report (no timings).
inline json report_payload(const EvaluationReport& r) {
  json nmi_pairs = json::array();
  for (const auto& p : r.nmi_pairs) {
    json values = json::array();
    for (double v : p.values) values.push_back(number(v));
    nmi_pairs.push_back({{"label", p.label},
                         {"representation", p.representation},
                         {"values", values},
                         {"summary", to_json(p.summary)}});
  }
  json auc = json::array();
  for (const auto& a : r.min_auc) {
    auc.push_back({{"representation", a.representation},
                   {"algorithm", a.algorithm},
                   {"order", a.order},
                   {"value", number(a.value)},
                   {"skipped_communities", a.skipped}});
  }
  json gamma_table = json::array();
  for (const auto& row : r.resolution_table) {
    gamma_table.push_back({{"gamma", row.gamma}, {"tau", number(row.tau)}, {"communities", row.communities}});
  }
  json k_table = json::array();
  for (const auto& row : r.k_table) {
    k_table.push_back({{"k", row.k}, {"loglik", number(row.loglik)}, {"score", number(row.score)}});
  }
  json provenance = json::object();
  for (const auto& [k, v] : r.provenance) provenance[k] = v;
  return {{"network", r.network},
          {"nodes", r.nodes},
          {"edges", r.edges},
          {"nmi_pairs", nmi_pairs},
          {"matched_gamma", number(r.matched_gamma)},
          {"matched_tau", number(r.matched_tau)},
          {"matched_by_count", r.matched_by_count},
          {"matched_k", r.matched_k},
          {"resolution_table", gamma_table},
          {"k_selection_table", k_table},
          {"min_auc", auc},
          {"provenance", provenance},
          {"failures", r.failures}};
}

inline json report_runtimes(const EvaluationReport& r) {
  json out = json::object();
  for (const auto& [leg, seconds] : r.runtimes) out[leg] = seconds;
  return out;
}

/// Full report document. Timings and the timestamp live under "metadata";
/// everything under "payload" is reproducible from the configuration.
inline json report_document(const std::vector<EvaluationReport>& reports, const json& config_echo,
                            const std::string& timestamp) {
  json payload_networks = json::array();
  json runtimes = json::object();
  for (const auto& r : reports) {
    payload_networks.push_back(report_payload(r));
    runtimes[r.network] = report_runtimes(r);
  }
  return {{"schema_version", kReportSchemaVersion},
          {"payload", {{"config", config_echo}, {"networks", payload_networks}}},
          {"metadata", {{"timestamp", timestamp}, {"runtimes", runtimes}}}};
}

inline std::string csv_number(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

/// Flat rows: network,representation,algorithm,metric,parameter,value,rng_seed.
inline void write_report_csv(const std::vector<EvaluationReport>& reports, std::ostream& out) {
  out << "network,representation,algorithm,metric,parameter,value,rng_seed\n";
  for (const auto& r : reports) {
    const auto seed_it = r.provenance.find("network_seed");
    const std::string seed = seed_it == r.provenance.end() ? "" : seed_it->second;
    auto row = [&](const std::string& rep, const std::string& alg, const std::string& metric,
                   const std::string& param, double value) {
      out << r.network << ',' << rep << ',' << alg << ',' << metric << ',' << param << ',' << csv_number(value)
          << ',' << seed << '\n';
    };
    for (const auto& p : r.nmi_pairs) {
      // "louvain-sbm" -> algorithm column carries the pair label.
      for (std::size_t i = 0; i < p.values.size(); ++i) {
        row(p.representation, p.label, "nmi", std::to_string(i), p.values[i]);
      }
    }
    for (const auto& a : r.min_auc) row(a.representation, a.algorithm, "min_auc", std::to_string(a.order), a.value);
    for (const auto& t : r.resolution_table) row("full", "louvain", "kendall_tau", csv_number(t.gamma), t.tau);
    for (const auto& k : r.k_table) row("supernode", "sbm", "penalized_loglik", std::to_string(k.k), k.score);
    row("full", "louvain", "matched_gamma", "", r.matched_gamma);
    row("supernode", "sbm", "matched_k", "", static_cast<double>(r.matched_k));
  }
}

/// Timing rows kept apart from the deterministic CSV.
inline void write_runtime_csv(const std::vector<EvaluationReport>& reports, std::ostream& out) {
  out << "network,leg,seconds\n";
  for (const auto& r : reports) {
    for (const auto& [leg, seconds] : r.runtimes) out << r.network << ',' << leg << ',' << csv_number(seconds) << '\n';
  }
}

}  // namespace supercomm
