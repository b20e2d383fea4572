#include "cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "supercomm/generator.hpp"
#include "supercomm/report.hpp"

namespace supercomm::cli {

namespace fs = std::filesystem;

namespace {

Graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return parse_edge_list(in);
  } catch (const ParseError& e) {
    throw Error(path + ":" + std::to_string(e.line()) + ": " + e.what());
  }
}

std::ofstream open_out(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

void write_json(const std::string& path, const json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// "lo:hi" or "lo-hi"
std::pair<std::size_t, std::size_t> parse_range(const std::string& text) {
  const auto sep = text.find_first_of(":-");
  if (sep == std::string::npos) throw Error("expected a range like 2:8, got '" + text + "'");
  try {
    std::size_t used = 0;
    const auto lo = std::stoull(text.substr(0, sep), &used);
    if (used != sep) throw std::invalid_argument(text);
    const auto rest = text.substr(sep + 1);
    const auto hi = std::stoull(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(text);
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw Error("expected a range like 2:8, got '" + text + "'");
  }
}

json summary_json(const Graph& g, const Compressed& c) {
  const auto& net = c.network;
  return {{"nodes", g.num_nodes()},
          {"edges", g.num_edges()},
          {"num_supernodes", c.assignment.num_supernodes()},
          {"requested_supernodes", c.seeds.requested},
          {"seed_method", to_string(c.seeds.method)},
          {"fallback_seeds", c.seeds.fallback_count()},
          {"max_order", c.assignment.max_order},
          {"periphery_nodes", c.assignment.periphery_count()},
          {"supernode_edges", net.graph.num_edges()},
          {"total_weight", g.total_weight()},
          {"cross_weight", net.cross_weight()},
          {"internal_weight", net.total_internal_weight()},
          {"periphery_weight", net.periphery_edge_weight},
          {"conserved", c.conserves(g)},
          {"member_counts", net.member_count},
          {"internal_weights", net.internal_weight}};
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::size_t n = 0;
  std::size_t k = 0;
  double p_in = 0.0;
  double p_out = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  const auto pg = planted_partition(a.n, a.k, a.p_in, a.p_out, a.seed);
  {
    auto f = open_out(a.out + ".edges.txt");
    f << "# planted partition n=" << a.n << " k=" << a.k << " p_in=" << a.p_in << " p_out=" << a.p_out
      << " seed=" << a.seed << '\n';
    write_edge_list(pg.graph, f);
  }
  {
    auto f = open_out(a.out + ".planted.txt");
    write_partition(pg.graph, pg.planted, f);
  }
  out << "nodes " << pg.graph.num_nodes() << " edges " << pg.graph.num_edges() << '\n';
  return kOk;
}

// ---------------------------------------------------------------- compress

struct CompressArgs {
  std::string input;
  CompressionSettings settings;
  std::string seed_method = "corehd";
  std::string out;
};

int cmd_compress(CompressArgs a, std::ostream& out) {
  a.settings.seed_method = parse_seed_method(a.seed_method);
  const Graph g = load_graph(a.input);
  if (a.settings.num_supernodes > g.num_nodes()) {
    throw Error("more seeds than nodes (" + std::to_string(a.settings.num_supernodes) + " > " +
                std::to_string(g.num_nodes()) + ")");
  }
  const Compressed c = compress(g, a.settings);
  {
    auto f = open_out(a.out + ".supernodes.txt");
    write_edge_list(c.network.graph, f);
  }
  {
    auto f = open_out(a.out + ".assignment.txt");
    write_assignment(g, c.assignment, f);
  }
  write_json(a.out + ".assignment.json", assignment_json(g, c.assignment));
  const auto summary = summary_json(g, c);
  write_json(a.out + ".summary.json", summary);
  out << "supernodes " << c.assignment.num_supernodes() << " periphery " << c.assignment.periphery_count()
      << " conserved " << (c.conserves(g) ? "yes" : "no") << '\n';
  return c.conserves(g) ? kOk : kFailure;
}

// ------------------------------------------------------------------ detect

struct DetectArgs {
  std::string input;
  std::string representation = "full";
  std::string algorithm = "louvain";
  std::string assignment;  // optional precomputed assignment
  CompressionSettings compression;
  std::string seed_method = "corehd";
  std::string supernode_sbm = "multiplicity";
  double gamma = 1.0;
  std::uint64_t rng_seed = 0;
  std::size_t runs = 1;
  std::size_t k = 0;
  std::string k_range;
  std::size_t sweeps = 10;
  std::size_t jobs = 1;
  std::string out;
};

int cmd_detect(DetectArgs a, std::ostream& out) {
  if (a.representation != "full" && a.representation != "supernode") {
    throw Error("unknown representation '" + a.representation + "'");
  }
  if (a.algorithm != "louvain" && a.algorithm != "sbm") throw Error("unknown algorithm '" + a.algorithm + "'");
  if (a.runs < 1) throw Error("--runs must be at least 1");
  a.compression.seed_method = parse_seed_method(a.seed_method);
  const auto sbm_mode = parse_supernode_sbm_mode(a.supernode_sbm);
  const Graph g = load_graph(a.input);

  json summary = {{"input", a.input},
                  {"representation", a.representation},
                  {"algorithm", a.algorithm},
                  {"rng_seed", a.rng_seed}};

  Representation rep;
  if (a.representation == "full") {
    rep = Representation::full(g);
  } else {
    SuperNodeAssignment assignment;
    if (!a.assignment.empty()) {
      std::ifstream in(a.assignment);
      if (!in) throw Error("cannot open '" + a.assignment + "'");
      assignment = read_assignment(g, in);
    } else {
      a.compression.num_supernodes = std::min(a.compression.num_supernodes, g.num_nodes());
      assignment = compress(g, a.compression).assignment;
      summary["num_supernodes"] = assignment.num_supernodes();
      summary["max_order"] = assignment.max_order;
      summary["seed_method"] = to_string(a.compression.seed_method);
    }
    rep = Representation::supernode(contract(g, assignment), assignment, sbm_mode);
    summary["periphery_nodes"] = assignment.periphery_count();
    summary["supernode_sbm"] = to_string(sbm_mode);
  }

  std::size_t k = a.k;
  if (a.algorithm == "louvain") {
    summary["gamma"] = a.gamma;
  } else {
    if (!a.k_range.empty()) {
      const auto [lo, hi] = parse_range(a.k_range);
      const auto sel = select_k_detailed(rep.sbm_input(), lo, hi, a.rng_seed, a.sweeps);
      k = sel.k;
      json table = json::array();
      for (const auto& row : sel.table) table.push_back({{"k", row.k}, {"loglik", row.loglik}, {"score", row.score}});
      summary["k_selection"] = table;
    } else if (k == 0) {
      throw Error("sbm needs --k or --k-range");
    }
    summary["k"] = k;
    summary["sweeps"] = a.sweeps;
  }

  std::vector<Detection> runs(a.runs);
  std::vector<std::uint64_t> seeds(a.runs);
  for (std::size_t r = 0; r < a.runs; ++r) seeds[r] = derive_seed(a.rng_seed, r);
  parallel_for(a.runs, a.jobs, [&](std::size_t r) {
    runs[r] = a.algorithm == "louvain" ? detect_louvain(rep, a.gamma, seeds[r]) : detect_sbm(rep, k, seeds[r], a.sweeps);
  });

  json run_rows = json::array();
  for (std::size_t r = 0; r < a.runs; ++r) {
    const std::string stem = a.out + ".run" + std::to_string(r);
    {
      auto f = open_out(stem + ".txt");
      write_partition(g, runs[r].partition, f);
    }
    write_json(stem + ".json", partition_json(g, runs[r].partition));
    run_rows.push_back({{"run", r},
                        {"rng_seed", seeds[r]},
                        {a.algorithm == "louvain" ? "modularity" : "loglik", number(runs[r].objective)},
                        {"communities", runs[r].partition.num_communities()},
                        {"partition", fs::path(stem + ".txt").filename().string()}});
    out << "run " << r << ' ' << (a.algorithm == "louvain" ? "Q " : "loglik ") << std::setprecision(10)
        << runs[r].objective << " communities " << runs[r].partition.num_communities() << '\n';
  }
  summary["runs"] = run_rows;
  write_json(a.out + ".summary.json", summary);
  if (a.algorithm == "sbm" && !a.k_range.empty()) out << "selected k " << k << '\n';
  return kOk;
}

// ---------------------------------------------------------------- evaluate

const std::set<std::string> kTopKeys = {
    "master_seed",  "runs",          "orders",          "num_supernodes",     "max_order",
    "seed_method",  "k_min",         "k_max",           "sweeps",             "neighborhood",
    "supernode_sbm", "gammas",       "gamma_points",    "gamma_min",          "gamma_max",
    "timing_repetitions", "supernode_partitions"};
const std::set<std::string> kNetworkKeys = {"path", "extract_core", "generate", "n", "k", "p_in", "p_out", "seed"};

void check_keys(const Config::Section& s, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : s) {
    if (!allowed.count(key)) throw Error("unknown key '" + key + "' in " + where);
  }
}

struct EvaluateArgs {
  std::string config;
  std::string out;
  std::size_t jobs = 0;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  std::ifstream in(a.config);
  if (!in) throw Error("cannot open '" + a.config + "'");
  Config cfg;
  try {
    cfg = Config::parse(in);
  } catch (const ParseError& e) {
    throw Error(a.config + ":" + std::to_string(e.line()) + ": " + e.what());
  }
  auto ec = load_evaluate_config(cfg, fs::path(a.config).parent_path().string());
  ec.settings.jobs = a.jobs > 0 ? a.jobs : default_jobs();

  std::vector<EvaluationReport> reports;
  for (std::size_t i = 0; i < ec.networks.size(); ++i) {
    const auto& spec = ec.networks[i];
    const std::uint64_t network_seed = derive_seed(ec.settings.master_seed, i);
    Graph g;
    try {
      if (spec.path.empty()) {
        g = planted_partition(spec.n, spec.k, spec.p_in, spec.p_out, spec.seed).graph;
      } else {
        g = load_graph(spec.path);
        if (spec.extract_core) g = extract_core_subgraph(g);
      }
    } catch (const std::exception& e) {
      EvaluationReport failed;
      failed.network = spec.name;
      failed.failures.push_back(std::string("load: ") + e.what());
      reports.push_back(std::move(failed));
      continue;
    }
    out << "evaluating " << spec.name << " (" << g.num_nodes() << " nodes, " << g.num_edges() << " edges)\n";
    reports.push_back(evaluate_network(spec.name, g, ec.settings, network_seed));
  }

  auto doc = report_document(reports, config_echo(ec), utc_timestamp());
  doc["metadata"]["jobs"] = ec.settings.jobs;
  write_json((fs::path(a.out) / "report.json").string(), doc);
  {
    auto f = open_out((fs::path(a.out) / "report.csv").string());
    write_report_csv(reports, f);
  }
  {
    auto f = open_out((fs::path(a.out) / "runtimes.csv").string());
    write_runtime_csv(reports, f);
  }

  bool ok = true;
  for (const auto& r : reports) {
    for (const auto& f : r.failures) {
      err << r.network << ": " << f << '\n';
      ok = false;
    }
  }
  return ok ? kOk : kLegFailed;
}

}  // namespace

EvaluateConfig load_evaluate_config(const Config& cfg, const std::string& base_dir) {
  const auto& top = cfg.section("");
  check_keys(top, kTopKeys, "top level");
  EvaluateConfig ec;
  auto& s = ec.settings;
  s.master_seed = Config::get_uint(top, "master_seed", s.master_seed);
  s.runs = Config::get_uint(top, "runs", s.runs);
  if (Config::raw(top, "orders")) {
    s.orders.clear();
    for (auto o : Config::get_uint_list(top, "orders")) s.orders.push_back(o);
  }
  s.compression.num_supernodes = Config::get_uint(top, "num_supernodes", s.compression.num_supernodes);
  s.compression.max_order = Config::get_uint(top, "max_order", s.compression.max_order);
  s.compression.seed_method = parse_seed_method(Config::get_string(top, "seed_method", "corehd"));
  s.k_min = Config::get_uint(top, "k_min", s.k_min);
  s.k_max = Config::get_uint(top, "k_max", s.k_max);
  s.sweeps = Config::get_uint(top, "sweeps", s.sweeps);
  s.neighborhood_mode = parse_neighborhood_mode(Config::get_string(top, "neighborhood", "within"));
  s.supernode_sbm = parse_supernode_sbm_mode(Config::get_string(top, "supernode_sbm", "multiplicity"));
  s.timing_repetitions = Config::get_uint(top, "timing_repetitions", s.timing_repetitions);
  s.supernode_partitions = Config::get_uint(top, "supernode_partitions", s.supernode_partitions);
  if (Config::raw(top, "gammas")) {
    s.gammas = Config::get_double_list(top, "gammas");
    if (s.gammas.empty()) throw Error("empty resolution grid");
  } else {
    s.gammas = default_gamma_grid(Config::get_uint(top, "gamma_points", 50), Config::get_double(top, "gamma_min", 0.05),
                                  Config::get_double(top, "gamma_max", 2.5));
  }
  if (s.orders.empty()) throw Error("orders must not be empty");
  if (s.runs < 2) throw Error("runs must be at least 2");

  const std::string prefix = "network.";
  for (const auto& name : cfg.sections()) {
    if (name.empty()) continue;
    if (name.rfind(prefix, 0) != 0) throw Error("unknown section [" + name + "]");
    const auto& sec = cfg.section(name);
    check_keys(sec, kNetworkKeys, "[" + name + "]");
    NetworkSpec spec;
    spec.name = name.substr(prefix.size());
    if (spec.name.empty()) throw Error("network section without a name");
    const auto path = Config::raw(sec, "path");
    const auto generate = Config::raw(sec, "generate");
    if (path.has_value() == generate.has_value()) {
      throw Error("[" + name + "] needs exactly one of 'path' or 'generate'");
    }
    if (path) {
      fs::path p(*path);
      if (p.is_relative() && !base_dir.empty()) p = fs::path(base_dir) / p;
      spec.path = p.string();
      spec.extract_core = Config::get_bool(sec, "extract_core", false);
    } else {
      if (*generate != "planted") throw Error("[" + name + "] unknown generator '" + *generate + "'");
      for (const char* key : {"n", "k", "p_in", "p_out"}) {
        if (!Config::raw(sec, key)) throw Error("[" + name + "] missing '" + key + "'");
      }
      spec.n = Config::get_uint(sec, "n", 0);
      spec.k = Config::get_uint(sec, "k", 0);
      spec.p_in = Config::get_double(sec, "p_in", 0.0);
      spec.p_out = Config::get_double(sec, "p_out", 0.0);
      spec.seed = Config::get_uint(sec, "seed", derive_seed(s.master_seed, 1000 + ec.networks.size()));
    }
    ec.networks.push_back(std::move(spec));
  }
  if (ec.networks.empty()) throw Error("nothing to evaluate");
  return ec;
}

json config_echo(const EvaluateConfig& c) {
  const auto& s = c.settings;
  json nets = json::array();
  for (const auto& n : c.networks) {
    if (n.path.empty()) {
      nets.push_back({{"name", n.name},
                      {"generate", "planted"},
                      {"n", n.n},
                      {"k", n.k},
                      {"p_in", n.p_in},
                      {"p_out", n.p_out},
                      {"seed", n.seed}});
    } else {
      nets.push_back({{"name", n.name}, {"path", fs::path(n.path).filename().string()}, {"extract_core", n.extract_core}});
    }
  }
  return {{"master_seed", s.master_seed},
          {"runs", s.runs},
          {"orders", s.orders},
          {"num_supernodes", s.compression.num_supernodes},
          {"max_order", s.compression.max_order},
          {"seed_method", to_string(s.compression.seed_method)},
          {"k_min", s.k_min},
          {"k_max", s.k_max},
          {"sweeps", s.sweeps},
          {"neighborhood", to_string(s.neighborhood_mode)},
          {"supernode_sbm", to_string(s.supernode_sbm)},
          {"gammas", s.gammas},
          {"timing_repetitions", s.timing_repetitions},
          {"supernode_partitions", s.supernode_partitions},
          {"networks", nets}};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Super-node compression and community detection"};
  app.name("supercomm");
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Sample a planted-partition graph");
  generate->add_option("--n", gen.n, "Number of nodes")->required();
  generate->add_option("--k", gen.k, "Number of groups")->required();
  generate->add_option("--p-in", gen.p_in, "Edge probability inside a group")->required();
  generate->add_option("--p-out", gen.p_out, "Edge probability across groups")->required();
  generate->add_option("--seed", gen.seed, "RNG seed");
  generate->add_option("--out", gen.out, "Output prefix")->required();

  CompressArgs comp;
  auto* compress_cmd = app.add_subcommand("compress", "Build the super-node network");
  compress_cmd->add_option("--input", comp.input, "Edge list")->required();
  compress_cmd->add_option("--num-supernodes,-S", comp.settings.num_supernodes, "Number of super nodes")
      ->capture_default_str();
  compress_cmd->add_option("--seed-method", comp.seed_method, "corehd or degree")->capture_default_str();
  compress_cmd->add_option("--max-order", comp.settings.max_order, "Growth rounds")->capture_default_str();
  compress_cmd->add_option("--out", comp.out, "Output prefix")->required();

  DetectArgs det;
  auto* detect = app.add_subcommand("detect", "Find communities");
  detect->add_option("--input", det.input, "Edge list")->required();
  detect->add_option("--representation", det.representation, "full or supernode")->capture_default_str();
  detect->add_option("--algorithm", det.algorithm, "louvain or sbm")->capture_default_str();
  detect->add_option("--assignment", det.assignment, "Existing assignment file (supernode only)");
  detect->add_option("--num-supernodes,-S", det.compression.num_supernodes, "Super nodes when compressing inline")
      ->capture_default_str();
  detect->add_option("--seed-method", det.seed_method, "corehd or degree")->capture_default_str();
  detect->add_option("--max-order", det.compression.max_order, "Growth rounds")->capture_default_str();
  detect->add_option("--supernode-sbm", det.supernode_sbm, "multiplicity or binarize")->capture_default_str();
  detect->add_option("--gamma", det.gamma, "Louvain resolution")->capture_default_str();
  detect->add_option("--rng-seed", det.rng_seed, "Master RNG seed")->capture_default_str();
  detect->add_option("--runs", det.runs, "Independent runs")->capture_default_str();
  detect->add_option("--k", det.k, "Number of SBM blocks");
  detect->add_option("--k-range", det.k_range, "Select K from a range, e.g. 1:10");
  detect->add_option("--sweeps", det.sweeps, "SBM refinement sweeps")->capture_default_str();
  detect->add_option("--jobs", det.jobs, "Parallel runs")->capture_default_str();
  detect->add_option("--out", det.out, "Output prefix")->required();

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Run the experiment legs from a config file");
  evaluate->add_option("--config", ev.config, "Config file")->required();
  evaluate->add_option("--out", ev.out, "Output directory")->required();
  evaluate->add_option("--jobs", ev.jobs, "Worker threads (default: $SUPERCOMM_JOBS or all cores)");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back(args.empty() ? "supercomm" : args.front().c_str());
  for (std::size_t i = 1; i < args.size(); ++i) argv.push_back(args[i].c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen, out);
    if (compress_cmd->parsed()) return cmd_compress(comp, out);
    if (detect->parsed()) return cmd_detect(det, out);
    if (evaluate->parsed()) return cmd_evaluate(ev, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace supercomm::cli
