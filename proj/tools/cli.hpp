#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "supercomm/config.hpp"
#include "supercomm/pipeline.hpp"
#include "supercomm/report.hpp"

namespace supercomm::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,     // I/O or algorithm error
  kUsage = 2,       // bad command line
  kLegFailed = 3,   // evaluate finished but some legs failed
};

/// One network named by an evaluate config.
struct NetworkSpec {
  std::string name;
  std::string path;  // empty for generated networks
  bool extract_core = false;
  // planted generator parameters
  std::size_t n = 0;
  std::size_t k = 0;
  double p_in = 0.0;
  double p_out = 0.0;
  std::uint64_t seed = 0;
};

struct EvaluateConfig {
  EvalSettings settings;
  std::vector<NetworkSpec> networks;
};

/// Reads evaluate settings. Relative network paths resolve against `base_dir`.
EvaluateConfig load_evaluate_config(const Config& cfg, const std::string& base_dir);

/// Deterministic echo of the settings that went into a report.
json config_echo(const EvaluateConfig& c);

/// Entry point shared by the executable and the tests. argv[0] is ignored.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace supercomm::cli
