#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using supercomm::cli::run;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("supercomm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  static std::string read(const std::string& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  int call(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    args.insert(args.begin(), "supercomm");
    return run(args, out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

const char* kTwoTriangles = "0 1\n1 2\n2 0\n3 4\n4 5\n5 3\n2 3\n";

}  // namespace

TEST_F(Cli, CompressTwoTriangles) {
  write("g.txt", kTwoTriangles);
  ASSERT_EQ(call({"compress", "--input", path("g.txt"), "-S", "2", "--seed-method", "corehd", "--max-order", "1",
                  "--out", path("c")}),
            0)
      << err_.str();
  EXPECT_EQ(read(path("c.assignment.txt")), "0 0\n1 0\n2 0\n3 1\n4 1\n5 1\n");
  EXPECT_EQ(read(path("c.supernodes.txt")), "0 1\n");
  const auto summary = nlohmann::json::parse(read(path("c.summary.json")));
  EXPECT_EQ(summary["num_supernodes"], 2);
  EXPECT_EQ(summary["periphery_nodes"], 0);
  EXPECT_EQ(summary["internal_weight"], 6.0);
  EXPECT_EQ(summary["conserved"], true);
  const auto assignment = nlohmann::json::parse(read(path("c.assignment.json")));
  EXPECT_EQ(assignment["nodes"][0]["absorbed_at"], 1);
}

TEST_F(Cli, CompressAllNodesIsIdentity) {
  write("g.txt", kTwoTriangles);
  ASSERT_EQ(call({"compress", "--input", path("g.txt"), "-S", "6", "--out", path("c")}), 0);
  const auto w = supercomm::parse_edge_list(read(path("c.supernodes.txt")));
  EXPECT_EQ(w.num_edges(), 7u);
}

TEST_F(Cli, DetectFullLouvain) {
  ASSERT_EQ(call({"generate", "--n", "120", "--k", "4", "--p-in", "0.4", "--p-out", "0.01", "--seed", "1", "--out",
                  path("g")}),
            0);
  ASSERT_EQ(call({"detect", "--input", path("g.edges.txt"), "--algorithm", "louvain", "--runs", "2", "--out",
                  path("d")}),
            0)
      << err_.str();
  const auto summary = nlohmann::json::parse(read(path("d.summary.json")));
  ASSERT_EQ(summary["runs"].size(), 2u);
  EXPECT_EQ(summary["runs"][0]["communities"], 4);
  EXPECT_GT(summary["runs"][0]["modularity"].get<double>(), 0.5);
  std::istringstream lines(read(path("d.run0.txt")));
  std::string node;
  int c = 0;
  std::size_t count = 0;
  while (lines >> node >> c) ++count;
  EXPECT_EQ(count, 120u);
}

TEST_F(Cli, DetectSupernodeMapsEveryNode) {
  // Path 0..8: degree fallback seeds 1 and 2, each absorbing one neighbor.
  write("p.txt", "0 1\n1 2\n2 3\n3 4\n4 5\n5 6\n6 7\n7 8\n");
  ASSERT_EQ(call({"detect", "--input", path("p.txt"), "--representation", "supernode", "-S", "2", "--max-order", "1",
                  "--out", path("d")}),
            0)
      << err_.str();
  const auto summary = nlohmann::json::parse(read(path("d.summary.json")));
  EXPECT_GT(summary["periphery_nodes"].get<int>(), 0);
  const auto part = nlohmann::json::parse(read(path("d.run0.json")));
  EXPECT_EQ(part["labels"].size(), 9u);
  EXPECT_EQ(summary["periphery_nodes"], 5);
  // the two super nodes merge; the periphery adds one label
  EXPECT_EQ(part["num_communities"], 2);

  write("t.txt", kTwoTriangles);
  ASSERT_EQ(call({"detect", "--input", path("t.txt"), "--representation", "supernode", "-S", "2", "--out",
                  path("e")}),
            0);
  EXPECT_EQ(nlohmann::json::parse(read(path("e.summary.json")))["periphery_nodes"], 0);
}

TEST_F(Cli, DetectSbmEchoesSelectedK) {
  write("d.txt", "0 1\n2 3\n");
  ASSERT_EQ(call({"detect", "--input", path("d.txt"), "--algorithm", "sbm", "--k-range", "1:3", "--out", path("s")}),
            0)
      << err_.str();
  const auto summary = nlohmann::json::parse(read(path("s.summary.json")));
  EXPECT_EQ(summary["k"], 2);
  EXPECT_EQ(summary["k_selection"].size(), 3u);
  EXPECT_NE(out_.str().find("selected k 2"), std::string::npos);
  EXPECT_NE(call({"detect", "--input", path("d.txt"), "--algorithm", "sbm", "--out", path("s")}), 0);
}

TEST_F(Cli, UsageAndIoErrors) {
  EXPECT_EQ(call({}), supercomm::cli::kUsage);
  EXPECT_EQ(call({"compress"}), supercomm::cli::kUsage);
  EXPECT_EQ(call({"compress", "--input", path("missing.txt"), "--out", path("x")}), supercomm::cli::kFailure);
  EXPECT_NE(err_.str().find("cannot open"), std::string::npos);
  write("bad.txt", "0 1 nan-weight\n");
  EXPECT_EQ(call({"compress", "--input", path("bad.txt"), "--out", path("x")}), supercomm::cli::kFailure);
  write("g.txt", kTwoTriangles);
  EXPECT_EQ(call({"compress", "--input", path("g.txt"), "-S", "7", "--out", path("x")}), supercomm::cli::kFailure);
  EXPECT_EQ(call({"--version"}), 0);
}

TEST_F(Cli, EvaluateEndToEnd) {
  write("e.toml", R"(
master_seed = 11
runs = 10
orders = [1, 2, 3]
num_supernodes = 40
k_max = 6
gamma_points = 6

[network.syn]
generate = planted
n = 240
k = 3
p_in = 0.15
p_out = 0.01
)");
  ASSERT_EQ(call({"evaluate", "--config", path("e.toml"), "--out", path("r1"), "--jobs", "4"}), 0) << err_.str();
  const auto doc = nlohmann::json::parse(read(path("r1/report.json")));
  EXPECT_EQ(doc["schema_version"], 1);
  const auto& net = doc["payload"]["networks"][0];
  EXPECT_EQ(net["min_auc"].size(), 12u);
  std::set<std::string> labels;
  for (const auto& p : net["nmi_pairs"]) labels.insert(p["label"].get<std::string>());
  for (const char* l : {"louvain-louvain", "sbm-sbm", "louvain-sbm"}) EXPECT_TRUE(labels.count(l));
  for (const auto& p : net["nmi_pairs"]) {
    if (p["label"] == "louvain-sbm") {
      EXPECT_EQ(p["values"].size(), 100u);
    } else if (p["label"] == "sbm-sbm") {
      EXPECT_EQ(p["values"].size(), 45u);
    }
  }
  EXPECT_TRUE(doc["metadata"].contains("timestamp"));
  EXPECT_TRUE(doc["metadata"]["runtimes"]["syn"].contains("louvain/full"));
  EXPECT_EQ(net["provenance"]["supernode_sbm"], "multiplicity");
  EXPECT_FALSE(read(path("r1/report.csv")).empty());

  ASSERT_EQ(call({"evaluate", "--config", path("e.toml"), "--out", path("r2"), "--jobs", "1"}), 0);
  const auto again = nlohmann::json::parse(read(path("r2/report.json")));
  EXPECT_EQ(doc["payload"].dump(), again["payload"].dump());
  EXPECT_EQ(read(path("r1/report.csv")), read(path("r2/report.csv")));
}

TEST_F(Cli, EvaluateSingleOrder) {
  write("e.toml", "runs = 2\norders = [1]\nnum_supernodes = 20\nk_max = 4\ngamma_points = 4\n"
                  "[network.a]\ngenerate = planted\nn = 100\nk = 2\np_in = 0.2\np_out = 0.02\n");
  ASSERT_EQ(call({"evaluate", "--config", path("e.toml"), "--out", path("r")}), 0) << err_.str();
  const auto doc = nlohmann::json::parse(read(path("r/report.json")));
  EXPECT_EQ(doc["payload"]["networks"][0]["min_auc"].size(), 4u);
}

TEST_F(Cli, EvaluateNothing) {
  write("e.toml", "runs = 3\n");
  EXPECT_EQ(call({"evaluate", "--config", path("e.toml"), "--out", path("r")}), supercomm::cli::kFailure);
  EXPECT_NE(err_.str().find("nothing to evaluate"), std::string::npos);
}

TEST_F(Cli, EvaluateReportsFailedLegs) {
  // Weighted input: the Bernoulli block model legs cannot run.
  write("w.txt", "0 1 2\n1 2 3\n2 0 1\n2 3 1\n3 4 2\n4 5 1\n5 3 1\n");
  write("e.toml", "runs = 2\norders = [1]\nnum_supernodes = 2\nk_max = 2\ngamma_points = 3\n"
                  "[network.w]\npath = w.txt\n");
  EXPECT_EQ(call({"evaluate", "--config", path("e.toml"), "--out", path("r")}), supercomm::cli::kLegFailed);
  const auto doc = nlohmann::json::parse(read(path("r/report.json")));
  EXPECT_FALSE(doc["payload"]["networks"][0]["failures"].empty());
}
