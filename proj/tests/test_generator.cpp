#include <gtest/gtest.h>

#include <cmath>

#include "supercomm/generator.hpp"

using namespace supercomm;

TEST(Planted, CompleteGraph) {
  const auto pg = planted_partition(12, 3, 1.0, 1.0, 1);
  EXPECT_EQ(pg.graph.num_edges(), 66u);
}

TEST(Planted, DisjointCliques) {
  const auto pg = planted_partition(10, 3, 1.0, 0.0, 1);
  EXPECT_EQ(pg.planted.community_sizes(), (std::vector<std::size_t>{4, 3, 3}));
  EXPECT_EQ(pg.graph.num_edges(), 6u + 3u + 3u);
  for (const auto& e : pg.graph.edges()) EXPECT_EQ(pg.planted[e.u], pg.planted[e.v]);
}

TEST(Planted, DensitiesNearTarget) {
  const auto pg = planted_partition(600, 3, 0.1, 0.02, 7);
  double in = 0;
  double out = 0;
  for (const auto& e : pg.graph.edges()) (pg.planted[e.u] == pg.planted[e.v] ? in : out) += 1;
  const double in_pairs = 3.0 * 200 * 199 / 2;
  const double out_pairs = 3.0 * 200 * 200;
  EXPECT_NEAR(in / in_pairs, 0.1, 0.01);
  EXPECT_NEAR(out / out_pairs, 0.02, 0.003);
}

TEST(Planted, DeterministicAndValid) {
  const auto a = planted_partition(300, 5, 0.2, 0.01, 11);
  const auto b = planted_partition(300, 5, 0.2, 0.01, 11);
  EXPECT_EQ(a.graph.edges().size(), b.graph.edges().size());
  const auto ea = a.graph.edges();
  const auto eb = b.graph.edges();
  for (std::size_t i = 0; i < ea.size(); ++i) {
    EXPECT_EQ(ea[i].u, eb[i].u);
    EXPECT_EQ(ea[i].v, eb[i].v);
    EXPECT_NE(ea[i].u, ea[i].v);
  }
}

TEST(Planted, Errors) {
  EXPECT_THROW(planted_partition(3, 4, 0.5, 0.1, 0), Error);
  EXPECT_THROW(planted_partition(10, 2, 1.5, 0.1, 0), Error);
  EXPECT_THROW(planted_partition(10, 2, 0.1, 0.5, 0), Error);
}

TEST(Planted, ExpectedEdgeCount) {
  // 8 groups of 10: E[M] = 360 * 0.3 + 2800 * 0.01 = 136,
  // Var[M] = 360 * 0.3 * 0.7 + 2800 * 0.01 * 0.99 = 103.32.
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) total += planted_partition(80, 8, 0.3, 0.01, seed).graph.num_edges();
  const double mean = total / 200.0;
  EXPECT_NEAR(mean, 136.0, 3.0 * std::sqrt(103.32 / 200.0));
}

TEST(Planted, SeedsDiffer) {
  const auto a = planted_partition(200, 4, 0.1, 0.01, 1).graph.edges();
  const auto b = planted_partition(200, 4, 0.1, 0.01, 2).graph.edges();
  bool differ = a.size() != b.size();
  for (std::size_t i = 0; !differ && i < a.size(); ++i) differ = a[i].u != b[i].u || a[i].v != b[i].v;
  EXPECT_TRUE(differ);
}
