#include <doctest.h>

#include "../support/random_nets.hpp"
#include "unrectify/builders.hpp"
#include "unrectify/error.hpp"
#include "unrectify/partition.hpp"
#include "unrectify/random.hpp"

using namespace unrectify;

namespace {

Matrix grid(double lo, double hi, int steps) {
  Matrix s(steps * steps, 2);
  for (int i = 0; i < steps; ++i)
    for (int j = 0; j < steps; ++j) {
      s(i * steps + j, 0) = lo + (hi - lo) * i / (steps - 1);
      s(i * steps + j, 1) = lo + (hi - lo) * j / (steps - 1);
    }
  return s;
}

}  // namespace

TEST_SUITE("partition") {

TEST_CASE("single sample census") {
  const DagNet net = build_fusion_stack(1, 3, 1);
  NormalSampler n(1);
  const auto c = partition_census(net, net.output(), n.matrix(1, 3));
  CHECK(c.samples == 1);
  CHECK(c.region_count == 1);
  CHECK(c.multi_point_count == 0);
  CHECK(c.max_intra_dist == 0.0);
}

TEST_CASE("group_by_key keeps first-appearance order") {
  const std::vector<Pattern> keys{{2}, {1}, {2}, {3}, {1}};
  const auto g = group_by_key(keys);
  REQUIRE(g.size() == 3);
  CHECK(g[0] == std::vector<std::size_t>{0, 2});
  CHECK(g[1] == std::vector<std::size_t>{1, 4});
  CHECK(g[2] == std::vector<std::size_t>{3});
}

TEST_CASE("census metrics from keys") {
  Matrix s(4, 1);
  s << 0.0, 1.0, 5.0, 3.0;
  const auto c = census_from_keys("a", {{0}, {0}, {1}, {0}}, s);
  CHECK(c.region_count == 2);
  CHECK(c.multi_point_count == 3);
  CHECK(c.max_intra_dist == 3.0);
}

TEST_CASE("single ReLU layer on a grid has at most four regions") {
  const DagNet net = build_series(2, {{Matrix::Identity(2, 2), Vector::Zero(2), Relu{}}});
  const auto c = partition_census(net, "out", grid(-2, 2, 41));
  CHECK(c.region_count <= 4);
  CHECK(c.region_count == 4);
}

TEST_CASE("concurrent pair fused partition has eight regions") {
  const DagNet net = build_concurrent_pair();
  const auto c = partition_census(net, net.output(), grid(-2, 2, 201));
  CHECK(c.region_count == 8);
}

TEST_CASE("fusion partition bound") {
  CHECK(fusion_partition_bound({4, 4}) == 16);
  CHECK(fusion_partition_bound({1, 9}) == 9);
  CHECK(fusion_partition_bound({2, 3, 5}) == 30);
  CHECK_THROWS_AS(fusion_partition_bound({0, 2}), Error);
  CHECK_THROWS_AS(fusion_partition_bound({1ULL << 40, 1ULL << 40}), Error);
}

TEST_CASE("tree partition example") {
  // h = ReLU(x), y = ReLU(h1 + h2 - 1): quadrants, with the positive one cut
  // by h1 + h2 = 1, and the two half-axes cut where a coordinate passes 1.
  const DagNet net = build_series(
      2, {{Matrix::Identity(2, 2), Vector::Zero(2), Relu{}},
          {Matrix{{1.0, 1.0}}, Vector{{-1.0}}, Relu{}}});
  const auto c = partition_census(net, "out", grid(-3, 3, 121));
  CHECK(c.region_count == 7);
}

TEST_CASE("refinement") {
  const DagNet net = build_fusion_stack(2, 4, 3);
  NormalSampler n(4);
  const Matrix s = n.matrix(2000, 4);
  CHECK(refinement_check(net, net.output(), "L01.top", s) == 0);
  CHECK(refinement_check(net, "L02.fusion", "L02.top", s) == 0);
  CHECK(refinement_check(net, "L01.top", "L01.top", s) == 0);
  try {
    refinement_check(net, "L01.top", "L01.bottom", s);
    FAIL("expected NotInSubgraph");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNotInSubgraph);
  }
}

TEST_CASE("refinement_violations counts discordant pairs") {
  // a: {0,1} {2}; b: {0} {1} {2} -> pair (0,1) violates.
  CHECK(refinement_violations({{0}, {0}, {1}}, {{0}, {1}, {2}}) == 1);
  // Reversed direction: a finer than b.
  CHECK(refinement_violations({{0}, {1}, {2}}, {{0}, {0}, {1}}) == 0);
  CHECK(refinement_violations({{0}, {0}, {0}}, {{0}, {1}, {2}}) == 3);
}

TEST_CASE("fusion refines its channels on random DAGs") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const DagNet net = testnet::random_dag(seed);
    NormalSampler n(seed + 100);
    const Matrix s = n.matrix(500, static_cast<Eigen::Index>(net.input_dim()));
    const auto keep = net.ancestors(net.node_count() - 1);
    for (std::size_t b = 0; b < net.node_count(); ++b)
      if (keep[b]) CHECK(refinement_check(net, net.output(), net.nodes()[b], s) == 0);
  }
}

TEST_CASE("multi-node census matches per-node census") {
  const DagNet net = build_fusion_stack(2, 5, 6);
  NormalSampler n(7);
  const Matrix s = n.matrix(800, 5);
  const std::vector<NodeId> nodes{"L01.top", "L02.fusion"};
  const auto all = partition_census(net, nodes, s);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto one = partition_census(net, nodes[i], s);
    CHECK(all[i].region_count == one.region_count);
    CHECK(all[i].multi_point_count == one.multi_point_count);
    CHECK(all[i].max_intra_dist == one.max_intra_dist);
  }
}

}  // TEST_SUITE
