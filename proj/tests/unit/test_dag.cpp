#include <doctest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "../support/skip_ladder.hpp"
#include "../support/random_nets.hpp"
#include "unrectify/builders.hpp"
#include "unrectify/error.hpp"

using namespace unrectify;
using testnet::skip_ladder;
using testnet::id;

namespace {

// Longest input -> node path by enumerating every path.
std::size_t brute_longest(const DagNet& net, std::size_t target) {
  std::size_t best = 0;
  std::function<void(std::size_t, std::size_t)> walk = [&](std::size_t u, std::size_t len) {
    if (u == target) best = std::max(best, len);
    for (auto a : net.out_arcs(u)) walk(net.arc_target(a), len + 1);
  };
  walk(0, 0);
  return best;
}

std::set<std::size_t> arc_ids(const DagNet& net) {
  std::set<std::size_t> ids;
  for (const auto& a : net.arcs()) ids.insert(a.id);
  return ids;
}

}  // namespace

TEST_SUITE("dag") {

TEST_CASE("smallest series net") {
  DagBuilder b("I", 2);
  b.add_arc("I", "O", ArcOp::affine(Matrix::Identity(2, 2), Vector::Ones(2)));
  const DagNet net = b.freeze();
  CHECK(net.node_count() == 2);
  CHECK(net.output() == "O");
  CHECK(net.levels().L == 1);
}

TEST_CASE("closing a cycle is rejected") {
  DagBuilder b("I", 1);
  b.add_arc("I", "a", id(1));
  b.add_arc("a", "O", id(1));
  try {
    b.add_arc("O", "I", id(1));
    FAIL("expected CycleCreated");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kCycleCreated);
  }
}

TEST_CASE("shape mismatch is rejected") {
  DagBuilder b("I", 3);
  try {
    b.add_arc("I", "O", ArcOp::affine(Matrix::Zero(2, 2), Vector::Zero(2)));
    FAIL("expected DimMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimMismatch);
  }
}

TEST_CASE("validate reports invariant violations") {
  CHECK(validate(build_random_series(3, 2, 1).to_draft()).ok());

  DagDraft unreachable{"I", 1, {"I", "x", "O"}, {}};
  unreachable.arcs.push_back(Arc{0, "I", "O", 0, id(1)});
  unreachable.arcs.push_back(Arc{1, "x", "O", 1, id(1)});
  CHECK(validate(unreachable).has(ViolationKind::kUnreachable));

  DagDraft two_sinks{"I", 1, {"I", "a", "b"}, {}};
  two_sinks.arcs.push_back(Arc{0, "I", "a", 0, id(1)});
  two_sinks.arcs.push_back(Arc{1, "I", "b", 0, id(1)});
  CHECK(validate(two_sinks).has(ViolationKind::kMultipleOutputs));

  DagDraft cyclic{"I", 1, {"I", "a", "b"}, {}};
  cyclic.arcs.push_back(Arc{0, "I", "a", 0, id(1)});
  cyclic.arcs.push_back(Arc{1, "a", "b", 0, id(1)});
  cyclic.arcs.push_back(Arc{2, "b", "a", 1, id(1)});
  CHECK(validate(cyclic).has(ViolationKind::kCycle));

  DagDraft dims{"I", 2, {"I", "O"}, {}};
  dims.arcs.push_back(Arc{0, "I", "O", 0, id(3)});
  CHECK(validate(dims).has(ViolationKind::kDimMismatch));

  DagDraft ports{"I", 1, {"I", "O"}, {}};
  ports.arcs.push_back(Arc{0, "I", "O", 0, id(1)});
  ports.arcs.push_back(Arc{1, "I", "O", 0, id(1)});
  CHECK(validate(ports).has(ViolationKind::kPortConflict));

  CHECK_THROWS_AS(DagNet::freeze(two_sinks), Error);
}

TEST_CASE("topological order") {
  DagDraft chain{"I", 1, {"b", "O", "I", "a"}, {}};
  chain.arcs.push_back(Arc{0, "I", "a", 0, id(1)});
  chain.arcs.push_back(Arc{1, "a", "b", 0, id(1)});
  chain.arcs.push_back(Arc{2, "b", "O", 0, id(1)});
  CHECK(topological_order(chain) == std::vector<NodeId>{"I", "a", "b", "O"});

  DagDraft diamond{"I", 1, {"c", "b", "a", "I"}, {}};
  diamond.arcs.push_back(Arc{0, "I", "b", 0, id(1)});
  diamond.arcs.push_back(Arc{1, "I", "a", 0, id(1)});
  diamond.arcs.push_back(Arc{2, "a", "c", 0, id(1)});
  diamond.arcs.push_back(Arc{3, "b", "c", 1, id(1)});
  const auto order = topological_order(diamond);
  CHECK(order.front() == "I");
  CHECK(order.back() == "c");
  CHECK(order[1] == "a");  // tie broken by node-id

  DagDraft cyclic{"I", 1, {"I", "a", "b"}, {}};
  cyclic.arcs.push_back(Arc{0, "I", "a", 0, id(1)});
  cyclic.arcs.push_back(Arc{1, "a", "b", 0, id(1)});
  cyclic.arcs.push_back(Arc{2, "b", "a", 1, id(1)});
  try {
    topological_order(cyclic);
    FAIL("expected CycleDetected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kCycleDetected);
  }
}

TEST_CASE("skip ladder levels and sub-graph") {
  const DagNet net = skip_ladder();
  const LevelMap lm = l_values(net);
  CHECK(lm.at("4") == 4);
  CHECK(lm.at("1") == 1);
  CHECK(lm.count(1) == 4);
  CHECK(lm.levels[3] == std::vector<NodeId>{"3"});
  CHECK(lm.levels[5] == std::vector<NodeId>{"s", "t"});
  const DagNet sub = computable_subgraph(net, "4");
  CHECK(std::set<NodeId>(sub.nodes().begin(), sub.nodes().end()) ==
        std::set<NodeId>{"0", "1", "2", "3", "4"});
  CHECK(sub.output() == "4");
  const DagNet inner = computable_subgraph(net, "2");
  const auto outer_ids = arc_ids(sub);
  for (auto a : arc_ids(inner)) CHECK(outer_ids.count(a) == 1);
}

TEST_CASE("sub-graph of the input is a single node") {
  const DagNet sub = computable_subgraph(skip_ladder(), "0");
  CHECK(sub.node_count() == 1);
  CHECK(sub.arcs().empty());
  CHECK_THROWS_AS(computable_subgraph(skip_ladder(), "nope"), Error);
}

TEST_CASE("series chain of L arcs has l(O) = L") {
  for (std::size_t L = 1; L <= 6; ++L) CHECK(build_random_series(L, 3, L).levels().at("out") == L);
}

TEST_CASE("random DAG level properties") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const DagNet net = testnet::random_dag(seed, {10, true, true, true});
    const LevelMap& lm = net.levels();
    CHECK(lm.at(net.input()) == 0);
    CHECK(lm.at(net.output()) == lm.L);
    for (std::size_t u = 0; u < net.node_count(); ++u)
      CHECK(net.level_of(u) == brute_longest(net, u));
    for (std::size_t n = 0; n <= lm.L; ++n) CHECK(lm.count(n) >= 1);
    for (std::size_t a = 0; a < net.arcs().size(); ++a)
      CHECK(net.level_of(net.arc_source(a)) < net.level_of(net.arc_target(a)));
    // Nesting: b in subgraph(a) => subgraph(b) inside subgraph(a).
    for (std::size_t u = 0; u < net.node_count(); ++u) {
      const auto anc = net.ancestors(u);
      for (std::size_t v = 0; v < net.node_count(); ++v) {
        if (!anc[v]) continue;
        const auto inner = net.ancestors(v);
        for (std::size_t w = 0; w < net.node_count(); ++w)
          if (inner[w]) CHECK(anc[w]);
      }
      CHECK(validate(computable_subgraph(net, net.nodes()[u]).to_draft()).ok());
    }
  }
}

TEST_CASE("frozen nets are immutable values") {
  const DagNet a = build_random_series(2, 3, 9);
  const DagNet b = a;
  std::vector<ArcOp> ops;
  for (const auto& arc : a.arcs()) ops.push_back(arc.op.scaled(2.0));
  const DagNet c = a.with_ops(ops);
  CHECK(b.arcs()[0].op == a.arcs()[0].op);
  CHECK(!(c.arcs()[0].op == a.arcs()[0].op));
}

}  // TEST_SUITE
