#include <doctest.h>

#include <set>

#include "../support/skip_ladder.hpp"
#include "../support/random_nets.hpp"
#include "unrectify/builders.hpp"
#include "unrectify/error.hpp"
#include "unrectify/forward.hpp"
#include "unrectify/random.hpp"

using namespace unrectify;

namespace {

Vector relu(const Vector& v) { return v.cwiseMax(0.0); }

}  // namespace

TEST_SUITE("forward") {

TEST_CASE("identity chain returns the input") {
  DagBuilder b("I", 3);
  b.add_arc("I", "a", ArcOp::identity(3));
  b.add_arc("a", "O", ArcOp::identity(3));
  const DagNet net = b.freeze();
  NormalSampler n(1);
  const Vector x = n.vector(3);
  CHECK(forward(net, x).output == x);
  CHECK_THROWS_AS(forward(net, n.vector(2)), Error);
}

TEST_CASE("resnet block equals rho(x - M2 rho(M1 x))") {
  NormalSampler n(2);
  for (int trial = 0; trial < 20; ++trial) {
    AffineLayer M1{n.matrix(5, 4), n.vector(5)};
    AffineLayer M2{n.matrix(4, 5), n.vector(4)};
    const DagNet net = build_resnet_block(M1, M2);
    const Vector x = n.vector(4);
    const Vector direct = relu(x - (M2.W * relu(M1.W * x + M1.b) + M2.b));
    CHECK((forward(net, x).output - direct).norm() <= 1e-12 * (1 + direct.norm()));
  }
}

TEST_CASE("resnet with M2 = 0 computes rho(x)") {
  NormalSampler n(3);
  const DagNet net = build_resnet_block({n.matrix(3, 3), n.vector(3)},
                                        {Matrix::Zero(3, 3), Vector::Zero(3)});
  const Vector x = n.vector(3);
  CHECK(forward(net, x).output == relu(x));
}

TEST_CASE("attention outputs are convex combinations of value vectors") {
  NormalSampler n(4);
  const Matrix Wq = n.matrix(3, 3), Wk = n.matrix(3, 3), Wv = n.matrix(3, 3);
  const DagNet net = build_attention_toy(Wq, Wk, Wv, 2.0, 4);
  const Vector x = n.vector(12);
  const Trace t = forward(net, x);
  const Vector& p = t.values[net.index_of("scores")];
  CHECK(p.size() == 16);
  for (Eigen::Index i = 0; i < 4; ++i) {
    // Direct oracle: softmax of the cosine-score row i, then mix values.
    Vector w(4);
    for (Eigen::Index j = 0; j < 4; ++j) {
      const Vector q = Wq * x.segment(i * 3, 3), k = Wk * x.segment(j * 3, 3);
      w(j) = 2.0 * q.dot(k) / (q.norm() * k.norm());
    }
    w = (w.array() - w.maxCoeff()).exp();
    w /= w.sum();
    Vector mix = Vector::Zero(3);
    for (Eigen::Index j = 0; j < 4; ++j) mix += w(j) * (Wv * x.segment(j * 3, 3));
    CHECK((t.output.segment(i * 3, 3) - mix).norm() <= 1e-12 * (1 + mix.norm()));
    CHECK(w.minCoeff() >= 0.0);
  }
}

TEST_CASE("identical tokens give identical outputs") {
  NormalSampler n(5);
  const DagNet net = build_random_attention(3, 6);
  const Vector token = n.vector(3);
  Vector x(12);
  for (int i = 0; i < 4; ++i) x.segment(i * 3, 3) = token;
  const Vector y = forward(net, x).output;
  for (int i = 1; i < 4; ++i) CHECK((y.segment(i * 3, 3) - y.segment(0, 3)).norm() <= 1e-12);
}

TEST_CASE("large lambda selects a single value vector") {
  NormalSampler n(7);
  const Matrix Wq = n.matrix(3, 3), Wk = n.matrix(3, 3), Wv = n.matrix(3, 3);
  const DagNet net = build_attention_toy(Wq, Wk, Wv, 1e4, 4);
  const Vector x = n.vector(12);
  const Vector y = forward(net, x).output;
  for (Eigen::Index i = 0; i < 4; ++i) {
    Eigen::Index best = 0;
    double top = -2.0;
    const Vector q = Wq * x.segment(i * 3, 3);
    for (Eigen::Index j = 0; j < 4; ++j) {
      const Vector k = Wk * x.segment(j * 3, 3);
      const double s = q.dot(k) / (q.norm() * k.norm());
      if (s > top) top = s, best = j;
    }
    const Vector v = Wv * x.segment(best * 3, 3);
    CHECK((y.segment(i * 3, 3) - v).norm() <= 1e-6 * (1 + v.norm()));
  }
}

TEST_CASE("ReLU layer on R^2 has four sign-pattern signatures") {
  const DagNet net = build_series(2, {{Matrix::Identity(2, 2), Vector::Zero(2), Relu{}}});
  std::set<Pattern> keys;
  for (double a : {-1.0, 1.0})
    for (double b : {-1.0, 1.0}) keys.insert(signature(net, "out", Vector{{a, b}}).key());
  CHECK(keys.size() == 4);
}

TEST_CASE("MaxLU2 attains three signatures") {
  const DagNet net = build_maxlu();
  std::set<Pattern> keys;
  Xoshiro256pp rng(8);
  for (int i = 0; i < 2000; ++i)
    keys.insert(signature(net, "out", Vector{{rng.uniform(-2, 2), rng.uniform(-2, 2)}}).key());
  CHECK(keys.size() == 3);
}

TEST_CASE("signatures are deterministic and refuse transforms") {
  const DagNet net = build_fusion_stack(2, 4, 1);
  NormalSampler n(9);
  const Vector x = n.vector(4);
  CHECK(signature(net, net.output(), x) == signature(net, net.output(), x));
  const DagNet att = build_random_attention(3, 1);
  try {
    signature(att, att.output(), Vector::Zero(12));
    FAIL("expected TransformInSubgraph");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kTransformInSubgraph);
  }
  CHECK_NOTHROW(signature(att, "qk", Vector::Ones(12)));
}

TEST_CASE("signature at b is a sub-list of the signature at a") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const DagNet net = testnet::random_dag(seed);
    NormalSampler n(seed);
    const Vector x = n.vector(static_cast<Eigen::Index>(net.input_dim()));
    const auto full = signature(net, net.output(), x);
    for (const auto& id : net.nodes()) {
      const auto part = signature(net, id, x);
      std::size_t k = 0;
      for (const auto& e : full.entries)
        if (k < part.entries.size() && e == part.entries[k]) ++k;
      CHECK(k == part.entries.size());
    }
  }
}

TEST_CASE("level outputs") {
  const DagNet net = build_fusion_stack(2, 3, 4);
  NormalSampler n(10);
  const Vector x = n.vector(3);
  CHECK(level_output(net, 0, x) == x);
  CHECK(level_output(net, net.levels().L, x) == forward(net, x).output);
  const Trace t = forward(net, x);
  const Vector l1 = level_output(net, 1, x);
  // Level 1 holds L01.bottom and L01.top, stacked in id order.
  CHECK(l1.head(3) == t.values[net.index_of("L01.bottom")]);
  CHECK(l1.tail(3) == t.values[net.index_of("L01.top")]);
  CHECK_THROWS_AS(level_output(net, net.levels().L + 1, x), Error);
}

TEST_CASE("skip ladder level 5 stacks s and t") {
  const DagNet net = testnet::skip_ladder();
  const Vector x{{0.7}};
  const Trace t = forward(net, x);
  const Vector l5 = level_output(net, 5, x);
  REQUIRE(l5.size() == 5);
  CHECK(l5.head(2) == t.values[net.index_of("s")]);
  CHECK(l5.tail(3) == t.values[net.index_of("t")]);
}

TEST_CASE("region_affine") {
  NormalSampler n(11);
  SUBCASE("pure affine net") {
    const Matrix W = n.matrix(3, 2);
    const Vector b = n.vector(3);
    DagBuilder bld("I", 2);
    bld.add_arc("I", "O", ArcOp::affine(W, b));
    const auto m = region_affine(bld.freeze(), n.vector(2));
    CHECK(m.A == W);
    CHECK(m.b == b);
  }
  SUBCASE("all-active ReLU chain") {
    const Matrix W1 = Matrix::Identity(2, 2) * 2.0, W2 = Matrix::Identity(2, 2) * 3.0;
    const DagNet net = build_series(2, {{W1, Vector::Zero(2), Relu{}}, {W2, Vector::Zero(2), Relu{}}});
    const auto m = region_affine(net, Vector::Ones(2));
    CHECK((m.A - W2 * W1).norm() == 0.0);
  }
  SUBCASE("transforms are refused") {
    const DagNet att = build_random_attention(3, 1);
    CHECK_THROWS_AS(region_affine(att, Vector::Ones(12)), Error);
  }
}

TEST_CASE("inserting a duplicate relay keeps signatures") {
  NormalSampler n(12);
  const Matrix W = n.matrix(3, 3);
  const Vector b = n.vector(3);
  DagBuilder plain("I", 3);
  plain.add_arc("I", "O", ArcOp::activation_affine(Relu{}, W, b));
  DagBuilder dup("I", 3);
  dup.add_arc("I", "d", ArcOp::identity(3));
  dup.add_arc("d", "O", ArcOp::activation_affine(Relu{}, W, b));
  const DagNet a = plain.freeze(), c = dup.freeze();
  for (int i = 0; i < 100; ++i) {
    const Vector x = n.vector(3);
    CHECK(signature(a, "O", x).key() == signature(c, "O", x).key());
  }
}

TEST_CASE("forward is continuous across region boundaries") {
  const DagNet net = build_fusion_stack(2, 3, 13);
  NormalSampler n(14);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = n.vector(3), d = n.vector(3);
    // Bisect to a point where the output-node signature changes.
    double lo = 0.0, hi = 4.0;
    const Pattern k0 = signature(net, net.output(), x).key();
    if (signature(net, net.output(), x + hi * d).key() == k0) continue;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (signature(net, net.output(), x + mid * d).key() == k0 ? lo : hi) = mid;
    }
    const Vector a = forward(net, x + lo * d).output, c = forward(net, x + hi * d).output;
    CHECK((a - c).norm() <= 1e-9 * (1 + a.norm()));
  }
}

}  // TEST_SUITE
