#include "unrectify/forward.hpp"

#include <algorithm>
#include <string>

#include "unrectify/error.hpp"

namespace unrectify {

Trace forward(const DagNet& net, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != net.input_dim())
    throw Error(ErrorCode::kDimMismatch,
                "input has " + std::to_string(x.size()) + " entries, net expects " +
                    std::to_string(net.input_dim()));
  const std::size_t n = net.node_count();
  Trace t;
  t.values.resize(n);
  t.patterns.resize(net.arcs().size());
  t.values[0] = x;
  for (std::size_t u = 1; u < n; ++u) {
    Vector& value = t.values[u];
    value.resize(static_cast<Eigen::Index>(net.node_dim(u)));
    for (auto a : net.in_arcs(u)) {
      const ArcOp& op = net.arcs()[a].op;
      auto r = op.apply(t.values[net.arc_source(a)]);
      value.segment(static_cast<Eigen::Index>(net.arc_offset(a)), r.out.size()) = r.out;
      t.patterns[a] = std::move(r.pattern);
    }
    if (!value.allFinite())
      throw Error(ErrorCode::kNonFinite, "non-finite value at node " + net.nodes()[u]);
  }
  t.output = t.values[n - 1];
  return t;
}

SignaturePlan signature_plan(const DagNet& net, std::string_view a) {
  SignaturePlan plan;
  plan.node = net.index_of(a);
  const auto keep = net.ancestors(plan.node);
  for (std::size_t u = 0; u <= plan.node; ++u) {
    if (!keep[u]) continue;
    for (auto arc : net.in_arcs(u)) {
      const ArcOp& op = net.arcs()[arc].op;
      if (op.is_transform())
        throw Error(ErrorCode::kTransformInSubgraph,
                    "arc " + std::to_string(net.arcs()[arc].id) + " into " +
                        net.nodes()[u] + " is a transform");
      if (op.is_activation()) plan.arcs.push_back(arc);
    }
  }
  // in_arcs is port-ordered; the signature orders a node's arcs by id.
  auto by_target = [&](std::size_t x, std::size_t y) {
    const auto tx = net.arc_target(x), ty = net.arc_target(y);
    return tx != ty ? tx < ty : x < y;
  };
  std::sort(plan.arcs.begin(), plan.arcs.end(), by_target);
  return plan;
}

Pattern RegionSignature::key() const {
  Pattern k;
  for (const auto& e : entries) k.insert(k.end(), e.pattern.begin(), e.pattern.end());
  return k;
}

RegionSignature signature(const DagNet& net, const SignaturePlan& plan,
                          const Trace& trace) {
  RegionSignature sig;
  sig.entries.reserve(plan.arcs.size());
  for (auto a : plan.arcs)
    sig.entries.push_back({net.nodes()[net.arc_target(a)], net.arcs()[a].id,
                           trace.patterns[a]});
  return sig;
}

RegionSignature signature(const DagNet& net, std::string_view a, const Vector& x) {
  const SignaturePlan plan = signature_plan(net, a);
  return signature(net, plan, forward(net, x));
}

Pattern signature_key(const SignaturePlan& plan, const Trace& trace) {
  std::size_t total = plan.arcs.size();
  for (auto a : plan.arcs) total += trace.patterns[a].size();
  Pattern key;
  key.reserve(total);
  for (auto a : plan.arcs) {
    const Pattern& p = trace.patterns[a];
    key.push_back(p.size());
    key.insert(key.end(), p.begin(), p.end());
  }
  return key;
}

std::uint64_t hash_key(const Pattern& key) {
  std::uint64_t h = 0x243f6a8885a308d3ULL ^ key.size();
  for (auto w : key) {
    h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdULL;
  }
  h ^= h >> 33;
  h *= 0xc4ceb9fe1a85ec53ULL;
  h ^= h >> 33;
  return h;
}

Vector level_output(const DagNet& net, std::size_t n, const Trace& trace) {
  const LevelMap& lm = net.levels();
  if (n > lm.L)
    throw Error(ErrorCode::kLevelOutOfRange,
                "level " + std::to_string(n) + " > L = " + std::to_string(lm.L));
  Eigen::Index size = 0;
  for (const auto& id : lm.levels[n]) size += trace.values[net.index_of(id)].size();
  Vector out(size);
  Eigen::Index off = 0;
  for (const auto& id : lm.levels[n]) {
    const Vector& v = trace.values[net.index_of(id)];
    out.segment(off, v.size()) = v;
    off += v.size();
  }
  return out;
}

Vector level_output(const DagNet& net, std::size_t n, const Vector& x) {
  if (n > net.levels().L)
    throw Error(ErrorCode::kLevelOutOfRange,
                "level " + std::to_string(n) + " > L = " + std::to_string(net.levels().L));
  return level_output(net, n, forward(net, x));
}

AffineMap region_affine(const DagNet& net, const Vector& x) {
  if (net.has_transform())
    throw Error(ErrorCode::kTransformPresent, "region maps need a transform-free net");
  const Trace trace = forward(net, x);
  const auto in = static_cast<Eigen::Index>(net.input_dim());
  const std::size_t n = net.node_count();
  std::vector<AffineMap> maps(n);
  maps[0] = {Matrix::Identity(in, in), Vector::Zero(in)};
  for (std::size_t u = 1; u < n; ++u) {
    const auto dim = static_cast<Eigen::Index>(net.node_dim(u));
    AffineMap& m = maps[u];
    m.A.resize(dim, in);
    m.b.resize(dim);
    for (auto a : net.in_arcs(u)) {
      const ArcOp& op = net.arcs()[a].op;
      const AffineMap& src = maps[net.arc_source(a)];
      Matrix A = src.A;
      Vector b = src.b;
      if (op.has_weight()) {
        A = op.weight() * src.A;
        b = op.weight() * src.b;
        if (op.has_bias()) b += op.bias();
      }
      if (op.is_activation()) {
        const auto f = activation_frozen_affine(op.activation(), trace.patterns[a],
                                                op.pre_dim());
        A = f.slope * A;
        b = f.slope * b + f.offset;
      }
      const auto off = static_cast<Eigen::Index>(net.arc_offset(a));
      m.A.middleRows(off, A.rows()) = A;
      m.b.segment(off, b.size()) = b;
    }
  }
  return std::move(maps[n - 1]);
}

}  // namespace unrectify
