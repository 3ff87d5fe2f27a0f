#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "unrectify/dag.hpp"

namespace unrectify {

struct Trace {
  std::vector<Vector> values;     // by topological node index
  std::vector<Pattern> patterns;  // by arc position; empty for non-activation arcs
  Vector output;
};

/// Evaluates nodes in topological order, stacking concat inputs by port.
/// Throws DimMismatch on a wrong input size, NonFinite on overflow.
Trace forward(const DagNet& net, const Vector& x);

/// Activation arcs of computable_subgraph(a), ordered by target node
/// (topological) and then arc id.
struct SignaturePlan {
  std::size_t node = 0;
  std::vector<std::size_t> arcs;  // arc positions
};

/// Throws UnknownNode, TransformInSubgraph.
SignaturePlan signature_plan(const DagNet& net, std::string_view a);

struct RegionSignature {
  struct Entry {
    NodeId node;
    std::size_t arc = 0;
    Pattern pattern;
    friend bool operator==(const Entry&, const Entry&) = default;
  };
  std::vector<Entry> entries;

  /// Patterns concatenated in entry order.
  Pattern key() const;
  friend bool operator==(const RegionSignature&, const RegionSignature&) = default;
};

RegionSignature signature(const DagNet& net, std::string_view a, const Vector& x);
RegionSignature signature(const DagNet& net, const SignaturePlan& plan,
                          const Trace& trace);

/// Flattened signature used for grouping: the plan's patterns, each prefixed
/// by its length so distinct layouts never collide.
Pattern signature_key(const SignaturePlan& plan, const Trace& trace);

/// 64-bit hash of a flattened key (grouping only; equality is decided on
/// the full key).
std::uint64_t hash_key(const Pattern& key);

struct KeyHash {
  std::size_t operator()(const Pattern& key) const {
    return static_cast<std::size_t>(hash_key(key));
  }
};

/// Stack of the level-n node outputs ordered by node-id; level 0 is x.
/// Throws LevelOutOfRange.
Vector level_output(const DagNet& net, std::size_t n, const Vector& x);
Vector level_output(const DagNet& net, std::size_t n, const Trace& trace);

struct AffineMap {
  Matrix A;
  Vector b;
};

/// Affine map of the region containing x: forward(y) = A y + b for every y
/// with the same signature. Throws TransformPresent.
AffineMap region_affine(const DagNet& net, const Vector& x);

}  // namespace unrectify
