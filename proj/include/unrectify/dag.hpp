#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "unrectify/ops.hpp"

namespace unrectify {

using NodeId = std::string;

/// A labelled arc (from, to, op). `port` fixes the stacking position at a
/// concatenation node; `id` is a stable label kept through sub-graphs and
/// serialization.
struct Arc {
  std::size_t id = 0;
  NodeId from;
  NodeId to;
  std::size_t port = 0;
  ArcOp op;
};

/// Mutable graph description. Nothing is checked until validate/freeze.
struct DagDraft {
  NodeId input;
  std::size_t input_dim = 0;
  std::vector<NodeId> nodes;  // includes the input node
  std::vector<Arc> arcs;
};

enum class ViolationKind {
  kCycle,
  kUnreachable,
  kNoPathToOutput,
  kMultipleOutputs,
  kNoOutput,
  kInputHasIncoming,
  kDimMismatch,
  kPortConflict,
  kUnknownNode,
  kDuplicateNode,
  kInvalidOp,
};

std::string to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(ViolationKind kind) const;
  std::string summary() const;
};

ValidationReport validate(const DagDraft& draft);

/// Deterministic Kahn order, ties broken by node-id. Throws CycleDetected.
std::vector<NodeId> topological_order(const DagDraft& draft);

/// Longest-path levels. `levels[n]` lists the nodes with l = n, sorted by id.
struct LevelMap {
  std::map<NodeId, std::size_t> l;
  std::size_t L = 0;
  std::vector<std::vector<NodeId>> levels;

  std::size_t at(const NodeId& node) const;
  std::size_t count(std::size_t n) const { return levels.at(n).size(); }
};

class DagNet;

/// Validated, immutable network. Copies share one immutable body, so a
/// frozen net can be handed to any number of threads.
class DagNet {
 public:
  /// Validates and freezes; throws InvalidGraph carrying the report summary.
  static DagNet freeze(DagDraft draft);

  const NodeId& input() const;
  const NodeId& output() const;
  std::size_t input_dim() const;
  std::size_t output_dim() const;

  /// Nodes in topological order; node indices below refer to this order.
  const std::vector<NodeId>& nodes() const;
  std::size_t node_count() const { return nodes().size(); }
  bool has_node(std::string_view id) const;
  /// Throws UnknownNode.
  std::size_t index_of(std::string_view id) const;
  std::size_t node_dim(std::size_t node) const;

  /// Arcs sorted by id; arc positions below refer to this order.
  const std::vector<Arc>& arcs() const;
  std::size_t arc_source(std::size_t arc) const;
  std::size_t arc_target(std::size_t arc) const;
  /// Incoming arc positions sorted by port.
  const std::vector<std::size_t>& in_arcs(std::size_t node) const;
  /// Outgoing arc positions sorted by id.
  const std::vector<std::size_t>& out_arcs(std::size_t node) const;
  /// Offset of an incoming arc's block inside its target node's vector.
  std::size_t arc_offset(std::size_t arc) const;

  const LevelMap& levels() const;
  std::size_t level_of(std::size_t node) const;

  /// Topological indices of nodes on some input -> node path.
  std::vector<bool> ancestors(std::size_t node) const;

  bool has_transform() const;

  DagDraft to_draft() const;

  /// Same topology with every op replaced; ops[i] belongs to arcs()[i].
  DagNet with_ops(std::vector<ArcOp> ops) const;

 private:
  struct Body;
  explicit DagNet(std::shared_ptr<const Body> body) : body_(std::move(body)) {}
  std::shared_ptr<const Body> body_;
};

/// Incremental construction with eager checks: the from-node must exist, a
/// cycle-closing arc raises CycleCreated, a shape mismatch DimMismatch. The
/// to-node is created on first use.
class DagBuilder {
 public:
  DagBuilder(NodeId input, std::size_t input_dim);

  /// Appends an arc at the next free port of `to`; returns its id.
  std::size_t add_arc(const NodeId& from, const NodeId& to, ArcOp op);
  std::size_t add_arc(const NodeId& from, const NodeId& to, std::size_t port,
                      ArcOp op);

  bool has_node(const NodeId& id) const;
  std::size_t node_dim(const NodeId& id) const;
  const DagDraft& draft() const { return draft_; }

  DagNet freeze() const { return DagNet::freeze(draft_); }

 private:
  bool reaches(const NodeId& from, const NodeId& to) const;

  DagDraft draft_;
  std::map<NodeId, std::size_t> dims_;
  std::map<NodeId, std::vector<std::size_t>> out_;  // arc positions
};

LevelMap l_values(const DagNet& net);

/// Every node and arc on some input -> a path; output node a. Throws
/// UnknownNode.
DagNet computable_subgraph(const DagNet& net, std::string_view a);

}  // namespace unrectify
