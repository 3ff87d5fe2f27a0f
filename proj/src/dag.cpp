#include "unrectify/dag.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_map>

#include "unrectify/error.hpp"

namespace unrectify {

std::string to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kCycle: return "cycle";
    case ViolationKind::kUnreachable: return "unreachable";
    case ViolationKind::kNoPathToOutput: return "no path to output";
    case ViolationKind::kMultipleOutputs: return "multiple outputs";
    case ViolationKind::kNoOutput: return "no output";
    case ViolationKind::kInputHasIncoming: return "input has incoming arcs";
    case ViolationKind::kDimMismatch: return "dimension mismatch";
    case ViolationKind::kPortConflict: return "port conflict";
    case ViolationKind::kUnknownNode: return "unknown node";
    case ViolationKind::kDuplicateNode: return "duplicate node";
    case ViolationKind::kInvalidOp: return "invalid op";
  }
  return "unknown";
}

bool ValidationReport::has(ViolationKind kind) const {
  return std::any_of(violations.begin(), violations.end(),
                     [kind](const Violation& v) { return v.kind == kind; });
}

std::string ValidationReport::summary() const {
  std::string s;
  for (const auto& v : violations) {
    if (!s.empty()) s += "; ";
    s += to_string(v.kind);
    if (!v.detail.empty()) s += " (" + v.detail + ")";
  }
  return s;
}

std::size_t LevelMap::at(const NodeId& node) const {
  auto it = l.find(node);
  if (it == l.end()) throw Error(ErrorCode::kUnknownNode, node);
  return it->second;
}

namespace {

struct Indexed {
  std::unordered_map<NodeId, std::size_t> index;
  std::vector<std::size_t> from, to;  // per arc, npos when unknown
  std::vector<bool> arc_ok;
};

constexpr std::size_t npos = static_cast<std::size_t>(-1);

Indexed index_draft(const DagDraft& draft) {
  Indexed ix;
  for (std::size_t i = 0; i < draft.nodes.size(); ++i)
    ix.index.emplace(draft.nodes[i], i);
  for (const auto& arc : draft.arcs) {
    auto f = ix.index.find(arc.from);
    auto t = ix.index.find(arc.to);
    ix.from.push_back(f == ix.index.end() ? npos : f->second);
    ix.to.push_back(t == ix.index.end() ? npos : t->second);
    ix.arc_ok.push_back(ix.from.back() != npos && ix.to.back() != npos);
  }
  return ix;
}

// Kahn's algorithm with a node-id ordered ready set. Returns node indices;
// fewer than nodes.size() entries means a cycle.
std::vector<std::size_t> kahn(const DagDraft& draft, const Indexed& ix) {
  const std::size_t n = draft.nodes.size();
  std::vector<std::size_t> indeg(n, 0);
  std::vector<std::vector<std::size_t>> succ(n);
  for (std::size_t a = 0; a < draft.arcs.size(); ++a) {
    if (!ix.arc_ok[a]) continue;
    ++indeg[ix.to[a]];
    succ[ix.from[a]].push_back(ix.to[a]);
  }
  auto by_id = [&](std::size_t x, std::size_t y) {
    return draft.nodes[x] < draft.nodes[y] || (draft.nodes[x] == draft.nodes[y] && x < y);
  };
  std::set<std::size_t, decltype(by_id)> ready(by_id);
  for (std::size_t i = 0; i < n; ++i)
    if (indeg[i] == 0) ready.insert(i);
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    const std::size_t u = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(u);
    for (std::size_t v : succ[u])
      if (--indeg[v] == 0) ready.insert(v);
  }
  return order;
}

}  // namespace

ValidationReport validate(const DagDraft& draft) {
  ValidationReport report;
  auto add = [&](ViolationKind k, std::string detail) {
    report.violations.push_back({k, std::move(detail)});
  };

  {
    std::set<NodeId> seen;
    for (const auto& id : draft.nodes)
      if (!seen.insert(id).second) add(ViolationKind::kDuplicateNode, id);
  }
  const Indexed ix = index_draft(draft);
  const auto input_it = ix.index.find(draft.input);
  if (input_it == ix.index.end()) {
    add(ViolationKind::kUnknownNode, "input " + draft.input);
    return report;
  }
  const std::size_t input = input_it->second;

  {
    std::set<std::size_t> ids;
    std::set<std::pair<NodeId, std::size_t>> ports;
    for (std::size_t a = 0; a < draft.arcs.size(); ++a) {
      const Arc& arc = draft.arcs[a];
      if (!ids.insert(arc.id).second)
        add(ViolationKind::kInvalidOp, "duplicate arc id " + std::to_string(arc.id));
      if (ix.from[a] == npos) add(ViolationKind::kUnknownNode, arc.from);
      if (ix.to[a] == npos) add(ViolationKind::kUnknownNode, arc.to);
      if (!ix.arc_ok[a]) continue;
      if (ix.to[a] == input)
        add(ViolationKind::kInputHasIncoming, arc.from + " -> " + arc.to);
      if (!ports.insert({arc.to, arc.port}).second)
        add(ViolationKind::kPortConflict,
            arc.to + " port " + std::to_string(arc.port));
      try {
        arc.op.check();
      } catch (const Error& e) {
        add(ViolationKind::kInvalidOp,
            "arc " + std::to_string(arc.id) + ": " + e.what());
      }
    }
  }

  const std::size_t n = draft.nodes.size();
  const auto order = kahn(draft, ix);
  if (order.size() != n) {
    std::vector<bool> done(n, false);
    for (auto u : order) done[u] = true;
    std::string stuck;
    for (std::size_t i = 0; i < n; ++i)
      if (!done[i]) stuck += (stuck.empty() ? "" : ",") + draft.nodes[i];
    add(ViolationKind::kCycle, stuck);
    return report;
  }

  std::vector<std::vector<std::size_t>> out(n), in(n);
  for (std::size_t a = 0; a < draft.arcs.size(); ++a) {
    if (!ix.arc_ok[a]) continue;
    out[ix.from[a]].push_back(a);
    in[ix.to[a]].push_back(a);
  }

  std::vector<bool> reached(n, false);
  reached[input] = true;
  for (auto u : order) {
    if (!reached[u]) continue;
    for (auto a : out[u]) reached[ix.to[a]] = true;
  }
  for (auto u : order)
    if (!reached[u]) add(ViolationKind::kUnreachable, draft.nodes[u]);

  std::vector<std::size_t> sinks;
  for (auto u : order)
    if (out[u].empty()) sinks.push_back(u);
  if (sinks.empty()) {
    add(ViolationKind::kNoOutput, "");
  } else if (sinks.size() > 1) {
    std::string names;
    for (auto s : sinks) names += (names.empty() ? "" : ",") + draft.nodes[s];
    add(ViolationKind::kMultipleOutputs, names);
  } else {
    std::vector<bool> reaches(n, false);
    reaches[sinks.front()] = true;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
      for (auto a : out[*it])
        if (reaches[ix.to[a]]) reaches[*it] = true;
    for (auto u : order)
      if (!reaches[u]) add(ViolationKind::kNoPathToOutput, draft.nodes[u]);
  }

  std::vector<std::size_t> dim(n, 0);
  dim[input] = draft.input_dim;
  for (auto u : order) {
    for (auto a : in[u]) {
      const Arc& arc = draft.arcs[a];
      const std::size_t src = dim[ix.from[a]];
      if (arc.op.in_dim() != src) {
        add(ViolationKind::kDimMismatch,
            "arc " + std::to_string(arc.id) + " " + arc.from + " -> " + arc.to +
                " expects " + std::to_string(arc.op.in_dim()) + ", node has " +
                std::to_string(src));
      }
      try {
        dim[u] += arc.op.out_dim();
      } catch (const Error& e) {
        add(ViolationKind::kDimMismatch,
            "arc " + std::to_string(arc.id) + ": " + e.what());
      }
    }
  }
  return report;
}

std::vector<NodeId> topological_order(const DagDraft& draft) {
  const Indexed ix = index_draft(draft);
  for (std::size_t a = 0; a < draft.arcs.size(); ++a)
    if (!ix.arc_ok[a])
      throw Error(ErrorCode::kUnknownNode,
                  "arc " + draft.arcs[a].from + " -> " + draft.arcs[a].to);
  const auto order = kahn(draft, ix);
  if (order.size() != draft.nodes.size())
    throw Error(ErrorCode::kCycleDetected, "graph contains a directed cycle");
  std::vector<NodeId> ids;
  ids.reserve(order.size());
  for (auto u : order) ids.push_back(draft.nodes[u]);
  return ids;
}

// ---------------------------------------------------------------------------
// DagNet

struct DagNet::Body {
  NodeId input;
  std::size_t input_dim = 0;
  std::vector<NodeId> nodes;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::size_t> dims;
  std::vector<Arc> arcs;
  std::vector<std::size_t> source, target, offset;
  std::vector<std::vector<std::size_t>> in, out;
  LevelMap levels;
  std::vector<std::size_t> level;
  bool has_transform = false;
};

DagNet DagNet::freeze(DagDraft draft) {
  const ValidationReport report = validate(draft);
  if (!report.ok()) throw Error(ErrorCode::kInvalidGraph, report.summary());

  auto body = std::make_shared<Body>();
  body->input = draft.input;
  body->input_dim = draft.input_dim;
  body->nodes = topological_order(draft);
  const std::size_t n = body->nodes.size();
  for (std::size_t i = 0; i < n; ++i) body->index.emplace(body->nodes[i], i);

  std::sort(draft.arcs.begin(), draft.arcs.end(),
            [](const Arc& a, const Arc& b) { return a.id < b.id; });
  body->arcs = std::move(draft.arcs);
  const std::size_t m = body->arcs.size();
  body->in.resize(n);
  body->out.resize(n);
  for (std::size_t a = 0; a < m; ++a) {
    const Arc& arc = body->arcs[a];
    body->source.push_back(body->index.at(arc.from));
    body->target.push_back(body->index.at(arc.to));
    body->in[body->target[a]].push_back(a);
    body->out[body->source[a]].push_back(a);
  }
  body->offset.assign(m, 0);
  body->dims.assign(n, 0);
  body->dims[0] = body->input_dim;
  for (std::size_t u = 0; u < n; ++u) {
    auto& in = body->in[u];
    std::sort(in.begin(), in.end(), [&](std::size_t a, std::size_t b) {
      return body->arcs[a].port < body->arcs[b].port;
    });
    std::size_t off = 0;
    for (auto a : in) {
      body->offset[a] = off;
      off += body->arcs[a].op.out_dim();
    }
    if (u != 0) body->dims[u] = off;
  }

  body->level.assign(n, 0);
  for (std::size_t u = 0; u < n; ++u)
    for (auto a : body->out[u])
      body->level[body->target[a]] =
          std::max(body->level[body->target[a]], body->level[u] + 1);
  LevelMap& lm = body->levels;
  lm.L = n == 0 ? 0 : *std::max_element(body->level.begin(), body->level.end());
  lm.levels.assign(lm.L + 1, {});
  for (std::size_t u = 0; u < n; ++u) {
    lm.l.emplace(body->nodes[u], body->level[u]);
    lm.levels[body->level[u]].push_back(body->nodes[u]);
  }
  for (auto& ids : lm.levels) std::sort(ids.begin(), ids.end());

  body->has_transform = std::any_of(body->arcs.begin(), body->arcs.end(),
                                    [](const Arc& a) { return a.op.is_transform(); });
  return DagNet(std::move(body));
}

const NodeId& DagNet::input() const { return body_->input; }
const NodeId& DagNet::output() const { return body_->nodes.back(); }
std::size_t DagNet::input_dim() const { return body_->input_dim; }
std::size_t DagNet::output_dim() const { return body_->dims.back(); }
const std::vector<NodeId>& DagNet::nodes() const { return body_->nodes; }

bool DagNet::has_node(std::string_view id) const {
  return body_->index.count(std::string(id)) > 0;
}

std::size_t DagNet::index_of(std::string_view id) const {
  auto it = body_->index.find(std::string(id));
  if (it == body_->index.end())
    throw Error(ErrorCode::kUnknownNode, std::string(id));
  return it->second;
}

std::size_t DagNet::node_dim(std::size_t node) const { return body_->dims.at(node); }
const std::vector<Arc>& DagNet::arcs() const { return body_->arcs; }
std::size_t DagNet::arc_source(std::size_t arc) const { return body_->source.at(arc); }
std::size_t DagNet::arc_target(std::size_t arc) const { return body_->target.at(arc); }

const std::vector<std::size_t>& DagNet::in_arcs(std::size_t node) const {
  return body_->in.at(node);
}
const std::vector<std::size_t>& DagNet::out_arcs(std::size_t node) const {
  return body_->out.at(node);
}
std::size_t DagNet::arc_offset(std::size_t arc) const { return body_->offset.at(arc); }
const LevelMap& DagNet::levels() const { return body_->levels; }
std::size_t DagNet::level_of(std::size_t node) const { return body_->level.at(node); }
bool DagNet::has_transform() const { return body_->has_transform; }

std::vector<bool> DagNet::ancestors(std::size_t node) const {
  std::vector<bool> keep(node_count(), false);
  keep.at(node) = true;
  // Topological indices: every predecessor has a smaller index.
  for (std::size_t u = node + 1; u-- > 0;) {
    if (!keep[u]) continue;
    for (auto a : body_->in[u]) keep[body_->source[a]] = true;
  }
  return keep;
}

DagDraft DagNet::to_draft() const {
  return DagDraft{body_->input, body_->input_dim, body_->nodes, body_->arcs};
}

DagNet DagNet::with_ops(std::vector<ArcOp> ops) const {
  if (ops.size() != body_->arcs.size())
    throw Error(ErrorCode::kDimMismatch,
                "expected " + std::to_string(body_->arcs.size()) + " ops, got " +
                    std::to_string(ops.size()));
  auto body = std::make_shared<Body>(*body_);
  for (std::size_t a = 0; a < ops.size(); ++a) {
    const ArcOp& old = body->arcs[a].op;
    if (ops[a].in_dim() != old.in_dim() || ops[a].out_dim() != old.out_dim())
      throw Error(ErrorCode::kDimMismatch,
                  "replacement op changes the shape of arc " +
                      std::to_string(body->arcs[a].id));
    body->arcs[a].op = std::move(ops[a]);
  }
  body->has_transform = std::any_of(body->arcs.begin(), body->arcs.end(),
                                    [](const Arc& a) { return a.op.is_transform(); });
  return DagNet(std::move(body));
}

LevelMap l_values(const DagNet& net) { return net.levels(); }

DagNet computable_subgraph(const DagNet& net, std::string_view a) {
  const std::size_t target = net.index_of(a);
  const auto keep = net.ancestors(target);
  if (!keep[0])
    throw Error(ErrorCode::kUnreachable, std::string(a) + " has no path from the input");
  DagDraft draft;
  draft.input = net.input();
  draft.input_dim = net.input_dim();
  for (std::size_t u = 0; u < net.node_count(); ++u)
    if (keep[u]) draft.nodes.push_back(net.nodes()[u]);
  for (std::size_t arc = 0; arc < net.arcs().size(); ++arc)
    if (keep[net.arc_target(arc)]) draft.arcs.push_back(net.arcs()[arc]);
  return DagNet::freeze(std::move(draft));
}

// ---------------------------------------------------------------------------
// DagBuilder

DagBuilder::DagBuilder(NodeId input, std::size_t input_dim) {
  draft_.input = input;
  draft_.input_dim = input_dim;
  draft_.nodes.push_back(input);
  dims_[input] = input_dim;
}

bool DagBuilder::has_node(const NodeId& id) const { return dims_.count(id) > 0; }

std::size_t DagBuilder::node_dim(const NodeId& id) const {
  auto it = dims_.find(id);
  if (it == dims_.end()) throw Error(ErrorCode::kUnknownNode, id);
  return it->second;
}

bool DagBuilder::reaches(const NodeId& from, const NodeId& to) const {
  std::vector<NodeId> stack{from};
  std::set<NodeId> seen{from};
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    if (u == to) return true;
    auto it = out_.find(u);
    if (it == out_.end()) continue;
    for (auto a : it->second) {
      const NodeId& v = draft_.arcs[a].to;
      if (seen.insert(v).second) stack.push_back(v);
    }
  }
  return false;
}

std::size_t DagBuilder::add_arc(const NodeId& from, const NodeId& to, ArcOp op) {
  std::size_t port = 0;
  for (const auto& arc : draft_.arcs)
    if (arc.to == to) port = std::max(port, arc.port + 1);
  return add_arc(from, to, port, std::move(op));
}

std::size_t DagBuilder::add_arc(const NodeId& from, const NodeId& to,
                                std::size_t port, ArcOp op) {
  if (!has_node(from)) throw Error(ErrorCode::kUnknownNode, from);
  if (has_node(to) && reaches(to, from))
    throw Error(ErrorCode::kCycleCreated, from + " -> " + to + " closes a cycle");
  if (op.in_dim() != dims_.at(from))
    throw Error(ErrorCode::kDimMismatch,
                from + " -> " + to + ": op expects " + std::to_string(op.in_dim()) +
                    ", node has " + std::to_string(dims_.at(from)));
  for (const auto& arc : draft_.arcs)
    if (arc.to == to && arc.port == port)
      throw Error(ErrorCode::kInvalidArgument,
                  to + " port " + std::to_string(port) + " already used");
  if (!has_node(to)) {
    draft_.nodes.push_back(to);
    dims_[to] = 0;
  }
  dims_[to] += op.out_dim();
  const std::size_t id = draft_.arcs.size();
  out_[from].push_back(draft_.arcs.size());
  draft_.arcs.push_back(Arc{id, from, to, port, std::move(op)});
  return id;
}

}  // namespace unrectify
