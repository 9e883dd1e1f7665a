#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bpce/errors.hpp"

namespace bpce {

using NodeId = std::string;
using Pid = std::string;

/// Directed edge as an ordered (source, target) pair of node ids.
struct Edge {
  NodeId source;
  NodeId target;

  auto operator<=>(const Edge&) const = default;
};

enum class NodeKind { Event, Function, Connector };

enum class ConnectorKind { And, Or, Xor };

inline const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Event: return "event";
    case NodeKind::Function: return "function";
    case NodeKind::Connector: return "connector";
  }
  return "?";
}

inline const char* to_string(ConnectorKind k) {
  switch (k) {
    case ConnectorKind::And: return "AND";
    case ConnectorKind::Or: return "OR";
    case ConnectorKind::Xor: return "XOR";
  }
  return "?";
}

struct NodeType {
  NodeKind kind = NodeKind::Event;
  // Present exactly when kind == Connector.
  std::optional<ConnectorKind> connector_kind;

  auto operator<=>(const NodeType&) const = default;

  static NodeType event() { return {NodeKind::Event, std::nullopt}; }
  static NodeType function() { return {NodeKind::Function, std::nullopt}; }
  static NodeType connector(ConnectorKind c) { return {NodeKind::Connector, c}; }
};

struct Node {
  NodeId id;
  std::string label;  // may be empty for connectors
  NodeType type;

  auto operator<=>(const Node&) const = default;

  bool is_connector() const { return type.kind == NodeKind::Connector; }
};

inline Node make_event(NodeId id, std::string label) {
  return Node{std::move(id), std::move(label), NodeType::event()};
}
inline Node make_function(NodeId id, std::string label) {
  return Node{std::move(id), std::move(label), NodeType::function()};
}
inline Node make_connector(NodeId id, ConnectorKind kind, std::string label = "") {
  return Node{std::move(id), std::move(label), NodeType::connector(kind)};
}

/// A single process variant: a labeled directed graph with a process id.
/// Nodes are keyed by id; edges form a set of ordered pairs, so there is at
/// most one edge per direction between two nodes and self-loops are rejected.
/// All containers are ordered maps/sets, which makes every traversal
/// lexicographic and every derived artifact reproducible.
class ProcessGraph {
 public:
  Pid pid;
  std::map<NodeId, Node> nodes;
  std::set<Edge> edges;

  bool operator==(const ProcessGraph&) const = default;

  bool has_node(const NodeId& id) const { return nodes.count(id) != 0; }
  bool has_edge(const Edge& e) const { return edges.count(e) != 0; }
  bool has_edge(const NodeId& s, const NodeId& t) const {
    return has_edge(Edge{s, t});
  }

  const Node& node(const NodeId& id) const {
    auto it = nodes.find(id);
    if (it == nodes.end()) fail(ErrorKind::UnknownNode, "no node '" + id + "'");
    return it->second;
  }
  Node& node(const NodeId& id) {
    auto it = nodes.find(id);
    if (it == nodes.end()) fail(ErrorKind::UnknownNode, "no node '" + id + "'");
    return it->second;
  }

  void add_node(Node n) {
    if (has_node(n.id)) fail(ErrorKind::DuplicateNode, "node '" + n.id + "' already present");
    nodes.emplace(n.id, std::move(n));
  }

  void add_edge(const NodeId& s, const NodeId& t) {
    if (!has_node(s)) fail(ErrorKind::UnknownNode, "edge source '" + s + "'");
    if (!has_node(t)) fail(ErrorKind::UnknownNode, "edge target '" + t + "'");
    if (s == t) fail(ErrorKind::InvalidArgument, "self-loop on '" + s + "'");
    if (has_edge(s, t)) fail(ErrorKind::DuplicateEdge, "edge (" + s + "," + t + ")");
    edges.insert(Edge{s, t});
  }

  void remove_edge(const Edge& e) {
    if (edges.erase(e) == 0)
      fail(ErrorKind::UnknownEdge, "edge (" + e.source + "," + e.target + ")");
  }

  void remove_node(const NodeId& id) {
    if (nodes.erase(id) == 0) fail(ErrorKind::UnknownNode, "no node '" + id + "'");
    for (auto it = edges.begin(); it != edges.end();) {
      if (it->source == id || it->target == id)
        it = edges.erase(it);
      else
        ++it;
    }
  }

  std::vector<NodeId> predecessors(const NodeId& id) const {
    std::vector<NodeId> out;
    for (const auto& e : edges)
      if (e.target == id) out.push_back(e.source);
    return out;
  }

  std::vector<NodeId> successors(const NodeId& id) const {
    std::vector<NodeId> out;
    for (const auto& e : edges)
      if (e.source == id) out.push_back(e.target);
    return out;
  }

  std::vector<Edge> in_edges(const NodeId& id) const {
    std::vector<Edge> out;
    for (const auto& e : edges)
      if (e.target == id) out.push_back(e);
    return out;
  }

  std::vector<Edge> out_edges(const NodeId& id) const {
    std::vector<Edge> out;
    for (const auto& e : edges)
      if (e.source == id) out.push_back(e);
    return out;
  }

  bool is_orphan(const NodeId& id) const {
    return std::none_of(edges.begin(), edges.end(), [&](const Edge& e) {
      return e.source == id || e.target == id;
    });
  }

  /// Smallest unused id of the form `base`, `base_2`, `base_3`, ...
  NodeId fresh_id(const std::string& base) const {
    if (!has_node(base)) return base;
    for (int i = 2;; ++i) {
      NodeId candidate = base + "_" + std::to_string(i);
      if (!has_node(candidate)) return candidate;
    }
  }
};

/// One recorded origin of a merged node: which variant it came from, the
/// node's id and label there, and (for connectors) the original kind when it
/// differs from the merged node's kind.
struct NodeOrigin {
  Pid pid;
  NodeId node_id;
  std::string label;
  std::optional<ConnectorKind> connector_kind;

  auto operator<=>(const NodeOrigin&) const = default;
};

/// A configurable process graph: a base graph where every edge carries the
/// set of variant pids it belongs to (alpha), every node records its variant
/// origins (beta), and nodes may be flagged configurable (eta). A node with
/// empty beta is an auxiliary connector that exists only in the merged model.
class ConfigurableProcessGraph {
 public:
  ProcessGraph base;
  std::map<Edge, std::set<Pid>> alpha;
  std::map<NodeId, std::vector<NodeOrigin>> beta;
  std::map<NodeId, bool> eta;

  bool operator==(const ConfigurableProcessGraph&) const = default;

  const std::set<Pid>& edge_alpha(const Edge& e) const {
    static const std::set<Pid> kEmpty;
    auto it = alpha.find(e);
    return it == alpha.end() ? kEmpty : it->second;
  }

  std::vector<NodeOrigin> origins_of(const NodeId& id) const {
    auto it = beta.find(id);
    return it == beta.end() ? std::vector<NodeOrigin>{} : it->second;
  }

  std::optional<NodeOrigin> origin_for(const NodeId& id, const Pid& pid) const {
    for (const auto& o : origins_of(id))
      if (o.pid == pid) return o;
    return std::nullopt;
  }

  bool is_auxiliary(const NodeId& id) const { return origins_of(id).empty(); }

  bool configurable(const NodeId& id) const {
    auto it = eta.find(id);
    return it != eta.end() && it->second;
  }

  void add_node(Node n, std::vector<NodeOrigin> origins = {}, bool config = false) {
    NodeId id = n.id;
    base.add_node(std::move(n));
    if (!origins.empty()) {
      std::sort(origins.begin(), origins.end());
      beta[id] = std::move(origins);
    }
    if (config) eta[id] = true;
  }

  void add_origin(const NodeId& id, NodeOrigin o) {
    auto& entry = beta[id];
    for (auto& existing : entry) {
      if (existing.pid == o.pid) {
        existing = std::move(o);
        std::sort(entry.begin(), entry.end());
        return;
      }
    }
    entry.push_back(std::move(o));
    std::sort(entry.begin(), entry.end());
  }

  void drop_origin(const NodeId& id, const Pid& pid) {
    auto it = beta.find(id);
    if (it == beta.end()) return;
    auto& entry = it->second;
    std::erase_if(entry, [&](const NodeOrigin& o) { return o.pid == pid; });
    if (entry.empty()) beta.erase(it);
  }

  void add_edge(const NodeId& s, const NodeId& t, std::set<Pid> pids = {}) {
    base.add_edge(s, t);
    alpha[Edge{s, t}] = std::move(pids);
  }

  void remove_edge(const Edge& e) {
    base.remove_edge(e);
    alpha.erase(e);
  }

  void remove_node(const NodeId& id) {
    base.remove_node(id);
    beta.erase(id);
    eta.erase(id);
    for (auto it = alpha.begin(); it != alpha.end();) {
      if (it->first.source == id || it->first.target == id)
        it = alpha.erase(it);
      else
        ++it;
    }
  }

  /// Every pid named by an alpha or beta entry.
  std::set<Pid> known_pids() const {
    std::set<Pid> out;
    for (const auto& [e, pids] : alpha) out.insert(pids.begin(), pids.end());
    for (const auto& [n, origins] : beta)
      for (const auto& o : origins) out.insert(o.pid);
    return out;
  }
};

/// Lifts a single variant into a trivial configurable graph: every edge is
/// annotated with the variant's pid and every node records itself as origin.
/// Node ids are kept verbatim.
inline ConfigurableProcessGraph lift_to_configurable(const ProcessGraph& g) {
  ConfigurableProcessGraph cg;
  cg.base = g;
  cg.base.pid = "cg";
  for (const auto& [id, n] : g.nodes) {
    cg.beta[id] = {NodeOrigin{g.pid, id, n.label,
                              n.is_connector() ? n.type.connector_kind : std::nullopt}};
  }
  for (const auto& e : g.edges) cg.alpha[e] = {g.pid};
  return cg;
}

template <typename G>
inline constexpr bool is_configurable_v = std::is_same_v<G, ConfigurableProcessGraph>;

/// Uniform structural view used by the generic algorithms: the node/edge part
/// of either graph kind.
inline const ProcessGraph& structure(const ProcessGraph& g) { return g; }
inline const ProcessGraph& structure(const ConfigurableProcessGraph& g) { return g.base; }
inline ProcessGraph& structure(ProcessGraph& g) { return g; }
inline ProcessGraph& structure(ConfigurableProcessGraph& g) { return g.base; }

/// Some shortest directed path from `from` to `to` as a node sequence, or
/// nullopt when `to` is unreachable. Among all shortest paths the
/// lexicographically smallest node sequence is returned; `from == to` yields
/// the one-node path.
inline std::optional<std::vector<NodeId>> find_path(const ProcessGraph& g,
                                                    const NodeId& from,
                                                    const NodeId& to) {
  if (!g.has_node(from)) fail(ErrorKind::UnknownNode, "path source '" + from + "'");
  if (!g.has_node(to)) fail(ErrorKind::UnknownNode, "path target '" + to + "'");
  // Distance-to-target over reversed edges, then a greedy forward walk that
  // always picks the smallest next id on a shortest path.
  std::map<NodeId, int> dist;
  dist[to] = 0;
  std::vector<NodeId> frontier{to};
  while (!frontier.empty()) {
    std::vector<NodeId> next;
    for (const auto& v : frontier) {
      for (const auto& e : g.edges) {
        if (e.target == v && !dist.count(e.source)) {
          dist[e.source] = dist[v] + 1;
          next.push_back(e.source);
        }
      }
    }
    frontier = std::move(next);
  }
  if (!dist.count(from)) return std::nullopt;
  std::vector<NodeId> path{from};
  NodeId cur = from;
  while (cur != to) {
    std::optional<NodeId> best;
    for (const auto& e : g.edges) {
      if (e.source != cur) continue;
      auto it = dist.find(e.target);
      if (it == dist.end() || it->second != dist[cur] - 1) continue;
      if (!best || e.target < *best) best = e.target;
    }
    cur = *best;  // guaranteed: dist[cur] > 0 implies a decreasing neighbor
    path.push_back(cur);
  }
  return path;
}

}  // namespace bpce
