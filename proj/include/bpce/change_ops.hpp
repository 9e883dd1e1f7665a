#pragma once

#include <string>
#include <variant>
#include <vector>

#include "bpce/graph.hpp"

namespace bpce {

// Change primitives. The first seven apply to variants and configurable
// graphs alike; the two annotation primitives are only valid against a
// configurable graph.

struct InsertEdge {
  NodeId source, target;
};
struct DeleteEdge {
  NodeId source, target;
};
// Inserts `node` onto the existing edge (source, target): the edge is
// replaced by source -> node -> target. On a configurable graph the two new
// edges inherit the replaced edge's annotation.
struct InsertNode {
  Node node;
  NodeId source, target;
};
// Adds a single-node path source -> node -> target; an existing direct edge
// (source, target) is left in place.
struct AddNode {
  Node node;
  NodeId source, target;
};
struct AppendNode {
  NodeId anchor;
  Node node;
};
struct PrependNode {
  Node node;
  NodeId anchor;
};
// Replaces the label of an existing node. On a configurable graph the
// recorded per-variant origin labels are updated alongside, so projections
// see the new label too.
struct ModifyNodeAnnotation {
  NodeId node;
  std::string label;
};
struct InsertEdgeAnnotation {
  Edge edge;
  Pid pid;
};
struct DeleteEdgeAnnotation {
  Edge edge;
  Pid pid;
};

using ChangeOp =
    std::variant<InsertEdge, DeleteEdge, InsertNode, AddNode, AppendNode,
                 PrependNode, ModifyNodeAnnotation, InsertEdgeAnnotation,
                 DeleteEdgeAnnotation>;

using ChangeSequence = std::vector<ChangeOp>;

inline const char* op_name(const ChangeOp& op) {
  switch (op.index()) {
    case 0: return "InsertEdge";
    case 1: return "DeleteEdge";
    case 2: return "InsertNode";
    case 3: return "AddNode";
    case 4: return "AppendNode";
    case 5: return "PrependNode";
    case 6: return "ModifyNodeAnnotation";
    case 7: return "InsertEdgeAnnotation";
    case 8: return "DeleteEdgeAnnotation";
  }
  return "?";
}

namespace detail {

inline void require_node(const ProcessGraph& g, const NodeId& id) {
  if (!g.has_node(id)) fail(ErrorKind::UnknownNode, "no node '" + id + "'");
}

inline void require_fresh(const ProcessGraph& g, const Node& n) {
  if (g.has_node(n.id)) fail(ErrorKind::DuplicateNode, "node '" + n.id + "' already present");
  if (!n.is_connector() && n.label.empty())
    fail(ErrorKind::InvalidArgument, "event/function node '" + n.id + "' needs a label");
  if (n.is_connector() != n.type.connector_kind.has_value())
    fail(ErrorKind::InvalidArgument, "connector kind mismatch on '" + n.id + "'");
}

template <typename G>
void apply_one(G& g, const ChangeOp& op) {
  ProcessGraph& s = structure(g);
  std::visit(
      [&](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, InsertEdge>) {
          s.add_edge(o.source, o.target);
          if constexpr (is_configurable_v<G>) g.alpha[Edge{o.source, o.target}] = {};
        } else if constexpr (std::is_same_v<T, DeleteEdge>) {
          Edge e{o.source, o.target};
          s.remove_edge(e);
          if constexpr (is_configurable_v<G>) g.alpha.erase(e);
        } else if constexpr (std::is_same_v<T, InsertNode>) {
          require_fresh(s, o.node);
          Edge old{o.source, o.target};
          if (!s.has_edge(old))
            fail(ErrorKind::UnknownEdge, "edge (" + o.source + "," + o.target + ")");
          s.add_node(o.node);
          s.add_edge(o.source, o.node.id);
          s.add_edge(o.node.id, o.target);
          s.remove_edge(old);
          if constexpr (is_configurable_v<G>) {
            auto carried = g.edge_alpha(old);
            g.alpha.erase(old);
            g.alpha[Edge{o.source, o.node.id}] = carried;
            g.alpha[Edge{o.node.id, o.target}] = carried;
          }
        } else if constexpr (std::is_same_v<T, AddNode>) {
          require_fresh(s, o.node);
          require_node(s, o.source);
          require_node(s, o.target);
          s.add_node(o.node);
          s.add_edge(o.source, o.node.id);
          s.add_edge(o.node.id, o.target);
          if constexpr (is_configurable_v<G>) {
            g.alpha[Edge{o.source, o.node.id}] = {};
            g.alpha[Edge{o.node.id, o.target}] = {};
          }
        } else if constexpr (std::is_same_v<T, AppendNode>) {
          require_fresh(s, o.node);
          require_node(s, o.anchor);
          s.add_node(o.node);
          s.add_edge(o.anchor, o.node.id);
          if constexpr (is_configurable_v<G>) g.alpha[Edge{o.anchor, o.node.id}] = {};
        } else if constexpr (std::is_same_v<T, PrependNode>) {
          require_fresh(s, o.node);
          require_node(s, o.anchor);
          s.add_node(o.node);
          s.add_edge(o.node.id, o.anchor);
          if constexpr (is_configurable_v<G>) g.alpha[Edge{o.node.id, o.anchor}] = {};
        } else if constexpr (std::is_same_v<T, ModifyNodeAnnotation>) {
          Node& n = s.node(o.node);
          if (!n.is_connector() && o.label.empty())
            fail(ErrorKind::InvalidArgument, "empty label for '" + o.node + "'");
          n.label = o.label;
          if constexpr (is_configurable_v<G>) {
            auto it = g.beta.find(o.node);
            if (it != g.beta.end())
              for (auto& origin : it->second) origin.label = o.label;
          }
        } else if constexpr (std::is_same_v<T, InsertEdgeAnnotation>) {
          if constexpr (is_configurable_v<G>) {
            if (!s.has_edge(o.edge))
              fail(ErrorKind::UnknownEdge,
                   "edge (" + o.edge.source + "," + o.edge.target + ")");
            g.alpha[o.edge].insert(o.pid);
          } else {
            fail(ErrorKind::AnnotationOpOnVariant, "InsertEdgeAnnotation on a variant");
          }
        } else if constexpr (std::is_same_v<T, DeleteEdgeAnnotation>) {
          if constexpr (is_configurable_v<G>) {
            if (!s.has_edge(o.edge))
              fail(ErrorKind::UnknownEdge,
                   "edge (" + o.edge.source + "," + o.edge.target + ")");
            g.alpha[o.edge].erase(o.pid);
          } else {
            fail(ErrorKind::AnnotationOpOnVariant, "DeleteEdgeAnnotation on a variant");
          }
        }
      },
      op);
}

}  // namespace detail

/// Applies one change primitive and returns the resulting graph. The input is
/// untouched; on a precondition violation the error is thrown before any
/// mutation, so callers observing the exception still hold the old value.
template <typename G>
G apply_change(const G& g, const ChangeOp& op) {
  G out = g;
  detail::apply_one(out, op);
  return out;
}

/// Replays a whole change sequence. Nodes left without any incident edge at
/// the end of the sequence are dropped: edge deletion ops intentionally
/// orphan the nodes they disconnect, and a saved model never keeps orphans.
/// (Mid-sequence orphans survive so that later ops may re-attach them.)
template <typename G>
G replay_sequence(const G& g, const ChangeSequence& ops) {
  G out = g;
  for (const auto& op : ops) detail::apply_one(out, op);
  ProcessGraph& s = structure(out);
  std::vector<NodeId> orphans;
  for (const auto& [id, n] : s.nodes)
    if (s.is_orphan(id)) orphans.push_back(id);
  for (const auto& id : orphans) {
    if constexpr (is_configurable_v<G>)
      out.remove_node(id);
    else
      s.remove_node(id);
  }
  return out;
}

}  // namespace bpce
