#pragma once

#include <string>
#include <vector>

#include "bpce/graph.hpp"

namespace bpce {

enum class ViolationTag {
  SplitJoinConnector,
  RedundantConnector,
  ContinuousSameTypeConnectors,
  EmptyEdgeAnnotation,
  OrphanNode,
};

inline const char* to_string(ViolationTag t) {
  switch (t) {
    case ViolationTag::SplitJoinConnector: return "SplitJoinConnector";
    case ViolationTag::RedundantConnector: return "RedundantConnector";
    case ViolationTag::ContinuousSameTypeConnectors: return "ContinuousSameTypeConnectors";
    case ViolationTag::EmptyEdgeAnnotation: return "EmptyEdgeAnnotation";
    case ViolationTag::OrphanNode: return "OrphanNode";
  }
  return "?";
}

struct Violation {
  ViolationTag tag;
  NodeId node;  // offending node, or edge source for edge-level tags
  NodeId other; // edge target for edge-level tags, else empty

  auto operator<=>(const Violation&) const = default;

  std::string describe() const {
    std::string s = to_string(tag);
    s += " at " + node;
    if (!other.empty()) s += "->" + other;
    return s;
  }
};

namespace detail {

/// Fusing connector w into its sole parent v must not leave v with many
/// parents and many children at once; such a chain is exactly the shape the
/// split-join rewrite produces and has to stay. On a configurable graph the
/// fusion is also refused when a recorded origin disagrees with the displayed
/// connector kind (two merged connectors that only coincide because a kind
/// conflict turned them into OR are distinct per variant).
template <typename G>
bool fusable_connector_chain(const G& g, const NodeId& v, const NodeId& w) {
  const ProcessGraph& s = structure(g);
  const Node& nv = s.node(v);
  const Node& nw = s.node(w);
  if (!nv.is_connector() || !nw.is_connector()) return false;
  if (nv.type.connector_kind != nw.type.connector_kind) return false;
  if (s.predecessors(w).size() != 1) return false;
  if (s.predecessors(v).size() > 1) {
    std::set<NodeId> merged_children;
    for (const auto& c : s.successors(v))
      if (c != w) merged_children.insert(c);
    for (const auto& c : s.successors(w)) merged_children.insert(c);
    if (merged_children.size() > 1) return false;
  }
  if constexpr (is_configurable_v<G>) {
    for (const auto& id : {v, w})
      for (const auto& origin : g.origins_of(id))
        if (origin.connector_kind && origin.connector_kind != s.node(id).type.connector_kind)
          return false;
    // every variant touching w must actually enter it over the chain edge;
    // otherwise the fusion would splice unrelated variant flows together
    const auto& chain_pids = g.edge_alpha(Edge{v, w});
    for (const auto& e : s.out_edges(w))
      for (const auto& pid : g.edge_alpha(e))
        if (!chain_pids.count(pid)) return false;
  }
  return true;
}

}  // namespace detail

/// Reports every illegal pattern in the graph: split-join connectors,
/// redundant connectors, fusable same-kind connector chains, empty edge
/// annotations (configurable graphs only) and orphan nodes. An empty result
/// means cleaning the graph would be a no-op.
template <typename G>
std::vector<Violation> check_well_formed(const G& g) {
  const ProcessGraph& s = structure(g);
  std::vector<Violation> out;
  for (const auto& [id, n] : s.nodes) {
    auto preds = s.predecessors(id);
    auto succs = s.successors(id);
    if (preds.empty() && succs.empty()) {
      out.push_back({ViolationTag::OrphanNode, id, ""});
      continue;
    }
    if (!n.is_connector()) continue;
    if (preds.size() > 1 && succs.size() > 1)
      out.push_back({ViolationTag::SplitJoinConnector, id, ""});
    if (preds.size() <= 1 && succs.size() <= 1)
      out.push_back({ViolationTag::RedundantConnector, id, ""});
  }
  for (const auto& e : s.edges) {
    if (detail::fusable_connector_chain(g, e.source, e.target))
      out.push_back({ViolationTag::ContinuousSameTypeConnectors, e.source, e.target});
  }
  if constexpr (is_configurable_v<G>) {
    for (const auto& e : s.edges)
      if (g.edge_alpha(e).empty())
        out.push_back({ViolationTag::EmptyEdgeAnnotation, e.source, e.target});
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace bpce
