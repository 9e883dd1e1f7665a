#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <vector>

#include "bpce/graph.hpp"

namespace bpce {
namespace detail {

struct IsoProblem {
  const ProcessGraph& a;
  const ProcessGraph& b;
  std::function<bool(const NodeId&, const NodeId&)> node_ok;
  std::function<bool(const Edge&, const Edge&)> edge_ok;
};

inline bool extend_isomorphism(const IsoProblem& p,
                               const std::vector<NodeId>& order, std::size_t idx,
                               std::map<NodeId, NodeId>& fwd,
                               std::map<NodeId, NodeId>& rev) {
  if (idx == order.size()) return true;
  const NodeId& an = order[idx];
  for (const auto& [bn, bnode] : p.b.nodes) {
    if (rev.count(bn)) continue;
    if (!p.node_ok(an, bn)) continue;
    bool consistent = true;
    for (const auto& [a2, b2] : fwd) {
      Edge af{an, a2}, ab{a2, an}, bf{bn, b2}, bb{b2, bn};
      if (p.a.has_edge(af) != p.b.has_edge(bf) ||
          p.a.has_edge(ab) != p.b.has_edge(bb)) {
        consistent = false;
        break;
      }
      if (p.a.has_edge(af) && !p.edge_ok(af, bf)) consistent = false;
      if (consistent && p.a.has_edge(ab) && !p.edge_ok(ab, bb)) consistent = false;
      if (!consistent) break;
    }
    if (!consistent) continue;
    fwd[an] = bn;
    rev[bn] = an;
    if (extend_isomorphism(p, order, idx + 1, fwd, rev)) return true;
    fwd.erase(an);
    rev.erase(bn);
  }
  return false;
}

inline bool find_isomorphism(const IsoProblem& p) {
  if (p.a.nodes.size() != p.b.nodes.size()) return false;
  if (p.a.edges.size() != p.b.edges.size()) return false;
  // Assign high-degree nodes first; their adjacency constraints prune most.
  std::vector<NodeId> order;
  for (const auto& [id, n] : p.a.nodes) order.push_back(id);
  auto degree = [&](const NodeId& id) {
    return p.a.predecessors(id).size() + p.a.successors(id).size();
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](const NodeId& x, const NodeId& y) { return degree(x) > degree(y); });
  std::map<NodeId, NodeId> fwd, rev;
  return extend_isomorphism(p, order, 0, fwd, rev);
}

}  // namespace detail

/// True when a bijection between the node sets exists that preserves labels,
/// types and edges. Node ids are immaterial.
inline bool isomorphic(const ProcessGraph& a, const ProcessGraph& b) {
  detail::IsoProblem p{
      a, b,
      [&](const NodeId& x, const NodeId& y) {
        const Node& nx = a.node(x);
        const Node& ny = b.node(y);
        return nx.type == ny.type && nx.label == ny.label &&
               a.predecessors(x).size() == b.predecessors(y).size() &&
               a.successors(x).size() == b.successors(y).size();
      },
      [](const Edge&, const Edge&) { return true; }};
  return detail::find_isomorphism(p);
}

/// Configurable-graph isomorphism additionally requires matched edges to
/// carry equal annotation sets and matched nodes to agree on origins and the
/// configurability flag.
inline bool isomorphic(const ConfigurableProcessGraph& a,
                       const ConfigurableProcessGraph& b) {
  detail::IsoProblem p{
      a.base, b.base,
      [&](const NodeId& x, const NodeId& y) {
        const Node& nx = a.base.node(x);
        const Node& ny = b.base.node(y);
        return nx.type == ny.type && nx.label == ny.label &&
               a.origins_of(x) == b.origins_of(y) &&
               a.configurable(x) == b.configurable(y) &&
               a.base.predecessors(x).size() == b.base.predecessors(y).size() &&
               a.base.successors(x).size() == b.base.successors(y).size();
      },
      [&](const Edge& ea, const Edge& eb) {
        return a.edge_alpha(ea) == b.edge_alpha(eb);
      }};
  return detail::find_isomorphism(p);
}

}  // namespace bpce
