#pragma once

#include <map>

#include "bpce/clean.hpp"
#include "bpce/graph.hpp"

namespace bpce {

/// Extracts the variant a pid describes out of the configurable graph: the
/// subgraph of edges annotated with the pid, with every node renamed and
/// relabeled back to its recorded origin in that variant. Auxiliary
/// connectors without an origin keep their merged-graph identity; the result
/// is cleaned, which dissolves the auxiliary routing connectors that ended up
/// with a single entry and exit.
inline ProcessGraph project(const ConfigurableProcessGraph& cg, const Pid& pid) {
  bool known = false;
  for (const auto& [e, pids] : cg.alpha)
    if (pids.count(pid)) {
      known = true;
      break;
    }
  if (!known) fail(ErrorKind::UnknownPid, "pid '" + pid + "' not annotated anywhere");

  std::set<NodeId> keep;
  for (const auto& [e, pids] : cg.alpha) {
    if (!pids.count(pid)) continue;
    keep.insert(e.source);
    keep.insert(e.target);
  }

  ProcessGraph out;
  out.pid = pid;
  std::map<NodeId, NodeId> rename;
  for (const auto& id : keep) {  // mapped origins first, they own their ids
    auto origin = cg.origin_for(id, pid);
    if (!origin) continue;
    const Node& n = cg.base.node(id);
    NodeType type = n.type;
    if (n.is_connector() && origin->connector_kind) type.connector_kind = origin->connector_kind;
    // two merged-graph nodes may answer for the same variant connector (a
    // split one); the later claimant gets a fresh id, cleaning settles which
    // of them remains
    NodeId target = out.has_node(origin->node_id) ? out.fresh_id(origin->node_id)
                                                  : origin->node_id;
    out.add_node(Node{target, origin->label, type});
    rename[id] = target;
  }
  for (const auto& id : keep) {
    if (rename.count(id)) continue;
    const Node& n = cg.base.node(id);
    NodeId fresh = out.fresh_id(id);
    out.add_node(Node{fresh, n.label, n.type});
    rename[id] = fresh;
  }
  for (const auto& [e, pids] : cg.alpha) {
    if (!pids.count(pid)) continue;
    if (!out.has_edge(rename[e.source], rename[e.target]))
      out.add_edge(rename[e.source], rename[e.target]);
  }
  return clean_variant(out).graph;
}

}  // namespace bpce
