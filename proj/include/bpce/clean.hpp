#pragma once

#include <string>
#include <vector>

#include "bpce/graph.hpp"
#include "bpce/mappings.hpp"
#include "bpce/well_formed.hpp"

namespace bpce {

struct CleanAction {
  int rule = 0;  // 1..5, matching the violation taxonomy
  std::string detail;
};

namespace detail {

inline std::set<Pid> union_alpha(const ConfigurableProcessGraph& cg,
                                 const std::vector<Edge>& edges) {
  std::set<Pid> out;
  for (const auto& e : edges) {
    const auto& a = cg.edge_alpha(e);
    out.insert(a.begin(), a.end());
  }
  return out;
}

/// Before a merged node disappears, variant nodes mapped to it move to the
/// surviving carrier of the same origin when one exists (the divided-connector
/// partner holds a copy of the origin records exactly for this moment).
inline void repoint_origins_before_removal(const ConfigurableProcessGraph& g,
                                           FamilyMappings* mappings,
                                           const NodeId& dying) {
  if (!mappings) return;
  for (const auto& origin : g.origins_of(dying)) {
    auto& vm = mappings->for_pid(origin.pid);
    auto it = vm.node_map.find(origin.node_id);
    if (it == vm.node_map.end() || it->second != dying) continue;
    for (const auto& [cid, n] : g.base.nodes) {
      if (cid == dying) continue;
      auto other = g.origin_for(cid, origin.pid);
      if (other && other->node_id == origin.node_id) {
        it->second = cid;
        break;
      }
    }
  }
}

// One full sweep of the five rewrite rules, fixed order, nodes and edges
// visited in lexicographic order. Returns true when anything fired.
template <typename G>
bool clean_pass(G& g, FamilyMappings* mappings, std::vector<CleanAction>& actions) {
  ProcessGraph& s = structure(g);
  bool fired = false;

  // Rule 1: a connector that both joins and splits is divided into a join
  // connector followed by a split connector of the same kind.
  {
    std::vector<NodeId> candidates;
    for (const auto& [id, n] : s.nodes)
      if (n.is_connector()) candidates.push_back(id);
    for (const auto& v : candidates) {
      if (!s.has_node(v)) continue;
      if (s.predecessors(v).size() <= 1 || s.successors(v).size() <= 1) continue;
      const Node& nv = s.node(v);
      NodeId split = s.fresh_id(v + "_out");
      auto outs = s.out_edges(v);
      if constexpr (is_configurable_v<G>) {
        // the split node answers for the same variant connectors as v; a
        // variant whose projection dissolves v keeps the original kind here
        g.add_node(make_connector(split, *nv.type.connector_kind), g.origins_of(v),
                   g.configurable(v));
        std::set<Pid> moved = union_alpha(g, outs);
        for (const auto& e : outs) {
          g.add_edge(split, e.target, g.edge_alpha(e));
          g.remove_edge(e);
        }
        g.add_edge(v, split, moved);
      } else {
        s.add_node(make_connector(split, *nv.type.connector_kind));
        for (const auto& e : outs) {
          s.add_edge(split, e.target);
          s.remove_edge(e);
        }
        s.add_edge(v, split);
      }
      if (mappings)
        for (const auto& e : outs)
          mappings_replace_edge(*mappings, e, {Edge{v, split}, Edge{split, e.target}});
      actions.push_back({1, "split connector " + v + " -> " + split});
      fired = true;
    }
  }

  // Rule 2: a connector with at most one parent and at most one child is
  // redundant; it is removed and, when both neighbors exist, bridged. The
  // bridge takes over the annotation of the connector's outgoing edge.
  {
    std::vector<NodeId> candidates;
    for (const auto& [id, n] : s.nodes)
      if (n.is_connector()) candidates.push_back(id);
    for (const auto& v : candidates) {
      if (!s.has_node(v)) continue;
      auto preds = s.predecessors(v);
      auto succs = s.successors(v);
      if (preds.size() > 1 || succs.size() > 1) continue;
      if (preds.empty() && succs.empty()) continue;  // orphan, rule 5
      if (preds.size() == 1 && succs.size() == 1) {
        NodeId p = preds.front(), c = succs.front();
        Edge in{p, v}, out{v, c};
        if (p == c) {  // degenerate two-node cycle, nothing to bridge
          if (mappings) {
            mappings_drop_paths_using(*mappings, in);
            mappings_drop_paths_using(*mappings, out);
          }
        } else if constexpr (is_configurable_v<G>) {
          Edge bridge{p, c};
          // only variants flowing through the connector may ride the bridge;
          // a variant present on one side alone never passed this way
          std::set<Pid> carried;
          for (const auto& pid : g.edge_alpha(out))
            if (g.edge_alpha(in).count(pid)) carried.insert(pid);
          if (s.has_edge(bridge)) {
            g.alpha[bridge].insert(carried.begin(), carried.end());
          } else {
            g.add_edge(p, c, carried);
          }
          if (mappings) mappings_contract_pair(*mappings, in, out, bridge);
        } else {
          if (!s.has_edge(p, c)) s.add_edge(p, c);
          if (mappings) mappings_contract_pair(*mappings, in, out, Edge{p, c});
        }
      } else if (mappings) {
        for (const auto& e : s.in_edges(v)) mappings_drop_paths_using(*mappings, e);
        for (const auto& e : s.out_edges(v)) mappings_drop_paths_using(*mappings, e);
      }
      if constexpr (is_configurable_v<G>) {
        repoint_origins_before_removal(g, mappings, v);
        g.remove_node(v);
      } else {
        s.remove_node(v);
      }
      if (mappings) mappings_drop_cg_node(*mappings, v);
      actions.push_back({2, "redundant connector " + v + " removed"});
      fired = true;
    }
  }

  // Rule 3: two chained connectors of the same kind are fused, rehoming the
  // second connector's children (with their annotations) onto the first.
  {
    std::vector<Edge> candidates(s.edges.begin(), s.edges.end());
    for (const auto& chain : candidates) {
      if (!s.has_edge(chain)) continue;
      if (!s.has_node(chain.source) || !s.has_node(chain.target)) continue;
      if (!fusable_connector_chain(g, chain.source, chain.target)) continue;
      NodeId v = chain.source, w = chain.target;
      // v takes over w's role: variant origins and node mappings move along;
      // an origin of v that no variant node actually maps to is only a kind
      // record and yields to w's mapped one
      if constexpr (is_configurable_v<G>) {
        for (const auto& origin : g.origins_of(w)) {
          bool v_backed = false;
          if (mappings)
            v_backed = mappings->for_pid(origin.pid).variant_node(v).has_value();
          if (g.origin_for(v, origin.pid) && v_backed) continue;
          g.add_origin(v, origin);
          if (mappings) {
            auto& vm = mappings->for_pid(origin.pid);
            for (auto& [gn, cn] : vm.node_map)
              if (cn == w) cn = v;
          }
        }
        if (g.configurable(w)) g.eta[v] = true;
      }
      if (mappings) mappings_fuse_node(*mappings, v, w);
      for (const auto& e : s.out_edges(w)) {
        if (e.target == v) {  // back edge would become a self-loop; drop it
          if constexpr (is_configurable_v<G>)
            g.remove_edge(e);
          else
            s.remove_edge(e);
          continue;
        }
        Edge moved{v, e.target};
        if constexpr (is_configurable_v<G>) {
          std::set<Pid> carried = g.edge_alpha(e);
          if (s.has_edge(moved))
            g.alpha[moved].insert(carried.begin(), carried.end());
          else
            g.add_edge(v, e.target, carried);
          g.remove_edge(e);
        } else {
          if (!s.has_edge(moved)) s.add_edge(v, e.target);
          s.remove_edge(e);
        }
      }
      if constexpr (is_configurable_v<G>)
        g.remove_node(w);
      else
        s.remove_node(w);
      if (mappings) mappings_drop_cg_node(*mappings, w);
      actions.push_back({3, "connector chain " + v + "->" + w + " fused"});
      fired = true;
    }
  }

  // Rule 4 (configurable graphs only): edges whose annotation became empty
  // no longer belong to any variant and are deleted.
  if constexpr (is_configurable_v<G>) {
    std::vector<Edge> empty;
    for (const auto& e : s.edges)
      if (g.edge_alpha(e).empty()) empty.push_back(e);
    for (const auto& e : empty) {
      g.remove_edge(e);
      if (mappings) mappings_drop_paths_using(*mappings, e);
      actions.push_back({4, "empty-annotation edge (" + e.source + "," + e.target + ") removed"});
      fired = true;
    }
  }

  // Rule 5: orphan nodes (often left behind by the edge rules above) are
  // removed in the same pass.
  {
    std::vector<NodeId> orphans;
    for (const auto& [id, n] : s.nodes)
      if (s.is_orphan(id)) orphans.push_back(id);
    for (const auto& id : orphans) {
      if constexpr (is_configurable_v<G>) {
        repoint_origins_before_removal(g, mappings, id);
        g.remove_node(id);
      } else {
        s.remove_node(id);
      }
      if (mappings) mappings_drop_cg_node(*mappings, id);
      actions.push_back({5, "orphan node " + id + " removed"});
      fired = true;
    }
  }

  return fired;
}

template <typename G>
std::vector<CleanAction> clean_fixpoint(G& g, FamilyMappings* mappings, int& passes) {
  const ProcessGraph& s = structure(g);
  int max_passes = static_cast<int>(s.nodes.size() + s.edges.size()) + 2;
  std::vector<CleanAction> actions;
  for (passes = 0; passes < max_passes; ++passes) {
    if (!clean_pass(g, mappings, actions)) return actions;
  }
  std::string residual;
  for (const auto& v : check_well_formed(g)) residual += " " + v.describe();
  fail(ErrorKind::NonTermination,
       "cleaning did not reach a fixpoint; residual:" + residual);
}

}  // namespace detail

struct VariantCleanResult {
  ProcessGraph graph;
  std::vector<CleanAction> actions;
  int passes = 0;  // full sweeps until nothing fired, incl. the final check
};

struct CgCleanResult {
  ConfigurableProcessGraph cg;
  FamilyMappings mappings;
  std::vector<CleanAction> actions;
  int passes = 0;
};

/// Removes all illegal patterns from a variant (rules 1, 2, 3 and 5) by
/// repeated passes until a full pass changes nothing.
inline VariantCleanResult clean_variant(const ProcessGraph& g) {
  VariantCleanResult r{g, {}, 0};
  r.actions = detail::clean_fixpoint(r.graph, nullptr, r.passes);
  return r;
}

/// Removes all illegal patterns from a configurable graph (all five rules)
/// and keeps the family mappings consistent with every rewrite: subdivided
/// edges are re-spliced into mapped paths, bridges replace removed pairs, and
/// entries referencing removed nodes are dropped.
inline CgCleanResult clean_cg(const ConfigurableProcessGraph& cg,
                              const FamilyMappings& mappings) {
  CgCleanResult r{cg, mappings, {}, 0};
  r.actions = detail::clean_fixpoint(r.cg, &r.mappings, r.passes);
  return r;
}

}  // namespace bpce
