#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "bpce/clean.hpp"
#include "bpce/graph.hpp"
#include "bpce/mappings.hpp"
#include "bpce/similarity.hpp"

namespace bpce {

struct MergeResult {
  ConfigurableProcessGraph cg;
  FamilyMappings mappings;
};

namespace detail {

inline void validate_merge_mapping(const ProcessGraph& left, const ProcessGraph& right,
                                   const VariantMapping& mapping) {
  std::set<NodeId> seen_left, seen_right;
  for (const auto& p : mapping.pairs) {
    if (!left.has_node(p.left) || !right.has_node(p.right))
      fail(ErrorKind::InvalidMapping, "pair references missing node");
    if (left.node(p.left).type.kind != right.node(p.right).type.kind)
      fail(ErrorKind::InvalidMapping,
           "pair (" + p.left + "," + p.right + ") crosses node types");
    if (!seen_left.insert(p.left).second || !seen_right.insert(p.right).second)
      fail(ErrorKind::InvalidMapping, "mapping not injective");
  }
}

/// Separates a multi-variant fan at an event/function node with an auxiliary
/// XOR connector. Only applied when every variant contributes at most one
/// edge on that side, so each projection sees the connector with a single
/// entry and exit and dissolves it again.
inline void insert_fan_connectors(ConfigurableProcessGraph& cg, FamilyMappings& mappings) {
  std::vector<NodeId> ids;
  for (const auto& [id, n] : cg.base.nodes)
    if (!n.is_connector()) ids.push_back(id);
  for (const auto& id : ids) {
    for (bool out_side : {true, false}) {
      auto fan = out_side ? cg.base.out_edges(id) : cg.base.in_edges(id);
      if (fan.size() < 2) continue;
      std::set<std::set<Pid>> groups;
      std::map<Pid, int> per_pid;
      for (const auto& e : fan) {
        groups.insert(cg.edge_alpha(e));
        for (const auto& pid : cg.edge_alpha(e)) ++per_pid[pid];
      }
      if (groups.size() < 2) continue;  // single-variant fan, native shape
      bool separable = true;
      for (const auto& [pid, count] : per_pid)
        if (count > 1) separable = false;
      if (!separable) continue;
      NodeId aux = cg.base.fresh_id("x_" + id);
      cg.add_node(make_connector(aux, ConnectorKind::Xor), {}, /*config=*/true);
      std::set<Pid> all;
      for (const auto& e : fan) {
        const auto& a = cg.edge_alpha(e);
        all.insert(a.begin(), a.end());
      }
      for (const auto& e : fan) {
        auto carried = cg.edge_alpha(e);
        cg.remove_edge(e);
        if (out_side) {
          cg.add_edge(aux, e.target, carried);
          mappings_replace_edge(mappings, e, {Edge{id, aux}, Edge{aux, e.target}});
        } else {
          cg.add_edge(e.source, aux, carried);
          mappings_replace_edge(mappings, e, {Edge{e.source, aux}, Edge{aux, id}});
        }
      }
      if (out_side)
        cg.add_edge(id, aux, all);
      else
        cg.add_edge(aux, id, all);
    }
  }
}

}  // namespace detail

/// Folds one more variant into a configurable graph. Matched nodes gain an
/// origin entry (connectors of a different kind turn the merged connector
/// into a configurable OR); unmatched nodes are copied; edges are unioned
/// with the variant's pid added to their annotation. Node and edge mappings
/// for the new variant are recorded, and the result is cleaned.
inline MergeResult merge_into(const ConfigurableProcessGraph& cg_in,
                              const FamilyMappings& mappings_in, const ProcessGraph& g,
                              const VariantMapping& mapping) {
  detail::validate_merge_mapping(cg_in.base, g, mapping);
  ConfigurableProcessGraph cg = cg_in;
  FamilyMappings mappings = mappings_in;
  const Pid pid = g.pid;

  std::map<NodeId, NodeId> image;  // variant node -> cg node
  for (const auto& p : mapping.pairs) {
    const Node& gn = g.node(p.right);
    cg.add_origin(p.left, NodeOrigin{pid, p.right, gn.label,
                                     gn.is_connector() ? gn.type.connector_kind
                                                       : std::nullopt});
    Node& merged = cg.base.node(p.left);
    if (merged.is_connector() && merged.type.connector_kind != gn.type.connector_kind) {
      merged.type.connector_kind = ConnectorKind::Or;
      cg.eta[p.left] = true;
    }
    image[p.right] = p.left;
  }
  for (const auto& [id, n] : g.nodes) {
    if (image.count(id)) continue;
    NodeId fresh = cg.base.fresh_id(id);
    cg.add_node(Node{fresh, n.label, n.type},
                {NodeOrigin{pid, id, n.label,
                            n.is_connector() ? n.type.connector_kind : std::nullopt}});
    image[id] = fresh;
  }

  VariantMaps vm;
  for (const auto& [gid, cid] : image) vm.node_map[gid] = cid;
  for (const auto& e : g.edges) {
    Edge ce{image[e.source], image[e.target]};
    if (cg.base.has_edge(ce))
      cg.alpha[ce].insert(pid);
    else
      cg.add_edge(ce.source, ce.target, {pid});
    vm.edge_map[e] = {ce};
  }
  mappings.variants[pid] = std::move(vm);

  detail::insert_fan_connectors(cg, mappings);
  CgCleanResult cleaned = clean_cg(cg, mappings);
  return MergeResult{std::move(cleaned.cg), std::move(cleaned.mappings)};
}

/// Merges two variants into a fresh configurable graph with recorded
/// mappings for both.
inline MergeResult merge(const ProcessGraph& g1, const ProcessGraph& g2,
                         const VariantMapping& mapping) {
  ConfigurableProcessGraph cg = lift_to_configurable(g1);
  FamilyMappings mappings;
  VariantMaps self;
  for (const auto& [id, n] : g1.nodes) self.node_map[id] = id;
  for (const auto& e : g1.edges) self.edge_map[e] = {e};
  mappings.variants[g1.pid] = std::move(self);
  return merge_into(cg, mappings, g2, mapping);
}

}  // namespace bpce
