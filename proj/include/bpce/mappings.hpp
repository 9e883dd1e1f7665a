#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bpce/graph.hpp"

namespace bpce {

/// Correspondence between one variant and the configurable graph: an
/// injective node map plus an edge-to-path map. A variant edge maps to a
/// whole path because merging and propagation may route it through auxiliary
/// connectors; storing the explicit edge list keeps the identity of the route
/// stable when edges on it are subdivided.
struct VariantMaps {
  std::map<NodeId, NodeId> node_map;           // variant node id -> cg node id
  std::map<Edge, std::vector<Edge>> edge_map;  // variant edge -> cg path

  bool operator==(const VariantMaps&) const = default;

  std::optional<NodeId> cg_node(const NodeId& variant_node) const {
    auto it = node_map.find(variant_node);
    if (it == node_map.end()) return std::nullopt;
    return it->second;
  }

  std::optional<NodeId> variant_node(const NodeId& cg_node) const {
    for (const auto& [g, c] : node_map)
      if (c == cg_node) return g;
    return std::nullopt;
  }

  /// The variant edge whose mapped path contains the given cg edge, if any.
  std::optional<Edge> covering_edge(const Edge& cg_edge) const {
    for (const auto& [ge, path] : edge_map)
      for (const auto& e : path)
        if (e == cg_edge) return ge;
    return std::nullopt;
  }

  /// Number of mapped paths that use the given cg edge.
  int path_uses(const Edge& cg_edge) const {
    int uses = 0;
    for (const auto& [ge, path] : edge_map)
      for (const auto& e : path)
        if (e == cg_edge) ++uses;
    return uses;
  }
};

struct FamilyMappings {
  std::map<Pid, VariantMaps> variants;

  bool operator==(const FamilyMappings&) const = default;

  VariantMaps& for_pid(const Pid& pid) { return variants[pid]; }
  const VariantMaps& for_pid(const Pid& pid) const {
    static const VariantMaps kEmpty;
    auto it = variants.find(pid);
    return it == variants.end() ? kEmpty : it->second;
  }
};

/// A whole process family: the variants, their merged configurable graph and
/// the maintained mappings.
struct Family {
  std::string family_id;
  std::map<Pid, ProcessGraph> variants;
  ConfigurableProcessGraph cg;
  FamilyMappings mappings;

  bool operator==(const Family&) const = default;
};

// -- mapping maintenance -----------------------------------------------------
//
// The helpers below keep every variant's edge paths consistent while the
// configurable graph is rewritten underneath them.

/// Replaces every occurrence of `e` in any mapped path by the given edge
/// sequence (used when an edge is subdivided by a connector insertion).
inline void mappings_replace_edge(FamilyMappings& m, const Edge& e,
                                  const std::vector<Edge>& replacement) {
  for (auto& [pid, vm] : m.variants) {
    for (auto& [ge, path] : vm.edge_map) {
      std::vector<Edge> out;
      for (const auto& pe : path) {
        if (pe == e)
          out.insert(out.end(), replacement.begin(), replacement.end());
        else
          out.push_back(pe);
      }
      path = std::move(out);
    }
  }
}

/// Rewrites paths when a 1-in/1-out node between `e1` and `e2` is removed and
/// the bridge edge takes its place. Paths that used the pair are re-spliced;
/// paths that stopped at the removed node lose their entry (the variant-side
/// node lost its image and will be pruned by its own cleaning).
inline void mappings_contract_pair(FamilyMappings& m, const Edge& e1,
                                   const Edge& e2, const Edge& bridge) {
  for (auto& [pid, vm] : m.variants) {
    std::vector<Edge> dead;
    for (auto& [ge, path] : vm.edge_map) {
      std::vector<Edge> out;
      bool drop = false;
      for (std::size_t i = 0; i < path.size(); ++i) {
        if (path[i] == e1) {
          if (i + 1 < path.size() && path[i + 1] == e2) {
            out.push_back(bridge);
            ++i;
          } else {
            drop = true;  // path ended on the removed node
            break;
          }
        } else if (path[i] == e2) {
          drop = true;  // path started on the removed node
          break;
        } else {
          out.push_back(path[i]);
        }
      }
      if (drop)
        dead.push_back(ge);
      else
        path = std::move(out);
    }
    for (const auto& ge : dead) vm.edge_map.erase(ge);
  }
}

/// Rewrites paths when connector `w` is fused into its sole parent `v` and
/// `v` takes over `w`'s role: interior [(v,w),(w,x)] pairs become [(v,x)],
/// paths ending on the chain edge now end at `v`, and paths leaving from `w`
/// now leave from `v`. Entries that degenerate to an empty path are dropped.
inline void mappings_fuse_node(FamilyMappings& m, const NodeId& v, const NodeId& w) {
  for (auto& [pid, vm] : m.variants) {
    std::vector<Edge> dead;
    for (auto& [ge, path] : vm.edge_map) {
      std::vector<Edge> out;
      for (std::size_t i = 0; i < path.size(); ++i) {
        if (path[i].source == v && path[i].target == w) {
          if (i + 1 < path.size() && path[i + 1].source == w) {
            out.push_back(Edge{v, path[i + 1].target});
            ++i;
          }
          // else: the path ended at w, which v now impersonates
        } else if (path[i].source == w) {
          out.push_back(Edge{v, path[i].target});
        } else {
          out.push_back(path[i]);
        }
      }
      if (out.empty())
        dead.push_back(ge);
      else
        path = std::move(out);
    }
    for (const auto& ge : dead) vm.edge_map.erase(ge);
  }
}

/// Drops node-map entries that point at a removed cg node.
inline void mappings_drop_cg_node(FamilyMappings& m, const NodeId& cg_node) {
  for (auto& [pid, vm] : m.variants) {
    for (auto it = vm.node_map.begin(); it != vm.node_map.end();) {
      if (it->second == cg_node)
        it = vm.node_map.erase(it);
      else
        ++it;
    }
  }
}

/// Drops edge-map entries whose path still references a removed cg edge.
inline void mappings_drop_paths_using(FamilyMappings& m, const Edge& cg_edge) {
  for (auto& [pid, vm] : m.variants) {
    std::vector<Edge> dead;
    for (const auto& [ge, path] : vm.edge_map)
      for (const auto& e : path)
        if (e == cg_edge) {
          dead.push_back(ge);
          break;
        }
    for (const auto& ge : dead) vm.edge_map.erase(ge);
  }
}

/// Removes mapping entries and origin records whose variant-side node or edge
/// no longer exists (after variants were edited or cleaned).
inline void prune_mappings_to_variants(Family& family) {
  for (auto& [pid, vm] : family.mappings.variants) {
    auto vit = family.variants.find(pid);
    if (vit == family.variants.end()) continue;
    const ProcessGraph& g = vit->second;
    for (auto it = vm.node_map.begin(); it != vm.node_map.end();) {
      if (!g.has_node(it->first))
        it = vm.node_map.erase(it);
      else
        ++it;
    }
    for (auto it = vm.edge_map.begin(); it != vm.edge_map.end();) {
      if (!g.has_edge(it->first))
        it = vm.edge_map.erase(it);
      else
        ++it;
    }
  }
  // origin records live on merged nodes independently of the node map
  std::vector<std::pair<NodeId, Pid>> stale;
  for (const auto& [n, origins] : family.cg.beta)
    for (const auto& o : origins) {
      auto vit = family.variants.find(o.pid);
      if (vit != family.variants.end() && !vit->second.has_node(o.node_id))
        stale.emplace_back(n, o.pid);
    }
  for (const auto& [n, pid] : stale) family.cg.drop_origin(n, pid);
}

/// Structural invariants of a family's mappings: per-variant injectivity,
/// path chaining, pid coverage of every path edge, and endpoint consistency
/// with the node map. With `strict`, also node/edge totality for every
/// variant. Returns human-readable problems; empty means valid.
inline std::vector<std::string> validate_mappings(const Family& family,
                                                  bool strict = true) {
  std::vector<std::string> problems;
  auto complain = [&](const std::string& s) { problems.push_back(s); };
  for (const auto& [pid, vm] : family.mappings.variants) {
    auto vit = family.variants.find(pid);
    if (vit == family.variants.end()) {
      complain("mappings name unknown pid " + pid);
      continue;
    }
    const ProcessGraph& g = vit->second;
    const ConfigurableProcessGraph& cg = family.cg;
    std::map<NodeId, NodeId> seen;
    for (const auto& [gn, cn] : vm.node_map) {
      if (!g.has_node(gn)) complain(pid + ": node map key " + gn + " not in variant");
      if (!cg.base.has_node(cn)) complain(pid + ": node map value " + cn + " not in cg");
      auto [it, fresh] = seen.emplace(cn, gn);
      if (!fresh) complain(pid + ": node map not injective at " + cn);
    }
    std::set<NodeId> images;
    for (const auto& [gn, cn] : vm.node_map) images.insert(cn);
    for (const auto& [ge, path] : vm.edge_map) {
      std::string where = pid + ": path of (" + ge.source + "," + ge.target + ")";
      if (!g.has_edge(ge)) complain(where + " keyed by missing variant edge");
      if (path.empty()) {
        complain(where + " is empty");
        continue;
      }
      for (std::size_t i = 0; i < path.size(); ++i) {
        if (!cg.base.has_edge(path[i]))
          complain(where + " uses missing cg edge (" + path[i].source + "," +
                   path[i].target + ")");
        else if (!cg.edge_alpha(path[i]).count(pid))
          complain(where + " uses edge without pid annotation (" +
                   path[i].source + "," + path[i].target + ")");
        if (i + 1 < path.size() && path[i].target != path[i + 1].source)
          complain(where + " breaks at position " + std::to_string(i));
        if (i + 1 < path.size() && images.count(path[i].target))
          complain(where + " runs through mapped node " + path[i].target);
      }
      auto src = vm.cg_node(ge.source);
      auto dst = vm.cg_node(ge.target);
      if (!src || path.front().source != *src) complain(where + " does not start at mapped source");
      if (!dst || path.back().target != *dst) complain(where + " does not end at mapped target");
    }
    if (strict) {
      for (const auto& [id, n] : g.nodes)
        if (!vm.node_map.count(id)) complain(pid + ": unmapped variant node " + id);
      for (const auto& e : g.edges)
        if (!vm.edge_map.count(e))
          complain(pid + ": unmapped variant edge (" + e.source + "," + e.target + ")");
    }
  }
  return problems;
}

}  // namespace bpce
