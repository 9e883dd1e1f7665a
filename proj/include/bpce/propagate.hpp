#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bpce/change_ops.hpp"
#include "bpce/clean.hpp"
#include "bpce/diff.hpp"
#include "bpce/graph.hpp"
#include "bpce/mappings.hpp"

namespace bpce {

struct PropagationReport {
  std::map<std::string, int> case_counts;  // propagation case -> times taken
  std::vector<NodeId> created_nodes;       // fresh nodes, incl. auxiliary connectors
  std::vector<std::string> notes;
  std::vector<CleanAction> cleaning;
  int mapping_entries_added = 0;
  int mapping_entries_removed = 0;

  void count(const std::string& c) { ++case_counts[c]; }

  void absorb(const PropagationReport& other) {
    for (const auto& [k, v] : other.case_counts) case_counts[k] += v;
    created_nodes.insert(created_nodes.end(), other.created_nodes.begin(),
                         other.created_nodes.end());
    notes.insert(notes.end(), other.notes.begin(), other.notes.end());
    cleaning.insert(cleaning.end(), other.cleaning.begin(), other.cleaning.end());
    mapping_entries_added += other.mapping_entries_added;
    mapping_entries_removed += other.mapping_entries_removed;
  }
};

namespace detail {

inline NodeOrigin origin_entry(const Pid& pid, const Node& n) {
  return NodeOrigin{pid, n.id, n.label,
                    n.is_connector() ? n.type.connector_kind : std::nullopt};
}

/// Replaces `edge` inside the paths of variant `pid` by `pid_route` and
/// inside every other variant's paths by `other_route`.
inline void replace_edge_split(FamilyMappings& m, const Pid& pid, const Edge& edge,
                               const std::vector<Edge>& pid_route,
                               const std::vector<Edge>& other_route) {
  for (auto& [p, vm] : m.variants) {
    const auto& route = (p == pid) ? pid_route : other_route;
    for (auto& [ge, path] : vm.edge_map) {
      std::vector<Edge> out;
      for (const auto& pe : path) {
        if (pe == edge)
          out.insert(out.end(), route.begin(), route.end());
        else
          out.push_back(pe);
      }
      path = std::move(out);
    }
  }
}

// ---------------------------------------------------------------------------
// variant -> configurable graph
// ---------------------------------------------------------------------------

class G2CgEngine {
 public:
  G2CgEngine(const ProcessGraph& g, const ConfigurableProcessGraph& cg,
             const FamilyMappings& mappings)
      : g_(g), cg_(cg), mappings_(mappings), pid_(g.pid) {}

  void run(const ChangeSequence& ops) {
    for (const auto& op : ops) {
      std::visit([&](const auto& o) { handle(o); }, op);
      apply_to_variant(op);
    }
    sweep_variant_orphans();
  }

  ProcessGraph g_;
  ConfigurableProcessGraph cg_;
  FamilyMappings mappings_;
  PropagationReport report_;

 private:
  Pid pid_;

  VariantMaps& maps() { return mappings_.for_pid(pid_); }

  NodeId image_of(const NodeId& g_node) {
    auto img = maps().cg_node(g_node);
    if (!img)
      fail(ErrorKind::UnmappedAnchor, "variant node '" + g_node + "' has no image");
    return *img;
  }

  NodeId fresh_cg_node(const Node& from, std::vector<NodeOrigin> origins) {
    NodeId id = cg_.base.fresh_id(from.id);
    cg_.add_node(Node{id, from.label, from.type}, std::move(origins));
    report_.created_nodes.push_back(id);
    return id;
  }

  NodeId fresh_aux_connector() {
    NodeId id = cg_.base.fresh_id("x");
    cg_.add_node(make_connector(id, ConnectorKind::Xor));
    report_.created_nodes.push_back(id);
    return id;
  }

  void apply_to_variant(const ChangeOp& op) { g_ = apply_change(g_, op); }

  void sweep_variant_orphans() {
    std::vector<NodeId> orphans;
    for (const auto& [id, n] : g_.nodes)
      if (g_.is_orphan(id)) orphans.push_back(id);
    for (const auto& id : orphans) {
      g_.remove_node(id);
      auto img = maps().cg_node(id);
      if (img) {
        cg_.drop_origin(*img, pid_);
        maps().node_map.erase(id);
        ++report_.mapping_entries_removed;
      }
    }
  }

  /// Variant edges of this pid (other than `except`) still routed over `e`.
  bool path_used_elsewhere(const Edge& e, const Edge& except) {
    for (const auto& [ge, path] : maps().edge_map) {
      if (ge == except) continue;
      for (const auto& pe : path)
        if (pe == e) return true;
    }
    return false;
  }

  bool shared_with_other_variant(const NodeId& cg_node) {
    for (const auto& e : cg_.base.in_edges(cg_node))
      for (const auto& p : cg_.edge_alpha(e))
        if (p != pid_) return true;
    for (const auto& e : cg_.base.out_edges(cg_node))
      for (const auto& p : cg_.edge_alpha(e))
        if (p != pid_) return true;
    return false;
  }

  /// Reroutes every pid-annotated edge of `merged` onto a fresh private copy
  /// of the node, splitting shared edges with auxiliary XOR connectors so the
  /// other variants keep their route through `merged`. Returns the copy.
  /// This is the branch construction used when an append/prepend/relabel hits
  /// a node whose surroundings other variants still rely on.
  NodeId detach_branch(const NodeId& g_node, const NodeId& merged,
                       const std::optional<std::string>& new_label) {
    const Node& g_n = g_.node(g_node);
    std::string label = new_label.value_or(g_n.label);
    Node clone_spec{g_node, label, g_n.type};
    NodeId clone = fresh_cg_node(clone_spec, {origin_entry(pid_, Node{g_node, label, g_n.type})});

    for (const auto& in : cg_.base.in_edges(merged)) {
      auto pids = cg_.edge_alpha(in);
      if (!pids.count(pid_)) continue;
      if (pids.size() == 1) {
        cg_.remove_edge(in);
        cg_.add_edge(in.source, clone, {pid_});
        mappings_replace_edge(mappings_, in, {Edge{in.source, clone}});
      } else {
        NodeId m = fresh_aux_connector();
        cg_.remove_edge(in);
        cg_.add_edge(in.source, m, pids);
        std::set<Pid> bypass = pids;
        bypass.erase(pid_);
        cg_.add_edge(m, merged, bypass);
        cg_.add_edge(m, clone, {pid_});
        replace_edge_split(mappings_, pid_, in,
                           {Edge{in.source, m}, Edge{m, clone}},
                           {Edge{in.source, m}, Edge{m, merged}});
      }
    }
    for (const auto& out : cg_.base.out_edges(merged)) {
      auto pids = cg_.edge_alpha(out);
      if (!pids.count(pid_)) continue;
      if (pids.size() == 1) {
        cg_.remove_edge(out);
        cg_.add_edge(clone, out.target, {pid_});
        mappings_replace_edge(mappings_, out, {Edge{clone, out.target}});
      } else {
        NodeId n = fresh_aux_connector();
        cg_.remove_edge(out);
        cg_.add_edge(n, out.target, pids);
        std::set<Pid> bypass = pids;
        bypass.erase(pid_);
        cg_.add_edge(merged, n, bypass);
        cg_.add_edge(clone, n, {pid_});
        replace_edge_split(mappings_, pid_, out,
                           {Edge{clone, n}, Edge{n, out.target}},
                           {Edge{merged, n}, Edge{n, out.target}});
      }
    }
    cg_.drop_origin(merged, pid_);
    maps().node_map[g_node] = clone;
    ++report_.mapping_entries_added;
    return clone;
  }

  void handle(const InsertEdge& o) {
    NodeId vs = image_of(o.source), vt = image_of(o.target);
    Edge ce{vs, vt};
    if (cg_.base.has_edge(ce)) {
      cg_.alpha[ce].insert(pid_);
      report_.count("InsertEdge:annotate");
    } else {
      cg_.add_edge(vs, vt, {pid_});
      report_.count("InsertEdge:insert");
    }
    maps().edge_map[Edge{o.source, o.target}] = {ce};
    ++report_.mapping_entries_added;
  }

  void handle(const DeleteEdge& o) {
    Edge ge{o.source, o.target};
    auto it = maps().edge_map.find(ge);
    if (it == maps().edge_map.end())
      fail(ErrorKind::UnmappedAnchor,
           "variant edge (" + o.source + "," + o.target + ") has no mapped path");
    for (const auto& pe : it->second) {
      if (!cg_.base.has_edge(pe)) continue;
      if (!path_used_elsewhere(pe, ge)) cg_.alpha[pe].erase(pid_);
    }
    maps().edge_map.erase(it);
    ++report_.mapping_entries_removed;
    report_.count("DeleteEdge");
  }

  void handle(const InsertNode& o) {
    Edge ge{o.source, o.target};
    auto it = maps().edge_map.find(ge);
    if (it == maps().edge_map.end())
      fail(ErrorKind::UnmappedAnchor,
           "variant edge (" + o.source + "," + o.target + ") has no mapped path");
    std::vector<Edge> path = it->second;
    // insertion point: the first pid-annotated path edge that no other path
    // of this variant runs over (entering a shared split/join prefix would
    // put the node onto sibling routes as well)
    std::size_t pos = path.size();
    std::size_t fallback = path.size();
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (!cg_.edge_alpha(path[i]).count(pid_)) continue;
      if (fallback == path.size()) fallback = i;
      if (!path_used_elsewhere(path[i], ge)) {
        pos = i;
        break;
      }
    }
    if (pos == path.size()) pos = fallback;
    if (pos == path.size())
      fail(ErrorKind::UnmappedAnchor, "mapped path carries no pid-annotated edge");
    Edge target = path[pos];
    std::vector<Edge> prefix(path.begin(), path.begin() + pos);
    std::vector<Edge> suffix(path.begin() + pos + 1, path.end());
    auto pids = cg_.edge_alpha(target);

    NodeId v_cg;
    std::vector<Edge> pid_head, pid_tail;
    if (pids.size() <= 1) {
      v_cg = fresh_cg_node(o.node, {origin_entry(pid_, o.node)});
      cg_.remove_edge(target);
      cg_.add_edge(target.source, v_cg, pids);
      cg_.add_edge(v_cg, target.target, pids);
      mappings_replace_edge(mappings_, target,
                            {Edge{target.source, v_cg}, Edge{v_cg, target.target}});
      pid_head = {Edge{target.source, v_cg}};
      pid_tail = {Edge{v_cg, target.target}};
      report_.count("InsertNode:direct");
    } else {
      // Shared edge: bracket with two XOR connectors, route this variant over
      // the new node and the others over the bypass edge between them.
      NodeId m = fresh_aux_connector();
      NodeId n = fresh_aux_connector();
      v_cg = fresh_cg_node(o.node, {origin_entry(pid_, o.node)});
      cg_.remove_edge(target);
      cg_.add_edge(target.source, m, pids);
      std::set<Pid> bypass = pids;
      bypass.erase(pid_);
      cg_.add_edge(m, n, bypass);
      cg_.add_edge(n, target.target, pids);
      cg_.add_edge(m, v_cg, {pid_});
      cg_.add_edge(v_cg, n, {pid_});
      replace_edge_split(mappings_, pid_, target,
                         {Edge{target.source, m}, Edge{m, v_cg}, Edge{v_cg, n},
                          Edge{n, target.target}},
                         {Edge{target.source, m}, Edge{m, n}, Edge{n, target.target}});
      pid_head = {Edge{target.source, m}, Edge{m, v_cg}};
      pid_tail = {Edge{v_cg, n}, Edge{n, target.target}};
      report_.count("InsertNode:bracket");
    }
    // The split entry: prefix/suffix were already rewritten by the replace
    // helpers if they contained the target edge (they cannot; paths are
    // simple), so compose them with the new head and tail around the node.
    maps().edge_map.erase(ge);
    std::vector<Edge> head = prefix;
    head.insert(head.end(), pid_head.begin(), pid_head.end());
    std::vector<Edge> tail = pid_tail;
    tail.insert(tail.end(), suffix.begin(), suffix.end());
    maps().edge_map[Edge{o.source, o.node.id}] = head;
    maps().edge_map[Edge{o.node.id, o.target}] = tail;
    maps().node_map[o.node.id] = v_cg;
    report_.mapping_entries_added += 2;
  }

  void handle(const AddNode& o) {
    NodeId vs = image_of(o.source), vt = image_of(o.target);
    NodeId v_cg = fresh_cg_node(o.node, {origin_entry(pid_, o.node)});
    cg_.add_edge(vs, v_cg, {pid_});
    cg_.add_edge(v_cg, vt, {pid_});
    maps().node_map[o.node.id] = v_cg;
    maps().edge_map[Edge{o.source, o.node.id}] = {Edge{vs, v_cg}};
    maps().edge_map[Edge{o.node.id, o.target}] = {Edge{v_cg, vt}};
    report_.mapping_entries_added += 3;
    report_.count("AddNode");
  }

  bool shared_incoming(const NodeId& cg_node) {
    for (const auto& e : cg_.base.in_edges(cg_node))
      if (cg_.edge_alpha(e).size() > 1) return true;
    return false;
  }

  bool shared_outgoing(const NodeId& cg_node) {
    for (const auto& e : cg_.base.out_edges(cg_node))
      if (cg_.edge_alpha(e).size() > 1) return true;
    return false;
  }

  void handle(const AppendNode& o) {
    NodeId va = image_of(o.anchor);
    bool guarded = !g_.node(o.anchor).is_connector() && shared_incoming(va);
    if (guarded) {
      va = detach_branch(o.anchor, va, std::nullopt);
      report_.count("AppendNode:branch");
    } else {
      report_.count("AppendNode:direct");
    }
    NodeId v_cg = fresh_cg_node(o.node, {origin_entry(pid_, o.node)});
    cg_.add_edge(va, v_cg, {pid_});
    maps().node_map[o.node.id] = v_cg;
    maps().edge_map[Edge{o.anchor, o.node.id}] = {Edge{va, v_cg}};
    report_.mapping_entries_added += 2;
  }

  void handle(const PrependNode& o) {
    NodeId va = image_of(o.anchor);
    bool guarded = !g_.node(o.anchor).is_connector() && shared_outgoing(va);
    if (guarded) {
      va = detach_branch(o.anchor, va, std::nullopt);
      report_.count("PrependNode:branch");
    } else {
      report_.count("PrependNode:direct");
    }
    NodeId v_cg = fresh_cg_node(o.node, {origin_entry(pid_, o.node)});
    cg_.add_edge(v_cg, va, {pid_});
    maps().node_map[o.node.id] = v_cg;
    maps().edge_map[Edge{o.node.id, o.anchor}] = {Edge{v_cg, va}};
    report_.mapping_entries_added += 2;
  }

  void handle(const ModifyNodeAnnotation& o) {
    NodeId v = image_of(o.node);
    if (!shared_with_other_variant(v)) {
      cg_ = apply_change(cg_, ModifyNodeAnnotation{v, o.label});
      report_.count("ModifyNodeAnnotation:inplace");
    } else {
      detach_branch(o.node, v, o.label);
      report_.count("ModifyNodeAnnotation:branch");
    }
  }

  void handle(const InsertEdgeAnnotation&) {
    fail(ErrorKind::InvalidOpForDirection, "annotation ops act on the configurable graph");
  }
  void handle(const DeleteEdgeAnnotation&) {
    fail(ErrorKind::InvalidOpForDirection, "annotation ops act on the configurable graph");
  }
};

// ---------------------------------------------------------------------------
// configurable graph -> variants
// ---------------------------------------------------------------------------

class Cg2GEngine {
 public:
  Cg2GEngine(const std::map<Pid, ProcessGraph>& variants,
             const ConfigurableProcessGraph& cg_old,
             const ConfigurableProcessGraph& cg_new, const FamilyMappings& mappings,
             std::set<Pid> exclude)
      : variants_(variants), cg_old_(cg_old), cg_(cg_new), mappings_(mappings),
        exclude_(std::move(exclude)) {}

  void run(const ChangeSequence& ops) {
    for (const auto& op : ops) std::visit([&](const auto& o) { handle(o); }, op);
  }

  std::map<Pid, ProcessGraph> variants_;
  ConfigurableProcessGraph cg_old_;
  ConfigurableProcessGraph cg_;  // post-change state, authoritative
  FamilyMappings mappings_;
  PropagationReport report_;
  std::set<Pid> exclude_;

 private:
  std::vector<Pid> affected(const std::set<Pid>& pids) {
    std::vector<Pid> out;
    for (const auto& pid : pids)
      if (!exclude_.count(pid) && variants_.count(pid)) out.push_back(pid);
    return out;
  }

  std::optional<NodeId> inverse(const Pid& pid, const NodeId& cg_node) {
    return mappings_.for_pid(pid).variant_node(cg_node);
  }

  /// Copies a cg node into the variant (fresh id), recording mapping and
  /// origin. Used when a newly covered variant lacks the counterpart node.
  NodeId copy_node_into(const Pid& pid, const NodeId& cg_node) {
    ProcessGraph& g = variants_.at(pid);
    const Node& n = cg_.base.node(cg_node);
    NodeId fresh = g.fresh_id(cg_node);
    g.add_node(Node{fresh, n.label, n.type});
    mappings_.for_pid(pid).node_map[fresh] = cg_node;
    cg_.add_origin(cg_node, NodeOrigin{pid, fresh, n.label,
                                       n.is_connector() ? n.type.connector_kind
                                                        : std::nullopt});
    report_.created_nodes.push_back(fresh);
    ++report_.mapping_entries_added;
    return fresh;
  }

  /// Nearest mapped neighbor of `cg_node` for the variant, walking the
  /// configurable graph along pid-annotated edges, backwards or forwards.
  /// Returns the cg node and the edge path from/to it.
  struct NearMapped {
    NodeId cg_node;
    std::vector<Edge> path;  // from mapped node to target (or reverse)
  };

  std::optional<NearMapped> nearest_mapped(const Pid& pid, const NodeId& from,
                                           bool backwards) {
    std::map<NodeId, Edge> via;
    std::vector<NodeId> frontier{from};
    std::set<NodeId> seen{from};
    while (!frontier.empty()) {
      std::sort(frontier.begin(), frontier.end());
      std::vector<NodeId> next;
      for (const auto& cur : frontier) {
        for (const auto& e : cg_.base.edges) {
          if (!cg_.edge_alpha(e).count(pid)) continue;
          NodeId neigh;
          if (backwards && e.target == cur)
            neigh = e.source;
          else if (!backwards && e.source == cur)
            neigh = e.target;
          else
            continue;
          if (seen.count(neigh)) continue;
          seen.insert(neigh);
          via[neigh] = e;
          if (inverse(pid, neigh)) {
            NearMapped r{neigh, {}};
            NodeId walk = neigh;
            while (walk != from) {
              Edge step = via.at(walk);
              r.path.push_back(step);
              walk = backwards ? step.target : step.source;
            }
            if (!backwards) std::reverse(r.path.begin(), r.path.end());
            return r;
          }
          next.push_back(neigh);
        }
      }
      frontier = std::move(next);
    }
    return std::nullopt;
  }

  /// Materializes an image for an unmapped (typically auxiliary) cg node in
  /// the variant: a connector spliced between the variant images of the
  /// nearest mapped predecessor and successor, or attached to the one side
  /// that exists.
  NodeId creat_aux_node(const Pid& pid, const NodeId& cg_node) {
    ProcessGraph& g = variants_.at(pid);
    const Node& spec = cg_.base.node(cg_node);
    Node copy{g.fresh_id(cg_node), spec.label, spec.type};
    if (!copy.is_connector()) return copy_node_into(pid, cg_node);

    // When mapped paths already run over the auxiliary node, the copy takes
    // over every such route: each covered variant edge is split at the copy,
    // so the variant mirrors the merged graph's routing structure.
    VariantMaps& maps = mappings_.for_pid(pid);
    std::vector<std::pair<Edge, std::size_t>> covered;  // variant edge, entry index
    for (const auto& [ge, path] : maps.edge_map) {
      for (std::size_t i = 0; i < path.size(); ++i)
        if (path[i].target == cg_node) {
          if (g.has_edge(ge)) covered.emplace_back(ge, i);
          break;
        }
    }
    if (!covered.empty()) {
      g.add_node(copy);
      maps.node_map[copy.id] = cg_node;
      cg_.add_origin(cg_node, NodeOrigin{pid, copy.id, copy.label, copy.type.connector_kind});
      report_.created_nodes.push_back(copy.id);
      ++report_.mapping_entries_added;
      for (const auto& [ge, enter] : covered) {
        std::vector<Edge> path = maps.edge_map.at(ge);
        std::vector<Edge> head(path.begin(), path.begin() + long(enter) + 1);
        std::vector<Edge> tail(path.begin() + long(enter) + 1, path.end());
        g.remove_edge(ge);
        maps.edge_map.erase(ge);
        if (!g.has_edge(ge.source, copy.id)) {
          g.add_edge(ge.source, copy.id);
          maps.edge_map[Edge{ge.source, copy.id}] = head;
          ++report_.mapping_entries_added;
        }
        if (!g.has_edge(copy.id, ge.target)) {
          g.add_edge(copy.id, ge.target);
          maps.edge_map[Edge{copy.id, ge.target}] = tail;
          ++report_.mapping_entries_added;
        }
      }
      report_.count("CreatAuxNode");
      return copy.id;
    }

    auto pred = nearest_mapped(pid, cg_node, /*backwards=*/true);
    auto succ = nearest_mapped(pid, cg_node, /*backwards=*/false);
    if (!pred && !succ)
      fail(ErrorKind::UnmappedAnchor,
           "no mapped neighbor to place an image of '" + cg_node + "'");
    VariantMaps& vm = mappings_.for_pid(pid);
    g.add_node(copy);
    report_.created_nodes.push_back(copy.id);
    vm.node_map[copy.id] = cg_node;
    cg_.add_origin(cg_node, NodeOrigin{pid, copy.id, copy.label, copy.type.connector_kind});
    ++report_.mapping_entries_added;

    if (pred && succ) {
      NodeId gu = *inverse(pid, pred->cg_node);
      NodeId gw = *inverse(pid, succ->cg_node);
      Edge direct{gu, gw};
      if (g.has_edge(direct)) {
        g.remove_edge(direct);
        g.add_edge(gu, copy.id);
        g.add_edge(copy.id, gw);
        vm.edge_map.erase(direct);
      } else {
        if (!g.has_edge(gu, copy.id)) g.add_edge(gu, copy.id);
        if (!g.has_edge(copy.id, gw)) g.add_edge(copy.id, gw);
      }
      vm.edge_map[Edge{gu, copy.id}] = pred->path;
      vm.edge_map[Edge{copy.id, gw}] = succ->path;
      report_.mapping_entries_added += 2;
    } else if (pred) {
      NodeId gu = *inverse(pid, pred->cg_node);
      if (!g.has_edge(gu, copy.id)) g.add_edge(gu, copy.id);
      vm.edge_map[Edge{gu, copy.id}] = pred->path;
      ++report_.mapping_entries_added;
    } else {
      NodeId gw = *inverse(pid, succ->cg_node);
      if (!g.has_edge(copy.id, gw)) g.add_edge(copy.id, gw);
      vm.edge_map[Edge{copy.id, gw}] = succ->path;
      ++report_.mapping_entries_added;
    }
    report_.count("CreatAuxNode");
    return copy.id;
  }

  NodeId resolve_or_create(const Pid& pid, const NodeId& cg_node) {
    if (auto v = inverse(pid, cg_node)) return *v;
    return creat_aux_node(pid, cg_node);
  }

  void handle(const InsertEdge& o) {
    Edge e{o.source, o.target};
    for (const auto& pid : affected(cg_.edge_alpha(e))) {
      ProcessGraph& g = variants_.at(pid);
      NodeId vs = resolve_or_create(pid, o.source);
      NodeId vt = resolve_or_create(pid, o.target);
      if (!g.has_edge(vs, vt)) {
        g.add_edge(vs, vt);
        mappings_.for_pid(pid).edge_map[Edge{vs, vt}] = {e};
        ++report_.mapping_entries_added;
      }
      report_.count("InsertEdge");
    }
  }

  /// Deletes one variant edge and retires its route: the pid leaves every
  /// remaining edge of the mapped path that no other route of this variant
  /// still uses (the rest becomes annotation-empty and falls to cleaning).
  void retire_variant_edge(const Pid& pid, const Edge& variant_edge) {
    ProcessGraph& g = variants_.at(pid);
    VariantMaps& vm = mappings_.for_pid(pid);
    auto it = vm.edge_map.find(variant_edge);
    std::vector<Edge> path;
    if (it != vm.edge_map.end()) {
      path = it->second;
      vm.edge_map.erase(it);
      ++report_.mapping_entries_removed;
    }
    if (g.has_edge(variant_edge)) g.remove_edge(variant_edge);
    for (const auto& pe : path) {
      if (!cg_.base.has_edge(pe)) continue;
      if (vm.path_uses(pe) == 0) cg_.alpha[pe].erase(pid);
    }
  }

  void handle(const DeleteEdge& o) {
    Edge e{o.source, o.target};
    for (const auto& pid : affected(cg_old_.edge_alpha(e))) {
      VariantMaps& vm = mappings_.for_pid(pid);
      // every route of this variant over the deleted edge is broken
      std::vector<Edge> covered;
      for (const auto& [ge, path] : vm.edge_map)
        for (const auto& pe : path)
          if (pe == e) {
            covered.push_back(ge);
            break;
          }
      for (const auto& ge : covered) retire_variant_edge(pid, ge);
      if (!covered.empty()) report_.count("DeleteEdge");
    }
  }

  void handle(const ModifyNodeAnnotation& o) {
    std::set<Pid> pids;
    for (const auto& e : cg_.base.in_edges(o.node)) {
      const auto& a = cg_.edge_alpha(e);
      pids.insert(a.begin(), a.end());
    }
    for (const auto& e : cg_.base.out_edges(o.node)) {
      const auto& a = cg_.edge_alpha(e);
      pids.insert(a.begin(), a.end());
    }
    for (const auto& pid : affected(pids)) {
      auto gv = inverse(pid, o.node);
      if (!gv) continue;
      ProcessGraph& g = variants_.at(pid);
      if (g.node(*gv).label != o.label)
        g = apply_change(g, ModifyNodeAnnotation{*gv, o.label});
      report_.count("ModifyNodeAnnotation");
    }
  }

  void handle(const AppendNode& o) {
    Edge in{o.anchor, o.node.id};
    for (const auto& pid : affected(cg_.edge_alpha(in))) {
      if (inverse(pid, o.node.id)) continue;  // replayed twice: no-op
      ProcessGraph& g = variants_.at(pid);
      NodeId ga = resolve_or_create(pid, o.anchor);
      Node copy{g.fresh_id(o.node.id), o.node.label, o.node.type};
      g.add_node(copy);
      g.add_edge(ga, copy.id);
      VariantMaps& vm = mappings_.for_pid(pid);
      vm.node_map[copy.id] = o.node.id;
      cg_.add_origin(o.node.id, origin_entry(pid, copy));
      vm.edge_map[Edge{ga, copy.id}] = {in};
      report_.mapping_entries_added += 2;
      report_.created_nodes.push_back(copy.id);
      report_.count("AppendNode");
    }
  }

  void handle(const PrependNode& o) {
    Edge out{o.node.id, o.anchor};
    for (const auto& pid : affected(cg_.edge_alpha(out))) {
      if (inverse(pid, o.node.id)) continue;
      ProcessGraph& g = variants_.at(pid);
      NodeId ga = resolve_or_create(pid, o.anchor);
      Node copy{g.fresh_id(o.node.id), o.node.label, o.node.type};
      g.add_node(copy);
      g.add_edge(copy.id, ga);
      VariantMaps& vm = mappings_.for_pid(pid);
      vm.node_map[copy.id] = o.node.id;
      cg_.add_origin(o.node.id, origin_entry(pid, copy));
      vm.edge_map[Edge{copy.id, ga}] = {out};
      report_.mapping_entries_added += 2;
      report_.created_nodes.push_back(copy.id);
      report_.count("PrependNode");
    }
  }

  /// Adds the node's copy plus exactly the edges whose annotations carry the
  /// pid (the in- and out-edge of a new single-node path may cover different
  /// variant sets once annotations were adjusted).
  void materialize_node_path(const Pid& pid, const Node& node, const NodeId& cg_source,
                             const NodeId& cg_target, const char* case_name) {
    ProcessGraph& g = variants_.at(pid);
    VariantMaps& vm = mappings_.for_pid(pid);
    Edge in{cg_source, node.id}, out{node.id, cg_target};
    bool want_in = cg_.edge_alpha(in).count(pid) != 0;
    bool want_out = cg_.edge_alpha(out).count(pid) != 0;
    Node copy{g.fresh_id(node.id), node.label, node.type};
    g.add_node(copy);
    if (want_in) {
      NodeId vs = resolve_or_create(pid, cg_source);
      g.add_edge(vs, copy.id);
      vm.edge_map[Edge{vs, copy.id}] = {in};
      ++report_.mapping_entries_added;
    }
    if (want_out) {
      NodeId vt = resolve_or_create(pid, cg_target);
      g.add_edge(copy.id, vt);
      vm.edge_map[Edge{copy.id, vt}] = {out};
      ++report_.mapping_entries_added;
    }
    vm.node_map[copy.id] = node.id;
    cg_.add_origin(node.id, origin_entry(pid, copy));
    ++report_.mapping_entries_added;
    report_.created_nodes.push_back(copy.id);
    report_.count(case_name);
  }

  std::vector<Pid> affected_by_either(const Edge& a, const Edge& b) {
    std::set<Pid> pids = cg_.edge_alpha(a);
    const auto& other = cg_.edge_alpha(b);
    pids.insert(other.begin(), other.end());
    return affected(pids);
  }

  void handle(const AddNode& o) {
    Edge in{o.source, o.node.id}, out{o.node.id, o.target};
    for (const auto& pid : affected_by_either(in, out)) {
      if (inverse(pid, o.node.id)) continue;
      materialize_node_path(pid, o.node, o.source, o.target, "AddNode");
    }
  }

  void handle(const InsertNode& o) {
    Edge in{o.source, o.node.id}, out{o.node.id, o.target};
    Edge replaced{o.source, o.target};
    for (const auto& pid : affected_by_either(in, out)) {
      if (inverse(pid, o.node.id)) continue;
      ProcessGraph& g = variants_.at(pid);
      VariantMaps& vm = mappings_.for_pid(pid);
      auto covered = vm.covering_edge(replaced);
      bool both = cg_.edge_alpha(in).count(pid) && cg_.edge_alpha(out).count(pid);
      if (both && covered && g.has_edge(*covered)) {
        // the variant's own edge is split around the copy, inheriting the
        // prefix and suffix of its mapped path
        std::vector<Edge> path = vm.edge_map.at(*covered);
        std::size_t pos = 0;
        while (pos < path.size() && path[pos] != replaced) ++pos;
        std::vector<Edge> head(path.begin(), path.begin() + pos);
        head.push_back(in);
        std::vector<Edge> tail{out};
        tail.insert(tail.end(), path.begin() + std::min(pos + 1, path.size()),
                    path.end());
        Edge ge = *covered;
        Node copy{g.fresh_id(o.node.id), o.node.label, o.node.type};
        g = apply_change(g, InsertNode{copy, ge.source, ge.target});
        vm.edge_map.erase(ge);
        vm.edge_map[Edge{ge.source, copy.id}] = head;
        vm.edge_map[Edge{copy.id, ge.target}] = tail;
        vm.node_map[copy.id] = o.node.id;
        cg_.add_origin(o.node.id, origin_entry(pid, copy));
        report_.mapping_entries_added += 3;
        report_.created_nodes.push_back(copy.id);
        report_.count("InsertNode");
      } else {
        materialize_node_path(pid, o.node, o.source, o.target, "InsertNode");
      }
    }
  }

  void handle(const InsertEdgeAnnotation& o) {
    if (exclude_.count(o.pid) || !variants_.count(o.pid)) return;
    ProcessGraph& g = variants_.at(o.pid);
    VariantMaps& vm = mappings_.for_pid(o.pid);
    if (vm.covering_edge(o.edge)) {
      report_.count("InsertEdgeAnnotation");
      return;  // variant already routed over this edge
    }
    NodeId vs = resolve_or_create(o.pid, o.edge.source);
    NodeId vt = resolve_or_create(o.pid, o.edge.target);
    if (!g.has_edge(vs, vt)) {
      g.add_edge(vs, vt);
      vm.edge_map[Edge{vs, vt}] = {o.edge};
      ++report_.mapping_entries_added;
    }
    report_.count("InsertEdgeAnnotation");
  }

  void handle(const DeleteEdgeAnnotation& o) {
    if (exclude_.count(o.pid) || !variants_.count(o.pid)) return;
    VariantMaps& vm = mappings_.for_pid(o.pid);
    std::vector<Edge> covered;
    for (const auto& [ge, path] : vm.edge_map)
      for (const auto& pe : path)
        if (pe == o.edge) {
          covered.push_back(ge);
          break;
        }
    for (const auto& ge : covered) retire_variant_edge(o.pid, ge);
    if (!covered.empty()) report_.count("DeleteEdgeAnnotation");
  }
};

}  // namespace detail

struct G2CgResult {
  ConfigurableProcessGraph cg;
  FamilyMappings mappings;
  ProcessGraph variant;  // the edited variant after replaying the ops
  PropagationReport report;
};

/// Propagates an edited variant's change operations into the configurable
/// graph, maintaining the node and edge mappings of every variant in the
/// family. The returned graph may contain patterns that a subsequent cleaning
/// removes (annotation-empty edges, dangling auxiliary connectors).
inline G2CgResult propagate_g2cg(const ProcessGraph& g, const ConfigurableProcessGraph& cg,
                                 const FamilyMappings& mappings, const ChangeSequence& ops) {
  detail::G2CgEngine engine(g, cg, mappings);
  engine.run(ops);
  return G2CgResult{std::move(engine.cg_), std::move(engine.mappings_),
                    std::move(engine.g_), std::move(engine.report_)};
}

struct Cg2GResult {
  std::map<Pid, ProcessGraph> variants;
  ConfigurableProcessGraph cg;  // with origin records for copied nodes
  FamilyMappings mappings;
  PropagationReport report;
};

/// Propagates configurable-graph change operations to every variant whose pid
/// appears in the annotations the operation touches. `cg_old` is the state
/// the ops were detected against; `cg_new` the state after them.
inline Cg2GResult propagate_cg2g(const std::map<Pid, ProcessGraph>& variants,
                                 const ConfigurableProcessGraph& cg_old,
                                 const ConfigurableProcessGraph& cg_new,
                                 const FamilyMappings& mappings, const ChangeSequence& ops,
                                 const std::set<Pid>& exclude = {}) {
  detail::Cg2GEngine engine(variants, cg_old, cg_new, mappings, exclude);
  engine.run(ops);
  return Cg2GResult{std::move(engine.variants_), std::move(engine.cg_),
                    std::move(engine.mappings_), std::move(engine.report_)};
}

/// Convenience overload that derives the post-state by replaying the ops.
inline Cg2GResult propagate_cg2g(const std::map<Pid, ProcessGraph>& variants,
                                 const ConfigurableProcessGraph& cg_old,
                                 const FamilyMappings& mappings, const ChangeSequence& ops,
                                 const std::set<Pid>& exclude = {}) {
  return propagate_cg2g(variants, cg_old, replay_sequence(cg_old, ops), mappings, ops,
                        exclude);
}

struct CoevolveResult {
  Family family;
  ChangeSequence variant_ops;  // judged ops of the edited variant
  ChangeSequence cg_ops;       // judged ops detected on the configurable graph
  PropagationReport report;
};

/// Runs the full co-evolution round for one edited variant: detect its
/// change operations, push them into the configurable graph, clean it,
/// detect the configurable graph's own delta, push that to every other
/// variant, clean those, and refresh the mappings. The input family is not
/// modified; any error leaves it untouched.
inline CoevolveResult coevolve(const Family& family, const ProcessGraph& edited) {
  auto vit = family.variants.find(edited.pid);
  if (vit == family.variants.end())
    fail(ErrorKind::UnknownPid, "no variant '" + edited.pid + "' in family");

  CoevolveResult result;
  result.variant_ops = detect_change_sequence(vit->second, edited);

  G2CgResult up = propagate_g2cg(vit->second, family.cg, family.mappings, result.variant_ops);
  result.report.absorb(up.report);

  CgCleanResult cleaned = clean_cg(up.cg, up.mappings);
  for (const auto& a : cleaned.actions) result.report.cleaning.push_back(a);

  result.cg_ops = detect_change_sequence(family.cg, cleaned.cg);

  Cg2GResult down = propagate_cg2g(family.variants, family.cg, cleaned.cg,
                                   cleaned.mappings, result.cg_ops, {edited.pid});
  result.report.absorb(down.report);

  Family out;
  out.family_id = family.family_id;
  out.cg = std::move(down.cg);
  out.mappings = std::move(down.mappings);
  for (auto& [pid, graph] : down.variants) {
    if (pid == edited.pid) continue;
    VariantCleanResult vc = clean_variant(graph);
    for (const auto& a : vc.actions) result.report.cleaning.push_back(a);
    out.variants[pid] = std::move(vc.graph);
  }
  {
    VariantCleanResult vc = clean_variant(up.variant);
    for (const auto& a : vc.actions) result.report.cleaning.push_back(a);
    out.variants[edited.pid] = std::move(vc.graph);
  }

  prune_mappings_to_variants(out);

  // Cleaning divides a split-join connector on both sides independently: the
  // variant gains a split connector with no image while the merged graph
  // grew the matching one. Pair them up by their position behind the mapped
  // join.
  for (auto& [pid, vm] : out.mappings.variants) {
    const ProcessGraph& g = out.variants.at(pid);
    for (int pass = 0; pass < 4; ++pass) {
      bool paired = false;
      for (const auto& [vn, node] : g.nodes) {
        if (!node.is_connector() || vm.node_map.count(vn)) continue;
        auto preds = g.predecessors(vn);
        if (preds.size() != 1) continue;
        auto join_img = vm.cg_node(preds.front());
        if (!join_img) continue;
        for (const auto& ce : out.cg.base.out_edges(*join_img)) {
          if (!out.cg.edge_alpha(ce).count(pid)) continue;
          const Node& cand = out.cg.base.node(ce.target);
          if (!cand.is_connector() || vm.variant_node(ce.target)) continue;
          // a kind-conflicted merge displays OR; the variant's own kind lives
          // in the origin record when one exists
          auto origin = out.cg.origin_for(ce.target, pid);
          ConnectorKind expected = origin && origin->connector_kind
                                       ? *origin->connector_kind
                                       : *cand.type.connector_kind;
          if (expected != node.type.connector_kind) continue;
          vm.node_map[vn] = ce.target;
          out.cg.add_origin(ce.target,
                            NodeOrigin{pid, vn, node.label, node.type.connector_kind});
          paired = true;
          break;
        }
      }
      if (!paired) break;
    }
  }

  // Variant cleaning can restore a direct edge whose mapping entry was
  // consumed above; recover such entries along pid-annotated paths. The
  // interior of a recovered path may only use nodes that are not images of
  // this variant's own nodes: a route through another mapped node would
  // claim that node sits on this edge.
  for (auto& [pid, vm] : out.mappings.variants) {
    const ProcessGraph& g = out.variants.at(pid);
    std::set<NodeId> images;
    for (const auto& [gn, cn] : vm.node_map) images.insert(cn);
    for (const auto& e : g.edges) {
      if (vm.edge_map.count(e)) continue;
      auto src = vm.cg_node(e.source);
      auto dst = vm.cg_node(e.target);
      if (!src || !dst) continue;
      ProcessGraph filtered;
      filtered.pid = pid;
      for (const auto& [id, n] : out.cg.base.nodes)
        if (!images.count(id) || id == *src || id == *dst) filtered.nodes.emplace(id, n);
      for (const auto& ce : out.cg.base.edges)
        if (out.cg.edge_alpha(ce).count(pid) && filtered.has_node(ce.source) &&
            filtered.has_node(ce.target))
          filtered.edges.insert(ce);
      auto path_nodes = find_path(filtered, *src, *dst);
      if (!path_nodes || path_nodes->size() < 2) continue;
      std::vector<Edge> path;
      for (std::size_t i = 0; i + 1 < path_nodes->size(); ++i)
        path.push_back(Edge{(*path_nodes)[i], (*path_nodes)[i + 1]});
      vm.edge_map[e] = std::move(path);
    }
  }

  result.family = std::move(out);
  return result;
}

}  // namespace bpce
