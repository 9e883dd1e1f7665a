#pragma once

#include <array>
#include <random>
#include <string>
#include <vector>

#include "bpce/change_ops.hpp"
#include "bpce/clean.hpp"
#include "bpce/graph.hpp"
#include "bpce/merge.hpp"
#include "bpce/similarity.hpp"
#include "bpce/well_formed.hpp"

namespace bpce {

struct GenParams {
  std::uint64_t seed = 42;
  int variant_count = 2;  // derived variants per family
  int node_count = 12;    // approximate nodes in the base graph
  int edit_count = 3;     // random edits applied to derive each variant
};

/// Deterministic generator of well-formed process graphs, legal random edits
/// and whole merged families. All randomness flows from the seed; the same
/// seed reproduces identical output byte for byte.
class GraphGenerator {
 public:
  explicit GraphGenerator(std::uint64_t seed) : rng_(seed) {}

  ProcessGraph random_graph(const Pid& pid, int approx_nodes) {
    ProcessGraph g;
    g.pid = pid;
    next_id_ = 1;
    label_counter_ = 0;
    NodeId start = add_fresh(g, NodeKind::Event);
    auto [entry, exit] = build_block(g, std::max(2, approx_nodes - 2));
    g.add_edge(start, entry);
    NodeId end = add_fresh(g, NodeKind::Event);
    g.add_edge(exit, end);
    // nested same-kind splits can touch; one cleaning pass settles the shape
    return clean_variant(g).graph;
  }

  /// One legal change operation against the given variant. The op kind is
  /// drawn from the full vocabulary; ops that need a precondition (an
  /// existing edge, a missing edge) are retried with a different draw. When
  /// `deletable` is given, edge deletions are restricted to that set, so a
  /// script never strands a subgraph it just created (a stranded island is
  /// not expressible as a change sequence and would make diffs undetectable).
  ChangeOp random_variant_op(const ProcessGraph& g,
                             const std::set<Edge>* deletable = nullptr) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      switch (pick(7)) {
        case 0: {  // InsertEdge
          if (g.nodes.size() < 2) break;
          NodeId a = pick_node(g), b = pick_node(g);
          if (a == b || g.has_edge(a, b)) break;
          return InsertEdge{a, b};
        }
        case 1: {  // DeleteEdge
          if (g.edges.empty()) break;
          Edge e = pick_edge(g);
          if (deletable && !deletable->count(e)) break;
          return DeleteEdge{e.source, e.target};
        }
        case 2: {  // InsertNode
          if (g.edges.empty()) break;
          Edge e = pick_edge(g);
          return InsertNode{fresh_spec(g), e.source, e.target};
        }
        case 3: {  // AddNode, preferring a connector-to-connector edge
          if (g.edges.empty()) break;
          Edge e = pick_edge(g);
          for (int i = 0; i < 8; ++i) {
            Edge c = pick_edge(g);
            if (g.node(c.source).is_connector() && g.node(c.target).is_connector()) {
              e = c;
              break;
            }
          }
          return AddNode{fresh_spec(g), e.source, e.target};
        }
        case 4:
          return AppendNode{pick_node(g), fresh_spec(g)};
        case 5:
          return PrependNode{fresh_spec(g), pick_node(g)};
        case 6: {  // ModifyNodeAnnotation
          std::vector<NodeId> labelled;
          for (const auto& [id, n] : g.nodes)
            if (!n.is_connector()) labelled.push_back(id);
          if (labelled.empty()) break;
          NodeId target = labelled[pick(labelled.size())];
          std::string label = next_label();
          if (label == g.node(target).label) break;
          return ModifyNodeAnnotation{target, label};
        }
      }
    }
    // Always-applicable fallback.
    return AppendNode{pick_node(g), fresh_spec(g)};
  }

  /// A script of ops where each op is legal on the graph produced by its
  /// predecessors. Deletions stick to edges of the starting graph.
  ChangeSequence random_script(const ProcessGraph& g, int length) {
    ChangeSequence script;
    ProcessGraph cur = g;
    std::set<Edge> original = g.edges;
    for (int i = 0; i < length; ++i) {
      ChangeOp op = random_variant_op(cur, &original);
      cur = apply_change(cur, op);
      script.push_back(op);
    }
    return script;
  }

  /// A derived variant: the base graph under this pid with a few random
  /// edits, cleaned back to a legal shape.
  ProcessGraph derive_variant(const ProcessGraph& base, const Pid& pid, int edits) {
    ProcessGraph g = base;
    g.pid = pid;
    g = replay_sequence(g, random_script(g, edits));
    return clean_variant(g).graph;
  }

  /// A full family: base graph, derived variants, merged configurable graph
  /// with mappings, built by iterated pairwise merging.
  Family random_family(const GenParams& params, const MatchParams& match = {}) {
    ProcessGraph base = random_graph("base", params.node_count);
    Family family;
    family.family_id = "gen-" + std::to_string(params.seed);
    for (int i = 1; i <= params.variant_count; ++i) {
      Pid pid = std::to_string(i);
      family.variants[pid] = derive_variant(base, pid, params.edit_count);
    }
    auto it = family.variants.begin();
    const ProcessGraph& first = it->second;
    ++it;
    MergeResult merged = merge(first, it->second,
                               compute_mapping(first, it->second, match));
    for (++it; it != family.variants.end(); ++it) {
      merged = merge_into(merged.cg, merged.mappings, it->second,
                          compute_mapping(merged.cg.base, it->second, match));
    }
    family.cg = std::move(merged.cg);
    family.mappings = std::move(merged.mappings);
    return family;
  }

  std::uint64_t pick(std::size_t bound) { return rng_() % bound; }

  NodeId pick_node(const ProcessGraph& g) {
    std::vector<NodeId> ids;
    for (const auto& [id, n] : g.nodes) ids.push_back(id);
    return ids[pick(ids.size())];
  }

  Edge pick_edge(const ProcessGraph& g) {
    std::vector<Edge> edges(g.edges.begin(), g.edges.end());
    return edges[pick(edges.size())];
  }

  /// A fresh event or function node not yet present in the graph.
  Node fresh_spec(const ProcessGraph& g) {
    NodeKind kind = pick(2) == 0 ? NodeKind::Event : NodeKind::Function;
    NodeId id = g.fresh_id("g" + std::to_string(++gen_counter_));
    return Node{id, next_label(), {kind, std::nullopt}};
  }

 private:
  std::pair<NodeId, NodeId> build_block(ProcessGraph& g, int budget) {
    if (budget <= 3 || pick(3) == 0) return build_chain(g, std::max(1, budget));
    int branches = 2 + static_cast<int>(pick(2));
    ConnectorKind kind =
        std::array{ConnectorKind::And, ConnectorKind::Or, ConnectorKind::Xor}[pick(3)];
    NodeId split = add_connector(g, kind);
    NodeId join = add_connector(g, kind);
    int per_branch = std::max(1, (budget - 2) / branches);
    for (int b = 0; b < branches; ++b) {
      auto [entry, exit] = build_block(g, per_branch);
      g.add_edge(split, entry);
      g.add_edge(exit, join);
    }
    return {split, join};
  }

  std::pair<NodeId, NodeId> build_chain(ProcessGraph& g, int length) {
    NodeId first = add_fresh(g, pick(2) == 0 ? NodeKind::Event : NodeKind::Function);
    NodeId prev = first;
    for (int i = 1; i < std::min(length, 4); ++i) {
      NodeId next = add_fresh(g, pick(2) == 0 ? NodeKind::Event : NodeKind::Function);
      g.add_edge(prev, next);
      prev = next;
    }
    return {first, prev};
  }

  NodeId add_fresh(ProcessGraph& g, NodeKind kind) {
    NodeId id = "n" + std::to_string(next_id_++);
    g.add_node(Node{id, next_label(), {kind, std::nullopt}});
    return id;
  }

  NodeId add_connector(ProcessGraph& g, ConnectorKind kind) {
    NodeId id = "c" + std::to_string(next_id_++);
    g.add_node(make_connector(id, kind));
    return id;
  }

  std::string next_label() {
    static const char* kVerbs[] = {"check", "clear", "register", "review", "approve",
                                   "archive", "notify", "schedule", "export", "validate"};
    static const char* kNouns[] = {"order", "invoice", "record", "claim", "report",
                                   "request", "payment", "case", "batch", "form"};
    return std::string(kVerbs[pick(10)]) + " " + kNouns[pick(10)] + " " +
           std::to_string(++label_counter_);
  }

  std::mt19937_64 rng_;
  int next_id_ = 1;
  int label_counter_ = 0;
  int gen_counter_ = 0;
};

}  // namespace bpce
