#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bpce/graph.hpp"

namespace bpce {

/// Lowercases and collapses whitespace runs; leading/trailing whitespace is
/// dropped. Similarity is computed on this folded form.
inline std::string fold_label(const std::string& s) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

inline std::size_t levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t next_diag = row[j];
      std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
      diag = next_diag;
    }
  }
  return row[b.size()];
}

/// Normalized label similarity in [0,1]: 1 minus the Levenshtein distance of
/// the folded labels over the longer folded length. Symmetric; exactly 1.0
/// iff the folded labels are equal.
inline double label_similarity(const std::string& a, const std::string& b) {
  std::string fa = fold_label(a), fb = fold_label(b);
  if (fa == fb) return 1.0;
  std::size_t longest = std::max(fa.size(), fb.size());
  return 1.0 - static_cast<double>(levenshtein(fa, fb)) / static_cast<double>(longest);
}

struct MappingPair {
  NodeId left;
  NodeId right;
  double similarity = 0.0;

  auto operator<=>(const MappingPair&) const = default;
};

struct VariantMapping {
  std::vector<MappingPair> pairs;
  double score = 0.0;

  std::optional<NodeId> image(const NodeId& left) const {
    for (const auto& p : pairs)
      if (p.left == left) return p.right;
    return std::nullopt;
  }
};

namespace detail {

inline double neighborhood_jaccard(const std::vector<NodeId>& n1,
                                   const std::vector<NodeId>& n2,
                                   const std::map<NodeId, NodeId>& left_to_right) {
  if (n1.empty() && n2.empty()) return 1.0;
  std::set<NodeId> right_side(n2.begin(), n2.end());
  std::size_t overlap = 0;
  for (const auto& x : n1) {
    auto it = left_to_right.find(x);
    if (it != left_to_right.end() && right_side.count(it->second)) ++overlap;
  }
  std::size_t unioned = n1.size() + n2.size() - overlap;
  return unioned == 0 ? 1.0 : static_cast<double>(overlap) / static_cast<double>(unioned);
}

}  // namespace detail

/// Context similarity of two connectors: the average of the Jaccard overlaps
/// of their already-mapped parents and children. Empty-on-both-sides
/// neighborhoods count as fully overlapping.
inline double context_similarity(const NodeId& c1, const NodeId& c2,
                                 const ProcessGraph& g1, const ProcessGraph& g2,
                                 const VariantMapping& current) {
  if (!g1.node(c1).is_connector() || !g2.node(c2).is_connector())
    fail(ErrorKind::NotAConnector, "context similarity needs connector nodes");
  std::map<NodeId, NodeId> fwd;
  for (const auto& p : current.pairs) fwd[p.left] = p.right;
  double jp = detail::neighborhood_jaccard(g1.predecessors(c1), g2.predecessors(c2), fwd);
  double jc = detail::neighborhood_jaccard(g1.successors(c1), g2.successors(c2), fwd);
  return (jp + jc) / 2.0;
}

struct MatchParams {
  double threshold = 0.5;
  double weight_skip_node = 1.0;
  double weight_skip_edge = 1.0;
  double weight_substitution = 2.0;
};

namespace detail {

inline VariantMapping greedy_round(const ProcessGraph& g1, const ProcessGraph& g2,
                                   const MatchParams& params,
                                   const VariantMapping& reference) {
  VariantMapping m;
  std::set<NodeId> used1, used2;
  std::map<std::pair<NodeId, NodeId>, double> label_sim;
  for (const auto& [id1, n1] : g1.nodes) {
    if (n1.is_connector()) continue;
    for (const auto& [id2, n2] : g2.nodes) {
      if (n1.type.kind != n2.type.kind) continue;
      label_sim[{id1, id2}] = label_similarity(n1.label, n2.label);
    }
  }
  for (;;) {
    std::optional<MappingPair> best;
    auto consider = [&](const NodeId& a, const NodeId& b, double sim) {
      if (sim < params.threshold) return;
      if (!best || sim > best->similarity ||
          (sim == best->similarity && std::pair(a, b) < std::pair(best->left, best->right)))
        best = MappingPair{a, b, sim};
    };
    for (const auto& [key, sim] : label_sim) {
      if (used1.count(key.first) || used2.count(key.second)) continue;
      consider(key.first, key.second, sim);
    }
    for (const auto& [id1, n1] : g1.nodes) {
      if (!n1.is_connector() || used1.count(id1)) continue;
      for (const auto& [id2, n2] : g2.nodes) {
        if (!n2.is_connector() || used2.count(id2)) continue;
        consider(id1, id2, context_similarity(id1, id2, g1, g2, reference));
      }
    }
    if (!best) break;
    m.pairs.push_back(*best);
    used1.insert(best->left);
    used2.insert(best->right);
  }
  std::sort(m.pairs.begin(), m.pairs.end());
  return m;
}

inline VariantMapping compute_mapping_directed(const ProcessGraph& g1,
                                               const ProcessGraph& g2,
                                               const MatchParams& params) {
  // Connector context depends on what is already mapped; rerun the greedy
  // pairing against the previous round's full mapping until it stabilizes
  // (nested connectors settle one level per round).
  VariantMapping m;
  for (int round = 0; round < 8; ++round) {
    VariantMapping next = greedy_round(g1, g2, params, m);
    bool stable = next.pairs == m.pairs;
    m = std::move(next);
    if (stable) break;
  }

  // Matching score: skipped nodes/edges and label substitutions, weighed
  // against the size of the identified union.
  std::map<NodeId, NodeId> fwd;
  double substitution = 0.0;
  for (const auto& p : m.pairs) {
    fwd[p.left] = p.right;
    substitution += 1.0 - p.similarity;
  }
  std::size_t matched_edges = 0;
  for (const auto& e : g1.edges) {
    auto s = fwd.find(e.source);
    auto t = fwd.find(e.target);
    if (s != fwd.end() && t != fwd.end() && g2.has_edge(s->second, t->second))
      ++matched_edges;
  }
  double paired = static_cast<double>(m.pairs.size());
  double skip_n = static_cast<double>(g1.nodes.size() + g2.nodes.size()) - 2 * paired;
  double skip_e = static_cast<double>(g1.edges.size() + g2.edges.size()) -
                  2 * static_cast<double>(matched_edges);
  double union_n = static_cast<double>(g1.nodes.size() + g2.nodes.size()) - paired;
  double union_e = static_cast<double>(g1.edges.size() + g2.edges.size()) -
                   static_cast<double>(matched_edges);
  double denom = params.weight_skip_node * union_n + params.weight_skip_edge * union_e +
                 params.weight_substitution * paired;
  double penalty = params.weight_skip_node * skip_n + params.weight_skip_edge * skip_e +
                   params.weight_substitution * substitution;
  m.score = denom == 0.0 ? 1.0 : 1.0 - penalty / denom;
  m.score = std::clamp(m.score, 0.0, 1.0);
  return m;
}

/// Order used to canonicalize the argument pair so the result is symmetric.
inline bool graph_precedes(const ProcessGraph& a, const ProcessGraph& b) {
  if (a.pid != b.pid) return a.pid < b.pid;
  if (a.nodes.size() != b.nodes.size()) return a.nodes.size() < b.nodes.size();
  if (a.edges.size() != b.edges.size()) return a.edges.size() < b.edges.size();
  auto ait = a.nodes.begin();
  auto bit = b.nodes.begin();
  for (; ait != a.nodes.end(); ++ait, ++bit) {
    if (ait->first != bit->first) return ait->first < bit->first;
    if (ait->second.label != bit->second.label) return ait->second.label < bit->second.label;
  }
  return a.edges < b.edges;
}

}  // namespace detail

/// Greedy best-first node mapping between two graphs: events and functions
/// pair by label similarity, connectors by context similarity, highest
/// similarity first, never across node types, only at or above the
/// threshold. The score weighs unmapped nodes, unmapped edges and label
/// substitutions per the given parameters. Symmetric in its arguments.
inline VariantMapping compute_mapping(const ProcessGraph& g1, const ProcessGraph& g2,
                                      const MatchParams& params = {}) {
  if (detail::graph_precedes(g2, g1)) {
    VariantMapping swapped = detail::compute_mapping_directed(g2, g1, params);
    for (auto& p : swapped.pairs) std::swap(p.left, p.right);
    std::sort(swapped.pairs.begin(), swapped.pairs.end());
    return swapped;
  }
  return detail::compute_mapping_directed(g1, g2, params);
}

}  // namespace bpce
