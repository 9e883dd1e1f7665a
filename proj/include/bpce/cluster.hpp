#pragma once

#include <optional>
#include <vector>

#include "bpce/graph.hpp"
#include "bpce/similarity.hpp"

namespace bpce {

struct ClusterResult {
  std::vector<std::vector<std::size_t>> clusters;  // indices into the corpus, size >= 2
  std::vector<std::size_t> unclustered;            // singleton leftovers
  std::vector<std::vector<double>> similarity;     // full matching-score matrix
};

/// Average-linkage agglomerative clustering over the pairwise matching-score
/// matrix. Clusters are merged while the best inter-cluster average score is
/// at or above the threshold; whatever remains a singleton is reported as
/// unclustered.
inline ClusterResult cluster_corpus(const std::vector<ProcessGraph>& graphs,
                                    double threshold = 0.5,
                                    const MatchParams& params = {}) {
  if (graphs.size() < 2)
    fail(ErrorKind::InvalidArgument, "clustering needs at least two graphs");
  ClusterResult r;
  std::size_t n = graphs.size();
  r.similarity.assign(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = compute_mapping(graphs[i], graphs[j], params).score;
      r.similarity[i][j] = r.similarity[j][i] = s;
    }

  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < n; ++i) clusters.push_back({i});
  auto linkage = [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    double sum = 0.0;
    for (auto i : a)
      for (auto j : b) sum += r.similarity[i][j];
    return sum / static_cast<double>(a.size() * b.size());
  };
  while (clusters.size() > 1) {
    double best = -1.0;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i)
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        double s = linkage(clusters[i], clusters[j]);
        if (s > best) {
          best = s;
          bi = i;
          bj = j;
        }
      }
    if (best < threshold) break;
    clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
    std::sort(clusters[bi].begin(), clusters[bi].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  for (auto& c : clusters) {
    if (c.size() == 1)
      r.unclustered.push_back(c.front());
    else
      r.clusters.push_back(c);
  }
  std::sort(r.unclustered.begin(), r.unclustered.end());
  std::sort(r.clusters.begin(), r.clusters.end());
  return r;
}

}  // namespace bpce
