#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include "retag/util.hpp"

namespace retag {

// Undirected weighted graph over dense vertex indices. Self loops are kept
// out of the adjacency and tracked separately so degree accounting stays
// correct on aggregated graphs.
struct LocalGraph {
  int n = 0;
  std::vector<std::vector<std::pair<int, double>>> adj;  // (neighbor, weight), no self entries
  std::vector<double> self_weight;
  std::vector<double> strength;  // weighted degree incl. 2 * self_weight
  double total_weight = 0;       // m: sum of edge weights, each edge once

  static LocalGraph from_edges(int n, const std::vector<std::pair<int, int>>& edges,
                               const std::vector<double>& weights = {}) {
    LocalGraph g;
    g.n = n;
    g.adj.resize(n);
    g.self_weight.assign(n, 0.0);
    g.strength.assign(n, 0.0);
    for (size_t i = 0; i < edges.size(); ++i) {
      auto [u, v] = edges[i];
      double w = weights.empty() ? 1.0 : weights[i];
      if (u == v) {
        g.self_weight[u] += w;
      } else {
        g.adj[u].push_back({v, w});
        g.adj[v].push_back({u, w});
      }
      g.total_weight += w;
    }
    for (int v = 0; v < n; ++v) {
      double s = 2.0 * g.self_weight[v];
      for (const auto& [u, w] : g.adj[v]) s += w;
      g.strength[v] = s;
    }
    return g;
  }
};

namespace detail {

// std::shuffle is implementation-defined; this explicit Fisher-Yates keeps
// partitions identical across standard libraries.
template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

inline int compact_labels(std::vector<int>& labels) {
  std::vector<int> remap(labels.size(), -1);
  int next = 0;
  for (int& l : labels) {
    if (remap[l] == -1) remap[l] = next++;
    l = remap[l];
  }
  return next;
}

}  // namespace detail

// Modularity of a partition: sum_c [ e_c/m - resolution * (K_c / 2m)^2 ].
inline double modularity(const LocalGraph& g, const std::vector<int>& labels,
                         double resolution = 1.0) {
  if (g.total_weight <= 0) return 0.0;
  int ncomms = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<double> intra(ncomms, 0.0), total(ncomms, 0.0);
  for (int v = 0; v < g.n; ++v) {
    total[labels[v]] += g.strength[v];
    intra[labels[v]] += g.self_weight[v];
    for (const auto& [u, w] : g.adj[v])
      if (u > v && labels[u] == labels[v]) intra[labels[v]] += w;
  }
  double m = g.total_weight;
  double q = 0.0;
  for (int c = 0; c < ncomms; ++c) {
    double frac = total[c] / (2.0 * m);
    q += intra[c] / m - resolution * frac * frac;
  }
  return q;
}

namespace detail {

// Queue-based local moving. Nodes are visited in seeded random order and
// greedily moved to the neighboring community with the best modularity gain;
// a move re-queues the displaced neighborhood. Returns true if anything moved.
inline bool move_nodes(const LocalGraph& g, std::vector<int>& labels, double resolution,
                       std::mt19937_64& rng) {
  const double m = g.total_weight;
  if (m <= 0) return false;
  std::vector<double> comm_strength(g.n, 0.0);
  for (int v = 0; v < g.n; ++v) comm_strength[labels[v]] += g.strength[v];

  std::vector<int> order(g.n);
  std::iota(order.begin(), order.end(), 0);
  deterministic_shuffle(order, rng);

  std::deque<int> queue(order.begin(), order.end());
  std::vector<char> queued(g.n, 1);
  std::vector<double> weight_to(g.n, 0.0);
  bool moved_any = false;

  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    queued[v] = 0;

    int current = labels[v];
    std::vector<int> candidates;
    for (const auto& [u, w] : g.adj[v]) {
      int c = labels[u];
      if (weight_to[c] == 0.0) candidates.push_back(c);
      weight_to[c] += w;
    }

    comm_strength[current] -= g.strength[v];
    double best_score = weight_to[current] -
                        resolution * g.strength[v] * comm_strength[current] / (2.0 * m);
    int best = current;
    for (int c : candidates) {
      if (c == current) continue;
      double score = weight_to[c] - resolution * g.strength[v] * comm_strength[c] / (2.0 * m);
      // Moves must strictly improve modularity (termination); ties between
      // improving candidates resolve to the smaller label (determinism).
      bool better = score > best_score + 1e-12;
      bool tie_between_moves =
          best != current && std::abs(score - best_score) <= 1e-12 && c < best;
      if (better || tie_between_moves) {
        best_score = score;
        best = c;
      }
    }
    comm_strength[best] += g.strength[v];

    for (int c : candidates) weight_to[c] = 0.0;
    weight_to[current] = 0.0;

    if (best != current) {
      labels[v] = best;
      moved_any = true;
      for (const auto& [u, w] : g.adj[v])
        if (labels[u] != best && !queued[u]) {
          queue.push_back(u);
          queued[u] = 1;
        }
    }
  }
  return moved_any;
}

// Refinement: within each community of `partition`, greedily merge singleton
// refined clusters into the best positively-gaining refined cluster. The
// refined partition drives aggregation.
inline std::vector<int> refine(const LocalGraph& g, const std::vector<int>& partition,
                               double resolution, std::mt19937_64& rng) {
  const double m = g.total_weight;
  std::vector<int> refined(g.n);
  std::iota(refined.begin(), refined.end(), 0);
  if (m <= 0) return refined;

  std::vector<double> cluster_strength(g.strength);
  std::vector<int> cluster_size(g.n, 1);

  std::vector<int> order(g.n);
  std::iota(order.begin(), order.end(), 0);
  deterministic_shuffle(order, rng);

  std::vector<double> weight_to(g.n, 0.0);
  for (int v : order) {
    if (cluster_size[refined[v]] > 1) continue;  // only lone nodes merge
    std::vector<int> candidates;
    for (const auto& [u, w] : g.adj[v]) {
      if (partition[u] != partition[v]) continue;
      int c = refined[u];
      if (c == refined[v]) continue;
      if (weight_to[c] == 0.0) candidates.push_back(c);
      weight_to[c] += w;
    }
    double best_score = 0.0;
    int best = -1;
    for (int c : candidates) {
      double score = weight_to[c] - resolution * g.strength[v] * cluster_strength[c] / (2.0 * m);
      if (score > best_score + 1e-12 || (std::abs(score - best_score) <= 1e-12 && best != -1 && c < best)) {
        best_score = score;
        best = c;
      }
    }
    for (int c : candidates) weight_to[c] = 0.0;
    if (best != -1) {
      cluster_strength[best] += g.strength[v];
      cluster_size[best] += 1;
      cluster_size[refined[v]] -= 1;
      refined[v] = best;
    }
  }
  return refined;
}

inline LocalGraph aggregate(const LocalGraph& g, const std::vector<int>& labels, int ncomms) {
  std::vector<std::pair<int, int>> edges;
  std::vector<double> weights;
  std::map<std::pair<int, int>, double> accum;
  for (int v = 0; v < g.n; ++v) {
    if (g.self_weight[v] > 0) accum[{labels[v], labels[v]}] += g.self_weight[v];
    for (const auto& [u, w] : g.adj[v]) {
      if (u < v) continue;
      int a = labels[v], b = labels[u];
      if (a > b) std::swap(a, b);
      accum[{a, b}] += w;
    }
  }
  for (const auto& [key, w] : accum) {
    edges.push_back(key);
    weights.push_back(w);
  }
  return LocalGraph::from_edges(ncomms, edges, weights);
}

}  // namespace detail

// Leiden community detection with the modularity objective. Deterministic
// for a fixed seed. Returns one label per vertex, labels compacted to 0..k-1
// and renumbered by smallest member vertex.
inline std::vector<int> leiden_partition(const LocalGraph& graph, double resolution,
                                         uint64_t seed) {
  std::mt19937_64 rng(seed);
  LocalGraph g = graph;

  // orig_assign[v] = vertex of g currently representing original vertex v
  std::vector<int> orig_assign(graph.n);
  std::iota(orig_assign.begin(), orig_assign.end(), 0);

  for (;;) {
    std::vector<int> labels(g.n);
    std::iota(labels.begin(), labels.end(), 0);
    detail::move_nodes(g, labels, resolution, rng);
    int ncomms = detail::compact_labels(labels);
    if (ncomms == g.n) break;  // nothing merged; aggregation reached a fixed point

    std::vector<int> refined = detail::refine(g, labels, resolution, rng);
    int nref = detail::compact_labels(refined);
    // A fully-singleton refinement would make aggregation a no-op; fall back
    // to aggregating by the partition itself, which strictly shrinks.
    const std::vector<int>& agg_by = (nref == g.n) ? labels : refined;
    int agg_n = (nref == g.n) ? ncomms : nref;

    g = detail::aggregate(g, agg_by, agg_n);
    for (int& a : orig_assign) a = agg_by[a];
  }

  // Renumber by smallest original member for a canonical labeling.
  std::vector<int> first_member(graph.n, -1);
  int next = 0;
  std::vector<int> remap(graph.n, -1);
  for (int v = 0; v < graph.n; ++v) {
    int c = orig_assign[v];
    if (remap[c] == -1) remap[c] = next++;
    first_member[v] = remap[c];
  }
  return first_member;
}

}  // namespace retag
