// Copyright 2026 The Wassdim Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <queue>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wassdim/core.hpp"
#include "wassdim/graph.hpp"
#include "wassdim/parallel.hpp"

namespace wassdim {

/// Single-source shortest paths with a binary heap (lazy deletion).
/// Unreachable vertices hold +infinity.
inline std::vector<double> dijkstra(const NeighborGraph::Adjacency& adj,
                                    std::size_t n, std::size_t source) {
  std::vector<double> dist(n, kInf);
  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  dist[source] = 0.0;
  heap.push({0.0, static_cast<std::uint32_t>(source)});
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    for (std::size_t e = adj.offsets[v]; e < adj.offsets[v + 1]; ++e) {
      const std::uint32_t u = adj.targets[e];
      const double nd = d + adj.weights[e];
      if (nd < dist[u]) {
        dist[u] = nd;
        heap.push({nd, u});
      }
    }
  }
  return dist;
}

/// Shortest-path rows for the given sources only. rows[s] is the full
/// distance vector from sources[s]. Sources run in parallel; the graph is
/// shared read-only.
inline std::vector<std::vector<double>> geodesic_rows(
    const NeighborGraph& graph, std::span<const std::size_t> sources) {
  const auto adj = graph.adjacency();
  std::vector<std::vector<double>> rows(sources.size());
  parallel_for(sources.size(), [&](std::size_t s) {
    if (sources[s] >= graph.n)
      throw std::out_of_range("geodesic_rows: source out of range");
    rows[s] = dijkstra(adj, graph.n, sources[s]);
  });
  return rows;
}

/// All-pairs graph-geodesic distances by per-source Dijkstra. Unreachable
/// pairs are +infinity and raise the disconnection flag.
inline DistanceMatrix geodesic_matrix(const NeighborGraph& graph) {
  DistanceMatrix m(graph.n, MetricKind::graph_geodesic);
  const auto adj = graph.adjacency();
  std::vector<char> saw_inf(std::max<std::size_t>(graph.n, 1), 0);
  parallel_for(graph.n, [&](std::size_t i) {
    const auto dist = dijkstra(adj, graph.n, i);
    for (std::size_t j = 0; j < graph.n; ++j) {
      m.at(i, j) = dist[j];
      if (!std::isfinite(dist[j])) saw_inf[i] = 1;
    }
  });
  for (std::size_t i = 0; i < graph.n; ++i)
    if (saw_inf[i]) m.disconnected = true;
  return m;
}

/// Euclidean nearest anchor, ties broken by lowest index.
inline std::size_t project_to_anchors(const PointCloud& anchors,
                                      std::span<const double> point) {
  std::size_t best = 0;
  double best_d = kInf;
  for (std::size_t i = 0; i < anchors.n; ++i) {
    const double d = squared_distance(anchors.row(i), point);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

/// Extends an anchor-level graph metric to arbitrary points:
///   d_G(p, q) = ||p - pi(p)|| + d_G(pi(p), pi(q)) + ||q - pi(q)||
/// with pi the Euclidean nearest anchor. The diagonal is zero by definition.
inline DistanceMatrix extend_to_points(const DistanceMatrix& graph_metric,
                                       const PointCloud& anchors,
                                       const PointCloud& queries) {
  if (anchors.n == 0)
    throw std::invalid_argument("extend_to_points: empty anchor set");
  if (graph_metric.n != anchors.n)
    throw std::invalid_argument(
        "extend_to_points: metric was not built over these anchors");
  if (queries.dim != anchors.dim)
    throw std::invalid_argument("extend_to_points: dimension mismatch");

  std::vector<std::size_t> proj(queries.n);
  std::vector<double> offset(queries.n);
  for (std::size_t i = 0; i < queries.n; ++i) {
    proj[i] = project_to_anchors(anchors, queries.row(i));
    offset[i] = euclidean_distance(anchors.row(proj[i]), queries.row(i));
  }

  DistanceMatrix out(queries.n, MetricKind::graph_geodesic);
  for (std::size_t i = 0; i < queries.n; ++i) {
    for (std::size_t j = i + 1; j < queries.n; ++j) {
      const double mid = graph_metric.at(proj[i], proj[j]);
      const double d = offset[i] + mid + offset[j];
      out.at(i, j) = d;
      out.at(j, i) = d;
      if (!std::isfinite(d)) out.disconnected = true;
    }
  }
  return out;
}

/// A built pooled graph plus the connectivity escalation record.
struct PooledGraph {
  NeighborGraph graph;
  std::size_t knn_k_used = 0;  // final k for knn construction, 0 for epsilon
  bool escalated = false;
};

/// Builds the neighbor graph over a pooled cloud. A disconnected kNN graph
/// escalates k by doubling (bounded by n - 1) until connected; epsilon
/// graphs are returned as built.
inline PooledGraph build_pooled_graph(const PointCloud& pool,
                                      GraphConstruction construction) {
  PooledGraph result;
  if (construction.kind == GraphConstructionKind::epsilon) {
    result.graph = build_eps_graph(pool, construction.eps);
    return result;
  }
  std::size_t k = construction.k ? construction.k : default_knn_k(pool.n);
  k = std::min(k, pool.n - 1);
  result.graph = build_knn_graph(pool, k);
  while (!is_connected(result.graph) && k < pool.n - 1) {
    k = std::min(2 * k, pool.n - 1);
    result.graph = build_knn_graph(pool, k);
    result.escalated = true;
  }
  result.knn_k_used = k;
  return result;
}

/// Geodesic matrix over the union of every subsample. Subsample Wasserstein
/// computations index into this matrix. Escalation metadata is recorded on
/// the way; a still-disconnected graph surfaces through the matrix flag.
struct PooledMetricResult {
  DistanceMatrix matrix;
  std::size_t knn_k_used = 0;
  bool escalated = false;
};

inline PooledMetricResult pooled_metric(const PointCloud& all_points,
                                        GraphConstruction construction) {
  if (all_points.n < 1)
    throw std::invalid_argument("pooled_metric: empty pool");
  PooledGraph built = build_pooled_graph(all_points, construction);
  PooledMetricResult result;
  result.knn_k_used = built.knn_k_used;
  result.escalated = built.escalated;
  result.matrix = geodesic_matrix(built.graph);
  return result;
}

}  // namespace wassdim
