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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "wassdim/core.hpp"

namespace wassdim {

enum class GraphConstructionKind { knn, epsilon };

struct GraphConstruction {
  GraphConstructionKind kind = GraphConstructionKind::knn;
  std::size_t k = 0;   // knn; 0 selects the default rule at build time
  double eps = 0.0;    // epsilon

  static GraphConstruction knn(std::size_t k) {
    return {GraphConstructionKind::knn, k, 0.0};
  }
  static GraphConstruction epsilon(double eps) {
    return {GraphConstructionKind::epsilon, 0, eps};
  }
};

/// Default neighbor count: max(10, ceil(2 log2 n)). Keeps small samples
/// connected without introducing shortcut edges at desk scale.
inline std::size_t default_knn_k(std::size_t n) {
  if (n < 2) return 1;
  const double lg = std::log2(static_cast<double>(n));
  const auto k = static_cast<std::size_t>(std::ceil(2.0 * lg));
  return std::max<std::size_t>(10, k);
}

/// Weighted undirected graph over sample indices. Edges are stored once with
/// i < j; weights equal the Euclidean distance of their endpoints.
struct NeighborGraph {
  std::size_t n = 0;
  struct Edge {
    std::uint32_t i, j;
    double weight;
  };
  std::vector<Edge> edges;
  GraphConstruction construction;

  /// Compressed adjacency (both directions) for traversal.
  struct Adjacency {
    std::vector<std::size_t> offsets;   // n + 1
    std::vector<std::uint32_t> targets;
    std::vector<double> weights;
  };

  Adjacency adjacency() const {
    Adjacency adj;
    adj.offsets.assign(n + 1, 0);
    for (const Edge& e : edges) {
      ++adj.offsets[e.i + 1];
      ++adj.offsets[e.j + 1];
    }
    for (std::size_t v = 0; v < n; ++v) adj.offsets[v + 1] += adj.offsets[v];
    adj.targets.resize(2 * edges.size());
    adj.weights.resize(2 * edges.size());
    std::vector<std::size_t> cursor(adj.offsets.begin(), adj.offsets.end() - 1);
    for (const Edge& e : edges) {
      adj.targets[cursor[e.i]] = e.j;
      adj.weights[cursor[e.i]++] = e.weight;
      adj.targets[cursor[e.j]] = e.i;
      adj.weights[cursor[e.j]++] = e.weight;
    }
    return adj;
  }

  std::vector<std::size_t> degrees() const {
    std::vector<std::size_t> deg(n, 0);
    for (const Edge& e : edges) {
      ++deg[e.i];
      ++deg[e.j];
    }
    return deg;
  }
};

/// Symmetrized kNN graph: vertex i selects its k nearest neighbors (ties in
/// the k-th distance broken by lower index) and an edge is kept if either
/// endpoint selected the other.
inline NeighborGraph build_knn_graph(const PointCloud& cloud, std::size_t k) {
  const std::size_t n = cloud.n;
  if (k < 1 || k >= n)
    throw std::invalid_argument("build_knn_graph: need 1 <= k < n");
  NeighborGraph graph;
  graph.n = n;
  graph.construction = GraphConstruction::knn(k);

  // Directed picks, deduplicated through a sorted flat pair list.
  std::vector<std::pair<double, std::uint32_t>> cand(n - 1);
  std::vector<std::pair<std::pair<std::uint32_t, std::uint32_t>, double>> all;
  all.reserve(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      cand[c++] = {euclidean_distance(cloud.row(i), cloud.row(j)),
                   static_cast<std::uint32_t>(j)};
    }
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    for (std::size_t t = 0; t < k; ++t) {
      const auto a = static_cast<std::uint32_t>(i);
      const auto b = cand[t].second;
      const auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
      all.push_back({key, cand[t].first});
    }
  }
  std::sort(all.begin(), all.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  for (std::size_t t = 0; t < all.size(); ++t) {
    if (t > 0 && all[t].first == all[t - 1].first) continue;
    graph.edges.push_back({all[t].first.first, all[t].first.second,
                           all[t].second});
  }
  return graph;
}

/// Epsilon-ball graph: edge (i, j) iff ||X_i - X_j|| <= eps. May be
/// disconnected or edgeless.
inline NeighborGraph build_eps_graph(const PointCloud& cloud, double eps) {
  if (eps <= 0.0)
    throw std::invalid_argument("build_eps_graph: eps must be positive");
  NeighborGraph graph;
  graph.n = cloud.n;
  graph.construction = GraphConstruction::epsilon(eps);
  for (std::size_t i = 0; i < cloud.n; ++i) {
    for (std::size_t j = i + 1; j < cloud.n; ++j) {
      const double d = euclidean_distance(cloud.row(i), cloud.row(j));
      if (d <= eps)
        graph.edges.push_back({static_cast<std::uint32_t>(i),
                               static_cast<std::uint32_t>(j), d});
    }
  }
  return graph;
}

inline bool is_connected(const NeighborGraph& graph) {
  if (graph.n <= 1) return true;
  const auto adj = graph.adjacency();
  std::vector<char> seen(graph.n, 0);
  std::vector<std::uint32_t> stack{0};
  seen[0] = 1;
  std::size_t visited = 1;
  while (!stack.empty()) {
    const std::uint32_t v = stack.back();
    stack.pop_back();
    for (std::size_t e = adj.offsets[v]; e < adj.offsets[v + 1]; ++e) {
      const std::uint32_t u = adj.targets[e];
      if (!seen[u]) {
        seen[u] = 1;
        ++visited;
        stack.push_back(u);
      }
    }
  }
  return visited == graph.n;
}

}  // namespace wassdim
