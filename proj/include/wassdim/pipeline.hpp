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
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wassdim/core.hpp"
#include "wassdim/estimator.hpp"
#include "wassdim/geodesic.hpp"
#include "wassdim/graph.hpp"
#include "wassdim/rng.hpp"
#include "wassdim/transport.hpp"

namespace wassdim {

enum class MetricMode { euclidean_only, graph_only, both };

struct OtConfig {
  OtMethod method = OtMethod::exact_assignment;
  double reg = 0.1;
  std::size_t max_iters = 10000;
  double tol = 1e-9;
};

struct EstimateConfig {
  std::vector<unsigned> scales{5, 6, 7, 8, 9, 10};
  OtConfig ot;
  GraphConstruction graph = GraphConstruction::knn(0);  // 0 = default rule
  MetricMode metric_mode = MetricMode::both;
  std::uint64_t seed = 1;
  unsigned repetitions = 1;  // W1 draws per scale, averaged in log space
};

struct PipelineResult {
  std::optional<DimensionEstimate> euclidean;
  std::optional<DimensionEstimate> graph;
  std::size_t pool_size = 0;
  std::size_t knn_k_used = 0;
  bool graph_escalated = false;

  /// The estimate the run is headlined by: the graph-metric one when
  /// present, else the Euclidean one.
  const DimensionEstimate& primary() const {
    if (graph) return *graph;
    if (euclidean) return *euclidean;
    throw std::logic_error("PipelineResult: no estimate computed");
  }
};

/// Draws a fresh cloud of the requested size for a derived seed; used by the
/// synthetic experiments, which regenerate samples per scale instead of
/// subsampling a fixed corpus.
using CloudSampler =
    std::function<PointCloud(std::size_t n, std::uint64_t seed)>;

namespace detail {

inline constexpr std::uint64_t kRepetitionTag = 0x5245'5045'4154'0009ull;

// One scale of the decay computation: positions into the pooled cloud for
// each repetition's two subsamples.
struct ScaleDraw {
  unsigned k = 0;
  std::size_t n = 0;
  std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>>
      reps;
};

struct PooledDraws {
  PointCloud pool;
  std::vector<ScaleDraw> scales;
};

inline void validate_config(const EstimateConfig& config) {
  if (config.scales.empty())
    throw std::invalid_argument("estimate_dimension: no scales requested");
  if (config.repetitions < 1)
    throw std::invalid_argument("estimate_dimension: repetitions must be >= 1");
}

// Corpus mode: disjoint within-scale subsample indices, pooled over the
// union of every draw.
inline PooledDraws corpus_draws(const PointCloud& cloud,
                                const EstimateConfig& config) {
  PooledDraws draws;
  std::vector<std::vector<SplitPlan>> plans(config.repetitions);
  std::vector<char> in_pool(cloud.n, 0);
  for (unsigned rep = 0; rep < config.repetitions; ++rep) {
    const std::uint64_t rep_seed =
        derive_seed(derive_seed(config.seed, kRepetitionTag), rep);
    plans[rep].push_back(
        make_split_plan(cloud.n, config.scales, 2.0, rep_seed));
    for (const auto& split : plans[rep].back().splits) {
      for (std::size_t i : split.first) in_pool[i] = 1;
      for (std::size_t i : split.second) in_pool[i] = 1;
    }
  }
  std::vector<std::size_t> pool_of(cloud.n, 0);
  draws.pool = PointCloud(0, cloud.dim);
  for (std::size_t i = 0; i < cloud.n; ++i) {
    if (!in_pool[i]) continue;
    pool_of[i] = draws.pool.n;
    draws.pool.data.insert(draws.pool.data.end(), cloud.row(i).begin(),
                           cloud.row(i).end());
    ++draws.pool.n;
  }
  for (std::size_t s = 0; s < config.scales.size(); ++s) {
    ScaleDraw draw;
    draw.k = config.scales[s];
    draw.n = std::size_t{1} << draw.k;
    for (unsigned rep = 0; rep < config.repetitions; ++rep) {
      const auto& split = plans[rep].front().splits[s];
      std::vector<std::size_t> a, b;
      a.reserve(split.n);
      b.reserve(split.n);
      for (std::size_t i : split.first) a.push_back(pool_of[i]);
      for (std::size_t i : split.second) b.push_back(pool_of[i]);
      draw.reps.emplace_back(std::move(a), std::move(b));
    }
    draws.scales.push_back(std::move(draw));
  }
  return draws;
}

// Fresh mode: two independent draws per scale and repetition, all
// concatenated into the pool.
inline PooledDraws fresh_draws(const CloudSampler& sampler,
                               const EstimateConfig& config) {
  PooledDraws draws;
  for (unsigned k : config.scales) {
    if (k >= 63) throw std::invalid_argument("estimate_dimension: scale too large");
    ScaleDraw draw;
    draw.k = k;
    draw.n = std::size_t{1} << k;
    for (unsigned rep = 0; rep < config.repetitions; ++rep) {
      std::vector<std::size_t> pos[2];
      for (int half = 0; half < 2; ++half) {
        const std::uint64_t draw_seed = derive_seed(
            derive_seed(derive_seed(config.seed, stream::kFreshDraw),
                        (std::uint64_t{k} << 32) | rep),
            static_cast<std::uint64_t>(half));
        PointCloud sample = sampler(draw.n, draw_seed);
        if (sample.n != draw.n)
          throw std::runtime_error("estimate_dimension: sampler size mismatch");
        if (draws.pool.n == 0) draws.pool.dim = sample.dim;
        if (sample.dim != draws.pool.dim)
          throw std::runtime_error(
              "estimate_dimension: sampler dimension changed between draws");
        pos[half].reserve(draw.n);
        for (std::size_t i = 0; i < sample.n; ++i) {
          pos[half].push_back(draws.pool.n + i);
        }
        draws.pool.data.insert(draws.pool.data.end(), sample.data.begin(),
                               sample.data.end());
        draws.pool.n += sample.n;
      }
      draw.reps.emplace_back(std::move(pos[0]), std::move(pos[1]));
    }
    draws.scales.push_back(std::move(draw));
  }
  return draws;
}

inline TransportResult solve_block(const CostMatrix& cost,
                                   const OtConfig& ot) {
  if (ot.method == OtMethod::exact_assignment) return exact_w1(cost);
  SinkhornOptions opts;
  opts.reg = ot.reg;
  opts.max_iters = ot.max_iters;
  opts.tol = ot.tol;
  return sinkhorn_w1(cost, opts);
}

// Log-space average of per-repetition W1 values; metadata keeps the most
// pessimistic convergence picture across repetitions.
inline ScaleEntry fold_entries(unsigned k, std::size_t n,
                               const std::vector<TransportResult>& reps) {
  ScaleEntry entry;
  entry.k = k;
  entry.n = n;
  entry.meta = reps.front();
  double log_sum = 0.0;
  for (const TransportResult& r : reps) {
    if (!(r.w1 > 0.0))
      throw NonDecreasingDecay(
          "estimate_dimension: nonpositive W1 at scale 2^" + std::to_string(k));
    log_sum += std::log2(r.w1);
    entry.meta.converged = entry.meta.converged && r.converged;
    entry.meta.iterations_run =
        std::max(entry.meta.iterations_run, r.iterations_run);
    entry.meta.marginal_error =
        std::max(entry.meta.marginal_error, r.marginal_error);
  }
  entry.w1 = std::exp2(log_sum / static_cast<double>(reps.size()));
  return entry;
}

inline PipelineResult run_decay_series(const PooledDraws& draws,
                                       const EstimateConfig& config) {
  const bool want_euclid = config.metric_mode != MetricMode::graph_only;
  const bool want_graph = config.metric_mode != MetricMode::euclidean_only;

  PipelineResult result;
  result.pool_size = draws.pool.n;

  // Graph metric rows from every source that appears in a first subsample.
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> row_of;  // pool position -> row index
  NeighborGraph graph;
  if (want_graph) {
    PooledGraph built = build_pooled_graph(draws.pool, config.graph);
    result.knn_k_used = built.knn_k_used;
    result.graph_escalated = built.escalated;
    std::vector<std::size_t> sources;
    std::vector<char> needed(draws.pool.n, 0);
    for (const auto& scale : draws.scales)
      for (const auto& rep : scale.reps)
        for (std::size_t p : rep.first)
          if (!needed[p]) {
            needed[p] = 1;
            sources.push_back(p);
          }
    row_of.assign(draws.pool.n, static_cast<std::size_t>(-1));
    for (std::size_t s = 0; s < sources.size(); ++s) row_of[sources[s]] = s;
    rows = geodesic_rows(built.graph, sources);
  }

  ScaleSeries euclid_series, graph_series;
  for (const auto& scale : draws.scales) {
    std::vector<TransportResult> euclid_reps, graph_reps;
    for (const auto& [a_pos, b_pos] : scale.reps) {
      try {
        if (want_euclid) {
          CostMatrix cost(a_pos.size(), b_pos.size());
          for (std::size_t r = 0; r < a_pos.size(); ++r)
            for (std::size_t c = 0; c < b_pos.size(); ++c)
              cost.at(r, c) = euclidean_distance(draws.pool.row(a_pos[r]),
                                                 draws.pool.row(b_pos[c]));
          euclid_reps.push_back(solve_block(cost, config.ot));
        }
        if (want_graph) {
          CostMatrix cost(a_pos.size(), b_pos.size());
          for (std::size_t r = 0; r < a_pos.size(); ++r) {
            const auto& row = rows[row_of[a_pos[r]]];
            for (std::size_t c = 0; c < b_pos.size(); ++c) {
              const double v = row[b_pos[c]];
              if (!std::isfinite(v))
                throw std::runtime_error("disconnected pooled graph");
              cost.at(r, c) = v;
            }
          }
          graph_reps.push_back(solve_block(cost, config.ot));
        }
      } catch (const std::exception& e) {
        throw std::runtime_error("scale 2^" + std::to_string(scale.k) + ": " +
                                 e.what());
      }
    }
    if (want_euclid)
      euclid_series.entries.push_back(
          fold_entries(scale.k, scale.n, euclid_reps));
    if (want_graph)
      graph_series.entries.push_back(
          fold_entries(scale.k, scale.n, graph_reps));
  }

  if (want_euclid) {
    DimensionEstimate est = slope_estimate(euclid_series);
    est.metric_kind = MetricKind::euclidean;
    result.euclidean = std::move(est);
  }
  if (want_graph) {
    DimensionEstimate est = slope_estimate(graph_series);
    est.metric_kind = MetricKind::graph_geodesic;
    result.graph = std::move(est);
  }
  return result;
}

}  // namespace detail

/// Dimension estimates for a fixed corpus: builds the per-scale split plan,
/// pools every drawn point for the graph metric, computes W1 per scale under
/// the requested metrics, and fits the decay slope for each.
inline PipelineResult estimate_dimension(const PointCloud& cloud,
                                         const EstimateConfig& config) {
  detail::validate_config(config);
  if (cloud.n < 2)
    throw std::invalid_argument("estimate_dimension: corpus too small");
  return detail::run_decay_series(detail::corpus_draws(cloud, config), config);
}

/// Fresh-draw variant for synthetic distributions: each scale regenerates
/// two independent samples through the sampler; the pooled graph metric is
/// built over everything that was generated.
inline PipelineResult estimate_dimension_fresh(const CloudSampler& sampler,
                                               const EstimateConfig& config) {
  detail::validate_config(config);
  return detail::run_decay_series(detail::fresh_draws(sampler, config),
                                  config);
}

}  // namespace wassdim
