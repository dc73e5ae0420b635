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
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "wassdim/core.hpp"
#include "wassdim/rng.hpp"
#include "wassdim/transport.hpp"

namespace wassdim {

/// Raised when W1 fails to decrease with the sample size, which makes the
/// decay-rate formulas meaningless.
struct NonDecreasingDecay : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One point of the W1-vs-n decay curve: scale k, sample size n = 2^k, the
/// measured distance, and the solver metadata behind it.
struct ScaleEntry {
  unsigned k = 0;
  std::size_t n = 0;
  double w1 = 0.0;
  TransportResult meta;
};

struct ScaleSeries {
  std::vector<ScaleEntry> entries;

  void validate() const {
    if (entries.size() < 2)
      throw std::invalid_argument("ScaleSeries: need at least 2 scales");
    for (const ScaleEntry& e : entries)
      if (!(e.w1 > 0.0))
        throw std::invalid_argument("ScaleSeries: w1 values must be positive");
    for (std::size_t i = 0; i < entries.size(); ++i)
      for (std::size_t j = i + 1; j < entries.size(); ++j)
        if (entries[i].k == entries[j].k)
          throw std::invalid_argument("ScaleSeries: scales must be distinct");
  }
};

enum class EstimateMethod { ratio, regression, mle };

inline const char* to_string(EstimateMethod m) {
  switch (m) {
    case EstimateMethod::ratio: return "ratio";
    case EstimateMethod::regression: return "regression";
    default: return "mle";
  }
}

struct DimensionEstimate {
  double d_hat = 0.0;
  double slope = 0.0;      // fitted slope of log2 w1 vs log2 n
  double intercept = 0.0;
  std::vector<double> residuals;  // per scale, observed minus fitted
  ScaleSeries series;
  MetricKind metric_kind = MetricKind::euclidean;
  EstimateMethod method = EstimateMethod::regression;
  std::size_t mle_skipped = 0;  // points dropped for zero neighbor distances

  double residual_sum_of_squares() const {
    double s = 0.0;
    for (double r : residuals) s += r * r;
    return s;
  }
};

/// Two-sample ratio estimator:
///   d_n = log(alpha) / (log W1(P_n, P_n') - log W1(P_an, P_an')).
inline DimensionEstimate ratio_estimate(double w1_small, double w1_large,
                                        double alpha) {
  if (!(alpha > 1.0))
    throw std::invalid_argument("ratio_estimate: alpha must be > 1");
  if (!(w1_small > 0.0) || !(w1_large > 0.0))
    throw std::invalid_argument("ratio_estimate: distances must be positive");
  if (w1_small <= w1_large)
    throw NonDecreasingDecay(
        "ratio_estimate: W1 did not decrease from n to alpha*n");
  DimensionEstimate est;
  est.method = EstimateMethod::ratio;
  est.d_hat = std::log(alpha) / (std::log(w1_small) - std::log(w1_large));
  est.slope = -1.0 / est.d_hat;
  return est;
}

namespace detail {

struct OlsFit {
  double slope;
  double intercept;
};

inline OlsFit ols(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0)
    throw std::invalid_argument("ols: degenerate abscissae");
  const double slope = (n * sxy - sx * sy) / denom;
  return {slope, (sy - slope * sx) / n};
}

}  // namespace detail

/// Multi-scale slope estimator: ordinary least squares of log2 w1 on
/// log2 n; the estimated dimension is -1/slope. The entries are sorted by
/// scale in the returned series and residuals align with it.
inline DimensionEstimate slope_estimate(const ScaleSeries& series) {
  series.validate();
  DimensionEstimate est;
  est.method = EstimateMethod::regression;
  est.series = series;
  std::sort(est.series.entries.begin(), est.series.entries.end(),
            [](const ScaleEntry& a, const ScaleEntry& b) { return a.k < b.k; });

  std::vector<double> x, y;
  x.reserve(est.series.entries.size());
  y.reserve(est.series.entries.size());
  for (const ScaleEntry& e : est.series.entries) {
    x.push_back(std::log2(static_cast<double>(e.n)));
    y.push_back(std::log2(e.w1));
  }
  const auto fit = detail::ols(x, y);
  if (fit.slope >= 0.0)
    throw NonDecreasingDecay("slope_estimate: nonnegative slope (no decay)");
  est.slope = fit.slope;
  est.intercept = fit.intercept;
  est.d_hat = -1.0 / fit.slope;
  est.residuals.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    est.residuals[i] = y[i] - (fit.intercept + fit.slope * x[i]);
  return est;
}

/// Levina-Bickel MLE: per point,
///   m_k(x) = [ 1/(k-1) * sum_{j=1..k} log(T_k(x) / T_j(x)) ]^{-1}
/// with T_j the distance to the j-th nearest neighbor (self excluded, ties
/// by sorted order with index tiebreak). The estimate averages m_k over the
/// points. Points with a zero T_j (duplicates) are skipped and counted.
inline DimensionEstimate mle_estimate(const PointCloud& cloud, std::size_t k) {
  if (k < 2 || k >= cloud.n)
    throw std::invalid_argument("mle_estimate: need 2 <= k < n");
  DimensionEstimate est;
  est.method = EstimateMethod::mle;

  std::vector<double> dists(cloud.n - 1);
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < cloud.n; ++i) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < cloud.n; ++j) {
      if (j == i) continue;
      dists[c++] = euclidean_distance(cloud.row(i), cloud.row(j));
    }
    std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
    std::sort(dists.begin(), dists.begin() + k);
    if (dists[0] <= 0.0) {
      ++est.mle_skipped;
      continue;
    }
    const double t_k = dists[k - 1];
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) acc += std::log(t_k / dists[j]);
    acc /= static_cast<double>(k - 1);
    if (acc <= 0.0) {  // all k neighbor distances equal
      ++est.mle_skipped;
      continue;
    }
    sum += 1.0 / acc;
    ++used;
  }
  if (used == 0)
    throw std::invalid_argument(
        "mle_estimate: every point was skipped (duplicate-dominated cloud)");
  est.d_hat = sum / static_cast<double>(used);
  return est;
}

/// Disjoint subsample indices for each requested scale: two index sets of
/// size 2^k drawn without replacement, fresh draw per scale. Cross-scale
/// overlap is permitted.
struct SplitPlan {
  std::uint64_t seed = 0;
  double alpha = 2.0;  // size ratio the ratio-form estimator reads off the plan
  struct ScaleSplit {
    unsigned k = 0;
    std::size_t n = 0;
    std::vector<std::size_t> first;
    std::vector<std::size_t> second;
  };
  std::vector<ScaleSplit> splits;
};

inline SplitPlan make_split_plan(std::size_t n_total,
                                 std::span<const unsigned> scales,
                                 double alpha, std::uint64_t seed) {
  if (scales.empty())
    throw std::invalid_argument("make_split_plan: no scales requested");
  if (!(alpha >= 1.0))
    throw std::invalid_argument("make_split_plan: alpha must be >= 1");
  SplitPlan plan;
  plan.seed = seed;
  plan.alpha = alpha;
  for (unsigned k : scales) {
    if (k >= 63)
      throw std::invalid_argument("make_split_plan: scale too large");
    const std::size_t n = std::size_t{1} << k;
    if (2 * n > n_total)
      throw std::invalid_argument(
          "make_split_plan: insufficient data for scale 2^" +
          std::to_string(k));
    Rng rng(derive_seed(derive_seed(seed, stream::kSplitPlan), k));
    // Partial Fisher-Yates: the first 2n slots become the two disjoint sets.
    std::vector<std::size_t> idx(n_total);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t t = 0; t < 2 * n; ++t) {
      const std::size_t r =
          t + static_cast<std::size_t>(rng.next_u64() % (n_total - t));
      std::swap(idx[t], idx[r]);
    }
    SplitPlan::ScaleSplit split;
    split.k = k;
    split.n = n;
    split.first.assign(idx.begin(), idx.begin() + n);
    split.second.assign(idx.begin() + n, idx.begin() + 2 * n);
    plan.splits.push_back(std::move(split));
  }
  return plan;
}

/// Multiplicative sanity envelope from the estimator guarantee: with slack
/// beta, an admissible estimate lies in [d / (1 + 4 beta), (1 + 4 beta) d].
struct DimensionEnvelope {
  double lo;
  double hi;
  bool contains(double d_hat) const { return d_hat >= lo && d_hat <= hi; }
};

inline DimensionEnvelope theorem_envelope(double d, double beta) {
  return {d / (1.0 + 4.0 * beta), (1.0 + 4.0 * beta) * d};
}

}  // namespace wassdim
