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
#include <span>
#include <stdexcept>
#include <vector>

#include "wassdim/core.hpp"

namespace wassdim {

/// Ground-cost block between two uniform empirical measures.
struct CostMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // rows * cols, row-major

  CostMatrix() = default;
  CostMatrix(std::size_t r, std::size_t c)
      : rows(r), cols(c), values(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

  double mean() const {
    double s = 0.0;
    for (double v : values) s += v;
    return values.empty() ? 0.0 : s / static_cast<double>(values.size());
  }
};

enum class OtMethod { exact_assignment, sinkhorn };

inline const char* to_string(OtMethod m) {
  return m == OtMethod::exact_assignment ? "exact" : "sinkhorn";
}

/// A W1 value plus solver metadata.
struct TransportResult {
  double w1 = 0.0;
  OtMethod method = OtMethod::exact_assignment;
  double reg = 0.0;                 // sinkhorn only
  std::size_t iterations_run = 0;
  bool converged = true;
  double marginal_error = 0.0;      // sup deviation of coupling marginals
};

/// Euclidean cost block between two clouds of equal ambient dimension.
inline CostMatrix cost_between(const PointCloud& a, const PointCloud& b) {
  if (a.dim != b.dim)
    throw std::invalid_argument("cost_between: ambient dimensions differ");
  CostMatrix c(a.n, b.n);
  for (std::size_t i = 0; i < a.n; ++i)
    for (std::size_t j = 0; j < b.n; ++j)
      c.at(i, j) = euclidean_distance(a.row(i), b.row(j));
  return c;
}

/// Slices a precomputed metric into a cost block: cost[r][c] =
/// dist[idx_a[r]][idx_b[c]]. Rejects out-of-range indices and infinite
/// entries (a disconnected pool cannot feed a transport problem).
inline CostMatrix cost_from_metric(const DistanceMatrix& dist,
                                   std::span<const std::size_t> idx_a,
                                   std::span<const std::size_t> idx_b) {
  CostMatrix c(idx_a.size(), idx_b.size());
  for (std::size_t r = 0; r < idx_a.size(); ++r) {
    if (idx_a[r] >= dist.n)
      throw std::out_of_range("cost_from_metric: row index out of range");
    for (std::size_t k = 0; k < idx_b.size(); ++k) {
      if (idx_b[k] >= dist.n)
        throw std::out_of_range("cost_from_metric: column index out of range");
      const double v = dist.at(idx_a[r], idx_b[k]);
      if (!std::isfinite(v))
        throw std::invalid_argument(
            "cost_from_metric: infinite entry (disconnected metric)");
      c.at(r, k) = v;
    }
  }
  return c;
}

/// Exact W1 between equal-size uniform empirical measures: (1/n) times the
/// minimum-cost perfect matching, found by shortest augmenting paths with
/// dual potentials (Jonker-Volgenant style, O(n^3)). Optimal because the
/// uniform equal-size problem always admits a permutation optimizer.
inline TransportResult exact_w1(const CostMatrix& cost) {
  if (cost.rows != cost.cols)
    throw std::invalid_argument(
        "exact_w1: cost must be square (equal-size uniform marginals)");
  const std::size_t n = cost.rows;
  TransportResult result;
  result.method = OtMethod::exact_assignment;
  result.converged = true;
  result.marginal_error = 0.0;
  if (n == 0) return result;

  // 1-indexed internals; column 0 is the virtual unmatched column.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      const double* row = cost.values.data() + (i0 - 1) * n;
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = row[j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j) total += cost.at(match[j] - 1, j - 1);
  result.w1 = total / static_cast<double>(n);
  result.iterations_run = n;
  return result;
}

struct SinkhornOptions {
  double reg = 0.1;
  std::size_t max_iters = 10000;
  double tol = 1e-9;            // sup-norm change of the dual potentials
  std::size_t trace_stride = 0; // if > 0, log transport cost every stride iters
};

struct SinkhornCheckpoint {
  std::size_t iteration;
  double transport_cost;
};

namespace detail {

inline double log_sum_exp(std::span<const double> x) {
  double hi = -kInf;
  for (double v : x) hi = std::max(hi, v);
  if (!std::isfinite(hi)) return hi;
  double s = 0.0;
  for (double v : x) s += std::exp(v - hi);
  return hi + std::log(s);
}

// Transport term <P, C> and marginal sup-error of the entropic plan
// P_ij = exp((f_i + g_j - C_ij) / reg) against uniform marginals.
inline void plan_cost_and_marginals(const CostMatrix& cost,
                                    const std::vector<double>& f,
                                    const std::vector<double>& g, double reg,
                                    double* transport_cost,
                                    double* marginal_error) {
  const std::size_t n = cost.rows, m = cost.cols;
  const double a = 1.0 / static_cast<double>(n);
  const double b = 1.0 / static_cast<double>(m);
  std::vector<double> col_sum(m, 0.0);
  double total = 0.0;
  double row_err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = cost.values.data() + i * m;
    double row_sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double p = std::exp((f[i] + g[j] - row[j]) / reg);
      row_sum += p;
      col_sum[j] += p;
      total += p * row[j];
    }
    row_err = std::max(row_err, std::abs(row_sum - a));
  }
  double col_err = 0.0;
  for (std::size_t j = 0; j < m; ++j)
    col_err = std::max(col_err, std::abs(col_sum[j] - b));
  if (transport_cost) *transport_cost = total;
  if (marginal_error) *marginal_error = std::max(row_err, col_err);
}

}  // namespace detail

/// Entropically regularized W1 surrogate between uniform empirical measures
/// of sizes n and m. Runs log-domain Sinkhorn on exp(-cost/reg) and returns
/// the transport term <P, C> of the entropic plan (the entropy term is
/// excluded; the estimator needs a surrogate for W1 itself). Non-convergence
/// within max_iters is reported through `converged`, not as an error.
inline TransportResult sinkhorn_w1(const CostMatrix& cost,
                                   const SinkhornOptions& opt,
                                   std::vector<SinkhornCheckpoint>* trace =
                                       nullptr) {
  if (opt.reg <= 0.0)
    throw std::invalid_argument("sinkhorn_w1: reg must be positive");
  if (opt.max_iters < 1)
    throw std::invalid_argument("sinkhorn_w1: max_iters must be >= 1");
  const std::size_t n = cost.rows, m = cost.cols;
  if (n == 0 || m == 0)
    throw std::invalid_argument("sinkhorn_w1: empty cost matrix");

  const double reg = opt.reg;
  const double log_a = -std::log(static_cast<double>(n));
  const double log_b = -std::log(static_cast<double>(m));
  std::vector<double> f(n, 0.0), g(m, 0.0), scratch(std::max(n, m));

  TransportResult result;
  result.method = OtMethod::sinkhorn;
  result.reg = reg;
  result.converged = false;

  std::size_t iter = 0;
  while (iter < opt.max_iters) {
    ++iter;
    double delta = 0.0;
    // Row update: exact row marginals given g.
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = cost.values.data() + i * m;
      for (std::size_t j = 0; j < m; ++j) scratch[j] = (g[j] - row[j]) / reg;
      const double next = reg * (log_a - detail::log_sum_exp({scratch.data(), m}));
      delta = std::max(delta, std::abs(next - f[i]));
      f[i] = next;
    }
    // Column update: exact column marginals given f.
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < n; ++i)
        scratch[i] = (f[i] - cost.values[i * m + j]) / reg;
      const double next = reg * (log_b - detail::log_sum_exp({scratch.data(), n}));
      delta = std::max(delta, std::abs(next - g[j]));
      g[j] = next;
    }
    if (trace && opt.trace_stride > 0 && iter % opt.trace_stride == 0) {
      double c = 0.0;
      detail::plan_cost_and_marginals(cost, f, g, reg, &c, nullptr);
      trace->push_back({iter, c});
    }
    if (delta < opt.tol) {
      result.converged = true;
      break;
    }
  }

  result.iterations_run = iter;
  detail::plan_cost_and_marginals(cost, f, g, reg, &result.w1,
                                  &result.marginal_error);
  return result;
}

}  // namespace wassdim
