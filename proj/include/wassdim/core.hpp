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
#include <cstdio>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wassdim {

/// Dense point set: n points in ambient dimension `dim`, row-major.
struct PointCloud {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> data;  // n * dim coordinates

  PointCloud() = default;
  PointCloud(std::size_t n_, std::size_t dim_)
      : n(n_), dim(dim_), data(n_ * dim_, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return data[i * dim + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * dim + j]; }

  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * dim, dim};
  }
  std::span<double> row(std::size_t i) {
    return {data.data() + i * dim, dim};
  }

  bool finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline double squared_distance(std::span<const double> a,
                               std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double euclidean_distance(std::span<const double> a,
                                 std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

inline double norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

enum class MetricKind { euclidean, graph_geodesic };

inline const char* to_string(MetricKind m) {
  return m == MetricKind::euclidean ? "euclidean" : "graph_geodesic";
}

/// Symmetric n x n nonnegative distance matrix. Unreachable pairs in a
/// graph-geodesic matrix hold +infinity and set `disconnected`.
struct DistanceMatrix {
  std::size_t n = 0;
  std::vector<double> values;  // n * n, row-major
  MetricKind kind = MetricKind::euclidean;
  bool disconnected = false;

  DistanceMatrix() = default;
  DistanceMatrix(std::size_t n_, MetricKind kind_)
      : n(n_), values(n_ * n_, 0.0), kind(kind_) {}

  double& at(std::size_t i, std::size_t j) { return values[i * n + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

/// Pairwise Euclidean distances of a cloud.
inline DistanceMatrix euclidean_matrix(const PointCloud& cloud) {
  DistanceMatrix m(cloud.n, MetricKind::euclidean);
  for (std::size_t i = 0; i < cloud.n; ++i) {
    for (std::size_t j = i + 1; j < cloud.n; ++j) {
      const double d = euclidean_distance(cloud.row(i), cloud.row(j));
      m.at(i, j) = d;
      m.at(j, i) = d;
    }
  }
  return m;
}

/// Shortest round-trippable decimal form of a double; keeps CSV and manifest
/// output bit-reproducible across runs.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Row-major full symmetric CSV dump, one matrix row per line.
inline void write_csv(const DistanceMatrix& m, std::ostream& out) {
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::size_t j = 0; j < m.n; ++j) {
      if (j) out << ',';
      out << format_double(m.at(i, j));
    }
    out << '\n';
  }
}

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace wassdim
