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
#include <numbers>
#include <stdexcept>
#include <vector>

#include "wassdim/core.hpp"
#include "wassdim/rng.hpp"

namespace wassdim {

/// Uniform sample on the unit sphere S^d in R^{d+1}: Gaussian-normalize
/// construction, one point per d+1 normal draws. Deterministic given seed.
inline PointCloud sample_sphere(std::size_t d, std::size_t n,
                                std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("sample_sphere: d must be >= 1");
  if (n < 1) throw std::invalid_argument("sample_sphere: n must be >= 1");
  Rng rng(derive_seed(seed, stream::kSphere));
  PointCloud cloud(n, d + 1);
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    do {
      for (std::size_t j = 0; j <= d; ++j) cloud.at(i, j) = rng.normal();
      r = norm(cloud.row(i));
    } while (r < 1e-12);
    for (std::size_t j = 0; j <= d; ++j) cloud.at(i, j) /= r;
  }
  return cloud;
}

/// Uniform sample in the d-ball of the given radius: Gaussian direction
/// times radius * U^{1/d}.
inline PointCloud sample_ball(std::size_t d, std::size_t n, double radius,
                              std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("sample_ball: d must be >= 1");
  if (n < 1) throw std::invalid_argument("sample_ball: n must be >= 1");
  if (radius <= 0.0)
    throw std::invalid_argument("sample_ball: radius must be positive");
  Rng rng(derive_seed(seed, stream::kBall));
  PointCloud cloud(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    do {
      for (std::size_t j = 0; j < d; ++j) cloud.at(i, j) = rng.normal();
      r = norm(cloud.row(i));
    } while (r < 1e-12);
    const double target =
        radius * std::pow(rng.next_double(), 1.0 / static_cast<double>(d));
    for (std::size_t j = 0; j < d; ++j) cloud.at(i, j) *= target / r;
  }
  return cloud;
}

/// Swiss roll in R^3: (t cos t, h, t sin t) with t uniform on [1.5pi, 4.5pi]
/// and h uniform on [0, 21] (the classical Isomap parametrization).
inline PointCloud swiss_roll(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("swiss_roll: n must be >= 1");
  Rng rng(derive_seed(seed, stream::kSwissRoll));
  PointCloud cloud(n, 3);
  constexpr double pi = std::numbers::pi;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = rng.uniform(1.5 * pi, 4.5 * pi);
    const double h = rng.uniform(0.0, 21.0);
    cloud.at(i, 0) = t * std::cos(t);
    cloud.at(i, 1) = h;
    cloud.at(i, 2) = t * std::sin(t);
  }
  return cloud;
}

/// Random monomial-feature embedding of an intrinsically d-dimensional cloud
/// into a higher ambient dimension.
struct EmbeddingSpec {
  std::size_t source_dim = 2;   // intrinsic manifold parameter d
  std::size_t target_dim = 20;  // ambient D, must be >= source_dim + 1
  unsigned degree = 3;          // polynomial degree p >= 1
  std::uint64_t seed = 1;

  void validate() const {
    if (degree < 1)
      throw std::invalid_argument("EmbeddingSpec: degree must be >= 1");
    if (target_dim < source_dim + 1)
      throw std::invalid_argument(
          "EmbeddingSpec: target_dim must be >= source_dim + 1");
  }
};

/// Exponent vectors of all monomials over `vars` variables with total degree
/// 1..degree, in graded lexicographic order. The first `vars` entries are the
/// degree-1 block (x_0, x_1, ...).
inline std::vector<std::vector<unsigned>> monomial_exponents(
    std::size_t vars, unsigned degree) {
  std::vector<std::vector<unsigned>> out;
  std::vector<unsigned> current(vars, 0);
  auto recurse = [&](auto&& self, std::size_t pos, unsigned remaining) -> void {
    if (pos + 1 == vars) {
      current[pos] = remaining;
      out.push_back(current);
      return;
    }
    for (unsigned e = remaining + 1; e-- > 0;) {
      current[pos] = e;
      self(self, pos + 1, remaining - e);
    }
  };
  for (unsigned total = 1; total <= degree; ++total)
    recurse(recurse, 0, total);
  return out;
}

/// Stacks the monomial features of every point: output column j is the
/// monomial with exponent vector exps[j].
inline PointCloud monomial_features(
    const PointCloud& cloud, const std::vector<std::vector<unsigned>>& exps) {
  PointCloud features(cloud.n, exps.size());
  for (std::size_t i = 0; i < cloud.n; ++i) {
    for (std::size_t j = 0; j < exps.size(); ++j) {
      double v = 1.0;
      for (std::size_t c = 0; c < cloud.dim; ++c) {
        const unsigned e = exps[j][c];
        for (unsigned rep = 0; rep < e; ++rep) v *= cloud.at(i, c);
      }
      features.at(i, j) = v;
    }
  }
  return features;
}

/// Applies x -> A phi(x) where phi stacks monomials of total degree
/// 1..degree and A is target_dim x n_monomials, row-major.
inline PointCloud apply_polynomial_map(const PointCloud& cloud,
                                       unsigned degree,
                                       const std::vector<double>& matrix,
                                       std::size_t target_dim) {
  const auto exps = monomial_exponents(cloud.dim, degree);
  if (matrix.size() != target_dim * exps.size())
    throw std::invalid_argument(
        "apply_polynomial_map: matrix shape does not match degree");
  const PointCloud features = monomial_features(cloud, exps);
  PointCloud out(cloud.n, target_dim);
  for (std::size_t i = 0; i < cloud.n; ++i) {
    for (std::size_t r = 0; r < target_dim; ++r) {
      double acc = 0.0;
      const double* row = matrix.data() + r * exps.size();
      for (std::size_t j = 0; j < exps.size(); ++j)
        acc += row[j] * features.at(i, j);
      out.at(i, r) = acc;
    }
  }
  return out;
}

namespace detail {

// Column rank of an r x c matrix by Gaussian elimination with partial
// pivoting; used to confirm the degree-1 block is an immersion.
inline std::size_t matrix_rank(std::vector<double> m, std::size_t rows,
                               std::size_t cols) {
  std::size_t rank = 0;
  for (std::size_t col = 0; col < cols && rank < rows; ++col) {
    std::size_t pivot = rank;
    for (std::size_t r = rank + 1; r < rows; ++r)
      if (std::abs(m[r * cols + col]) > std::abs(m[pivot * cols + col]))
        pivot = r;
    if (std::abs(m[pivot * cols + col]) < 1e-12) continue;
    for (std::size_t c = 0; c < cols; ++c)
      std::swap(m[rank * cols + c], m[pivot * cols + c]);
    for (std::size_t r = rank + 1; r < rows; ++r) {
      const double factor = m[r * cols + col] / m[rank * cols + col];
      for (std::size_t c = col; c < cols; ++c)
        m[r * cols + c] -= factor * m[rank * cols + c];
    }
    ++rank;
  }
  return rank;
}

}  // namespace detail

/// Seeded embedding matrix: Gaussian entries, rows scaled to unit norm, and
/// the degree-1 block redrawn until it has full column rank (a rank-deficient
/// draw has probability zero; the check guards degenerate seeds).
inline std::vector<double> embedding_matrix(const EmbeddingSpec& spec) {
  spec.validate();
  const std::size_t vars = spec.source_dim + 1;
  const std::size_t n_mono = monomial_exponents(vars, spec.degree).size();
  Rng rng(derive_seed(spec.seed, stream::kEmbed));
  std::vector<double> matrix(spec.target_dim * n_mono);
  for (int attempt = 0; attempt < 16; ++attempt) {
    for (double& v : matrix) v = rng.normal();
    // Degree-1 block = first `vars` columns (graded-lex puts them first).
    std::vector<double> block(spec.target_dim * vars);
    for (std::size_t r = 0; r < spec.target_dim; ++r)
      for (std::size_t c = 0; c < vars; ++c)
        block[r * vars + c] = matrix[r * n_mono + c];
    // Rank of the transpose equals column rank of the block.
    std::vector<double> bt(vars * spec.target_dim);
    for (std::size_t r = 0; r < spec.target_dim; ++r)
      for (std::size_t c = 0; c < vars; ++c)
        bt[c * spec.target_dim + r] = block[r * vars + c];
    if (detail::matrix_rank(std::move(bt), vars, spec.target_dim) < vars)
      continue;
    for (std::size_t r = 0; r < spec.target_dim; ++r) {
      double s = 0.0;
      for (std::size_t j = 0; j < n_mono; ++j) {
        const double v = matrix[r * n_mono + j];
        s += v * v;
      }
      const double inv = 1.0 / std::sqrt(s);
      for (std::size_t j = 0; j < n_mono; ++j) matrix[r * n_mono + j] *= inv;
    }
    return matrix;
  }
  throw std::runtime_error("embedding_matrix: could not draw full-rank block");
}

/// Polynomial embedding of a source cloud (which must live in
/// R^{source_dim + 1}, e.g. a sphere sample) into R^{target_dim}.
inline PointCloud polynomial_embed(const PointCloud& cloud,
                                   const EmbeddingSpec& spec) {
  spec.validate();
  if (cloud.dim != spec.source_dim + 1)
    throw std::invalid_argument(
        "polynomial_embed: cloud dimension must equal source_dim + 1");
  return apply_polynomial_map(cloud, spec.degree, embedding_matrix(spec),
                              spec.target_dim);
}

/// Isometric baseline embedding: pads coordinates with zeros up to
/// target_dim. Pairwise distances are preserved bit-exactly.
inline PointCloud isometric_pad(const PointCloud& cloud,
                                std::size_t target_dim) {
  if (target_dim < cloud.dim)
    throw std::invalid_argument("isometric_pad: target_dim too small");
  PointCloud out(cloud.n, target_dim);
  for (std::size_t i = 0; i < cloud.n; ++i)
    for (std::size_t j = 0; j < cloud.dim; ++j)
      out.at(i, j) = cloud.at(i, j);
  return out;
}

}  // namespace wassdim
