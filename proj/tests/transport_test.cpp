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

#include "wassdim/transport.hpp"

#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "testutil.hpp"
#include "wassdim/rng.hpp"

namespace wassdim {
namespace {

CostMatrix cost_1d(const std::vector<double>& a, const std::vector<double>& b) {
  CostMatrix c(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      c.at(i, j) = std::abs(a[i] - b[j]);
  return c;
}

TEST(ExactW1, IdenticalCloudsGiveZero) {
  const auto c = cost_1d({0.0, 1.0, 2.0}, {0.0, 1.0, 2.0});
  const TransportResult r = exact_w1(c);
  EXPECT_EQ(r.w1, 0.0);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.marginal_error, 0.0);
  EXPECT_EQ(r.method, OtMethod::exact_assignment);
}

TEST(ExactW1, UnitTranslationOnLine) {
  const auto c = cost_1d({0.0}, {1.0});
  EXPECT_DOUBLE_EQ(exact_w1(c).w1, 1.0);
}

// Brute force over both matchings: identity gives (0.5 + 9)/2 = 4.75, the
// swap gives (10 + 0.5)/2 = 5.25.
TEST(ExactW1, TwoPointExample) {
  const auto c = cost_1d({0.0, 1.0}, {0.5, 10.0});
  EXPECT_NEAR(exact_w1(c).w1, 4.75, 1e-12);
}

TEST(ExactW1, RejectsNonSquare) {
  CostMatrix c(2, 3);
  EXPECT_THROW(exact_w1(c), std::invalid_argument);
}

TEST(ExactW1, MatchesFactorialOracle) {
  Rng rng(2024);
  for (int instance = 0; instance < 200; ++instance) {
    const std::size_t n = 1 + rng.next_u64() % 6;
    const CostMatrix c =
        testutil::random_cost(n, n, derive_seed(555, instance));
    const double expected = testutil::brute_force_w1(c);
    const double actual = exact_w1(c).w1;
    ASSERT_NEAR(actual, expected, 1e-9 * std::max(1.0, expected))
        << "instance " << instance << " n=" << n;
  }
}

TEST(ExactW1, SymmetricOnRandomPairs) {
  for (int instance = 0; instance < 20; ++instance) {
    const PointCloud a = testutil::random_cloud(8, 2, 100 + instance);
    const PointCloud b = testutil::random_cloud(8, 2, 200 + instance);
    const double ab = exact_w1(cost_between(a, b)).w1;
    const double ba = exact_w1(cost_between(b, a)).w1;
    ASSERT_NEAR(ab, ba, 1e-9);
  }
}

TEST(ExactW1, TriangleInequalityOnRandomTriples) {
  for (int instance = 0; instance < 20; ++instance) {
    const PointCloud a = testutil::random_cloud(6, 3, 300 + instance);
    const PointCloud b = testutil::random_cloud(6, 3, 400 + instance);
    const PointCloud c = testutil::random_cloud(6, 3, 500 + instance);
    const double ab = exact_w1(cost_between(a, b)).w1;
    const double bc = exact_w1(cost_between(b, c)).w1;
    const double ac = exact_w1(cost_between(a, c)).w1;
    ASSERT_LE(ac, ab + bc + 1e-9);
  }
}

TEST(ExactW1, PositiveHomogeneity) {
  const CostMatrix c = testutil::random_cost(12, 12, 808);
  const double base = exact_w1(c).w1;
  for (double s : {0.25, 3.0, 17.5}) {
    CostMatrix scaled = c;
    for (double& v : scaled.values) v *= s;
    ASSERT_NEAR(exact_w1(scaled).w1, s * base, 1e-12 * s * base);
  }
}

TEST(SinkhornW1, AllZeroCost) {
  CostMatrix c(4, 4);
  SinkhornOptions opt;
  opt.reg = 0.5;
  const TransportResult r = sinkhorn_w1(c, opt);
  EXPECT_NEAR(r.w1, 0.0, 1e-12);
  EXPECT_EQ(r.method, OtMethod::sinkhorn);
}

TEST(SinkhornW1, SingleEntryForcedCoupling) {
  CostMatrix c(1, 1);
  c.at(0, 0) = 3.25;
  SinkhornOptions opt;
  opt.reg = 0.1;
  EXPECT_NEAR(sinkhorn_w1(c, opt).w1, 3.25, 1e-9);
}

TEST(SinkhornW1, RejectsBadArguments) {
  CostMatrix c(2, 2);
  SinkhornOptions opt;
  opt.reg = 0.0;
  EXPECT_THROW(sinkhorn_w1(c, opt), std::invalid_argument);
  opt.reg = 0.1;
  opt.max_iters = 0;
  EXPECT_THROW(sinkhorn_w1(c, opt), std::invalid_argument);
}

TEST(SinkhornW1, NonConvergenceIsReportedNotThrown) {
  const CostMatrix c = testutil::random_cost(16, 16, 999);
  SinkhornOptions opt;
  opt.reg = 0.001;
  opt.max_iters = 3;
  const TransportResult r = sinkhorn_w1(c, opt);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations_run, 3u);
}

TEST(SinkhornW1, CloseToExactAtSmallReg) {
  Rng rng(6060);
  const PointCloud a = testutil::random_cloud(64, 2, 61);
  const PointCloud b = testutil::random_cloud(64, 2, 62);
  const CostMatrix c = cost_between(a, b);
  const double exact = exact_w1(c).w1;

  SinkhornOptions opt;
  opt.reg = 0.01 * c.mean();
  opt.max_iters = 200000;
  const TransportResult r = sinkhorn_w1(c, opt);
  EXPECT_LE(std::abs(r.w1 - exact) / exact, 0.05);
  EXPECT_LE(r.marginal_error, 1e-6);
}

TEST(SinkhornW1, ErrorDecreasesWithReg) {
  const PointCloud a = testutil::random_cloud(48, 2, 71);
  const PointCloud b = testutil::random_cloud(48, 2, 72);
  const CostMatrix c = cost_between(a, b);
  const double exact = exact_w1(c).w1;
  const double mean = c.mean();

  std::vector<double> errors;
  for (double factor : {0.3, 0.1, 0.03}) {
    SinkhornOptions opt;
    opt.reg = factor * mean;
    opt.max_iters = 100000;
    errors.push_back(std::abs(sinkhorn_w1(c, opt).w1 - exact));
  }
  EXPECT_GT(errors[0], errors[1]);
  EXPECT_GT(errors[1], errors[2]);
}

// The transport term approaches its limit monotonically on convergent runs
// (the first row update yields a greedy row-softmin plan, below the feasible
// optimum, and feasibility enforcement moves the cost one way toward it), so
// the checkpoint error against the returned value never grows.
TEST(SinkhornW1, MonotoneConvergenceAtCheckpoints) {
  const PointCloud a = testutil::random_cloud(32, 2, 81);
  const PointCloud b = testutil::random_cloud(32, 2, 82);
  const CostMatrix c = cost_between(a, b);

  SinkhornOptions opt;
  opt.reg = 0.05 * c.mean();
  opt.max_iters = 50000;
  opt.trace_stride = 10;
  std::vector<SinkhornCheckpoint> trace;
  const TransportResult r = sinkhorn_w1(c, opt, &trace);
  ASSERT_TRUE(r.converged);
  ASSERT_GE(trace.size(), 3u);
  for (std::size_t i = 1; i < trace.size(); ++i)
    ASSERT_LE(std::abs(trace[i].transport_cost - r.w1),
              std::abs(trace[i - 1].transport_cost - r.w1) + 1e-12);
}

TEST(CostFromMetric, FullRangeEqualsMatrix) {
  const PointCloud cloud = testutil::random_cloud(10, 3, 91);
  const DistanceMatrix m = euclidean_matrix(cloud);
  std::vector<std::size_t> idx(10);
  for (std::size_t i = 0; i < 10; ++i) idx[i] = i;
  const CostMatrix c = cost_from_metric(m, idx, idx);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j)
      ASSERT_EQ(c.at(i, j), m.at(i, j));
}

TEST(CostFromMetric, SingletonSlice) {
  const PointCloud cloud = testutil::random_cloud(6, 2, 92);
  const DistanceMatrix m = euclidean_matrix(cloud);
  const std::vector<std::size_t> ia{2}, ib{5};
  const CostMatrix c = cost_from_metric(m, ia, ib);
  ASSERT_EQ(c.rows, 1u);
  ASSERT_EQ(c.cols, 1u);
  EXPECT_EQ(c.at(0, 0), m.at(2, 5));
}

TEST(CostFromMetric, RejectsOutOfRangeAndInfinite) {
  const PointCloud cloud = testutil::random_cloud(4, 2, 93);
  DistanceMatrix m = euclidean_matrix(cloud);
  const std::vector<std::size_t> ok{0, 1}, bad{0, 7};
  EXPECT_THROW(cost_from_metric(m, bad, ok), std::out_of_range);
  EXPECT_THROW(cost_from_metric(m, ok, bad), std::out_of_range);
  m.at(0, 1) = kInf;
  EXPECT_THROW(cost_from_metric(m, ok, ok), std::invalid_argument);
}

// Slicing a Euclidean metric then solving must agree with solving directly
// on the corresponding sub-clouds.
TEST(CostFromMetric, SlicingConsistentWithDirectComputation) {
  const PointCloud cloud = testutil::random_cloud(20, 3, 94);
  const DistanceMatrix m = euclidean_matrix(cloud);
  const std::vector<std::size_t> ia{0, 3, 5, 7, 11}, ib{2, 6, 12, 15, 19};

  PointCloud sub_a(ia.size(), 3), sub_b(ib.size(), 3);
  for (std::size_t r = 0; r < ia.size(); ++r)
    for (std::size_t c = 0; c < 3; ++c) sub_a.at(r, c) = cloud.at(ia[r], c);
  for (std::size_t r = 0; r < ib.size(); ++r)
    for (std::size_t c = 0; c < 3; ++c) sub_b.at(r, c) = cloud.at(ib[r], c);

  const double sliced = exact_w1(cost_from_metric(m, ia, ib)).w1;
  const double direct = exact_w1(cost_between(sub_a, sub_b)).w1;
  EXPECT_NEAR(sliced, direct, 1e-12);
}

}  // namespace
}  // namespace wassdim
