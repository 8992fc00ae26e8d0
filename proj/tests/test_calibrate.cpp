// Copyright 2026 The surfdice Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support/oracles.hpp"
#include "support/util.hpp"
#include "surfdice/calibrate.hpp"

using namespace surfdice;
using testutil::code_of;

namespace {

const Spacing kUnit{1, 1, 1};

std::vector<WeightedDistance> oracle_pool(const Mask& a, const Mask& b) {
  std::vector<WeightedDistance> out;
  for (const auto& x : oracle::interobserver_pool(a, b)) out.push_back({x.distance, x.weight});
  return out;
}

double oracle_percentile(const std::vector<WeightedDistance>& s, double q) {
  std::vector<oracle::Sample> v;
  for (const auto& x : s) v.push_back({x.distance, x.weight});
  return oracle::weighted_percentile(v, q);
}

void sort_samples(std::vector<WeightedDistance>& v) {
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    return std::tie(a.distance, a.weight) < std::tie(b.distance, b.weight);
  });
}

Mask slab(const Spacing& d, std::size_t x0) {
  return oracle::box({16, 14, 8}, d, {x0, 2, 2}, {x0 + 6, 11, 5});
}

CalibrationScan scan_of(std::string id, std::initializer_list<std::pair<std::string, Mask>> observers,
                        const std::string& organ = "Brainstem") {
  CalibrationScan s{std::move(id), {}};
  for (const auto& [observer, mask] : observers) s.observers[observer].emplace(organ, mask);
  return s;
}

}  // namespace

TEST(Percentile, AllZero) {
  const std::vector<WeightedDistance> s(10, {0.0, 1.5});
  EXPECT_EQ(tolerance_percentile(s), 0.0);
}

TEST(Percentile, NearestRankOfOneToHundred) {
  std::vector<WeightedDistance> s;
  for (int i = 100; i >= 1; --i) s.push_back({double(i), 1.0});
  EXPECT_EQ(tolerance_percentile(s, 0.95), 95.0);
  EXPECT_EQ(tolerance_percentile(s, 1.0), 100.0);
  EXPECT_EQ(tolerance_percentile(s, 0.001), 1.0);
}

TEST(Percentile, WeightedRank) {
  const std::vector<WeightedDistance> s{{1.0, 9.0}, {10.0, 1.0}};
  EXPECT_EQ(tolerance_percentile(s, 0.95), 10.0);
  EXPECT_EQ(tolerance_percentile(s, 0.9), 1.0);
}

TEST(Percentile, UnweightedCountsSamples) {
  std::vector<WeightedDistance> s(19, {1.0, 1.0});
  s.push_back({10.0, 100.0});
  EXPECT_EQ(tolerance_percentile(s, 0.95, PercentileWeighting::Area), 10.0);
  EXPECT_EQ(tolerance_percentile(s, 0.95, PercentileWeighting::Unweighted), 1.0);
}

TEST(Percentile, Errors) {
  EXPECT_EQ(code_of([] { tolerance_percentile(std::vector<WeightedDistance>{}); }),
            ErrorCode::EmptySampleSet);
  const std::vector<WeightedDistance> s{{1.0, 1.0}};
  EXPECT_EQ(code_of([&] { tolerance_percentile(s, 0.0); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { tolerance_percentile(s, 1.5); }), ErrorCode::InvalidArgument);
  const std::vector<WeightedDistance> bad{{1.0, 0.0}};
  EXPECT_EQ(code_of([&] { tolerance_percentile(bad); }), ErrorCode::InvalidArgument);
}

TEST(Percentile, MatchesDefinitionAndIsMonotoneInQ) {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<WeightedDistance> s;
    const int n = 1 + static_cast<int>(u(rng) * 40);
    for (int i = 0; i < n; ++i) s.push_back({std::floor(u(rng) * 10) * 0.5, 0.1 + u(rng)});
    double prev = -1;
    for (double q : {0.1, 0.5, 0.9, 0.95, 1.0}) {
      const double got = tolerance_percentile(s, q);
      EXPECT_EQ(got, oracle_percentile(s, q));
      EXPECT_GE(got, prev);
      prev = got;
    }
  }
}

TEST(Collect, IdenticalMasksGiveZeros) {
  const Mask a = slab(kUnit, 3);
  for (const auto& s : collect_interobserver_distances(a, a)) EXPECT_EQ(s.distance, 0.0);
}

TEST(Collect, ThreeApartVoxels) {
  const GridShape s{4, 1, 1};
  auto got = collect_interobserver_distances(oracle::voxels(s, kUnit, {{0, 0, 0}}),
                                             oracle::voxels(s, kUnit, {{3, 0, 0}}));
  ASSERT_EQ(got.size(), 16u);
  sort_samples(got);
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_DOUBLE_EQ(got[i].distance, i < 8 ? 2.0 : 3.0);
    EXPECT_DOUBLE_EQ(got[i].weight, got[0].weight);
  }
}

TEST(Collect, DisjointSlabsMatchBruteForce) {
  const Mask a = oracle::box({18, 10, 8}, kUnit, {2, 2, 2}, {6, 7, 5});
  const Mask b = oracle::box({18, 10, 8}, kUnit, {8, 2, 2}, {12, 7, 5});  // one empty column between
  auto got = collect_interobserver_distances(a, b);
  auto want = oracle_pool(a, b);
  sort_samples(got);
  sort_samples(want);
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_NEAR(got[i].distance, want[i].distance, 1e-12);
    EXPECT_EQ(got[i].weight, want[i].weight);
  }
  EXPECT_GE(got.front().distance, 1.0);
}

TEST(Collect, EmptyMaskIsRejected) {
  EXPECT_EQ(code_of([] { collect_interobserver_distances(slab(kUnit, 2), Mask({16, 14, 8}, kUnit)); }),
            ErrorCode::InvalidArgument);
}

TEST(Calibrate, IdenticalObserversGiveZero) {
  CalibrationScan scan{"s1", {}};
  for (const char* obs : {"A", "B", "C"}) {
    scan.observers[obs].emplace("Brainstem", slab(kUnit, 3));
    scan.observers[obs].emplace("Lens-Lt", oracle::voxels({16, 14, 8}, kUnit, {{4, 4, 4}}));
  }
  const auto r = calibrate_organ_tolerances(std::span(&scan, 1));
  EXPECT_EQ(r.tolerances.per_organ.at("Brainstem"), 0.0);
  EXPECT_EQ(r.tolerances.per_organ.at("Lens-Lt"), 0.0);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Calibrate, OneVoxelOffsetSlabMatchesOraclePooling) {
  const Mask a = slab(kUnit, 3), b = slab(kUnit, 4);
  const CalibrationScan scan = scan_of("s1", {{"A", a}, {"B", b}});
  const auto r = calibrate_organ_tolerances(std::span(&scan, 1));
  const double want = oracle_percentile(oracle_pool(a, b), 0.95);
  EXPECT_DOUBLE_EQ(r.tolerances.per_organ.at("Brainstem"), want);
  EXPECT_EQ(want, 1.0);
  EXPECT_EQ(r.sample_counts.at("Brainstem"), oracle_pool(a, b).size());
  ASSERT_EQ(r.provenance.size(), 1u);
  EXPECT_EQ(r.provenance[0].organ, "Brainstem");
  EXPECT_EQ(r.provenance[0].observer_a, "A");
}

TEST(Calibrate, TwoScansEqualOneConcatenatedPool) {
  const Mask a1 = slab(kUnit, 3), b1 = slab(kUnit, 4);
  const Mask a2 = slab(kUnit, 2), b2 = slab(kUnit, 5);
  const std::vector<CalibrationScan> scans{scan_of("s1", {{"A", a1}, {"B", b1}}),
                                           scan_of("s2", {{"A", a2}, {"B", b2}})};
  auto pool = oracle_pool(a1, b1);
  const auto more = oracle_pool(a2, b2);
  pool.insert(pool.end(), more.begin(), more.end());
  const auto r = calibrate_organ_tolerances(scans);
  EXPECT_DOUBLE_EQ(r.tolerances.per_organ.at("Brainstem"), oracle_percentile(pool, 0.95));
}

TEST(Calibrate, OrderInvariant) {
  std::mt19937_64 rng(62);
  const Spacing d{0.8, 1.1, 2.0};
  std::vector<CalibrationScan> scans;
  for (int i = 0; i < 4; ++i)
    scans.push_back(scan_of("s" + std::to_string(i),
                            {{"A", oracle::random_mask(rng, {9, 9, 6}, d)},
                             {"B", oracle::random_mask(rng, {9, 9, 6}, d)},
                             {"C", oracle::random_mask(rng, {9, 9, 6}, d)}}));
  const auto r1 = calibrate_organ_tolerances(scans);
  std::reverse(scans.begin(), scans.end());
  const auto r2 = calibrate_organ_tolerances(scans);
  EXPECT_EQ(r1.tolerances.per_organ, r2.tolerances.per_organ);
}

TEST(Calibrate, ScaleCovariant) {
  std::mt19937_64 rng(63);
  const Spacing d{0.9, 1.2, 2.5};
  for (int t = 0; t < 10; ++t) {
    const Mask a = oracle::random_mask(rng, {10, 10, 6}, d), b = oracle::random_mask(rng, {10, 10, 6}, d);
    if (is_empty(a) || is_empty(b)) continue;
    const double s = 1.75;
    const CalibrationScan x = scan_of("s", {{"A", a}, {"B", b}});
    const CalibrationScan y = scan_of("s", {{"A", Mask(a.shape(), d.scaled(s), a.data())},
                                            {"B", Mask(b.shape(), d.scaled(s), b.data())}});
    const double tx = calibrate_organ_tolerances(std::span(&x, 1)).tolerances.per_organ.at("Brainstem");
    const double ty = calibrate_organ_tolerances(std::span(&y, 1)).tolerances.per_organ.at("Brainstem");
    EXPECT_NEAR(ty, s * tx, 1e-9 * (1 + ty));
  }
}

TEST(Calibrate, MissingOrganForOneObserverWarnsAndOmits) {
  CalibrationScan scan{"s1", {}};
  scan.observers["A"].emplace("Brainstem", slab(kUnit, 3));
  scan.observers["B"].emplace("Brainstem", slab(kUnit, 4));
  scan.observers["A"].emplace("Lens-Lt", oracle::voxels({16, 14, 8}, kUnit, {{4, 4, 4}}));
  const auto r = calibrate_organ_tolerances(std::span(&scan, 1));
  EXPECT_TRUE(r.tolerances.per_organ.count("Brainstem"));
  EXPECT_FALSE(r.tolerances.per_organ.count("Lens-Lt"));
  ASSERT_FALSE(r.warnings.empty());
  bool named = false;
  for (const auto& w : r.warnings) named |= w.find("Lens-Lt") != std::string::npos;
  EXPECT_TRUE(named);
}

TEST(Calibrate, EmptyPairIsSkippedWithWarning) {
  const CalibrationScan scan = scan_of("s1", {{"A", slab(kUnit, 3)}, {"B", Mask({16, 14, 8}, kUnit)}});
  const auto r = calibrate_organ_tolerances(std::span(&scan, 1));
  EXPECT_TRUE(r.tolerances.per_organ.empty());
  EXPECT_GE(r.warnings.size(), 2u);  // skipped pair, then organ omitted
}
