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

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "support/util.hpp"
#include "surfdice/metrics.hpp"
#include "surfdice/perturb.hpp"

using namespace surfdice;
using testutil::code_of;

namespace {

const Spacing kUnit{1, 1, 1};

DeformationField constant_field(const GridShape& s, const Spacing& d, Vec3 v) {
  DeformationField f(s, d);
  for (auto& e : f.displacement) e = v;
  return f;
}

void expect_fields_near(const DeformationField& a, const DeformationField& b, double tol) {
  ASSERT_EQ(a.displacement.size(), b.displacement.size());
  for (std::size_t i = 0; i < a.displacement.size(); ++i)
    for (std::size_t c = 0; c < 3; ++c)
      ASSERT_NEAR(a.displacement[i][c], b.displacement[i][c], tol) << "voxel " << i << " comp " << c;
}

AugmentationConfig no_op_config() {
  AugmentationConfig c;
  c.translation_px = 0;
  c.rotation_deg = 0;
  c.scale_min = c.scale_max = 1;
  c.shear = 0;
  c.mirror_probability = 0;
  c.elastic_sigma_mm = 0;
  c.noise_sigma_hu = 0;
  return c;
}

CtVolume random_ct(const GridShape& s, const Spacing& d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1000.0f, 1000.0f);
  CtVolume v(s, d);
  for (auto& x : v.data()) x = u(rng);
  return v;
}

// Centred cubic b-spline basis.
double beta3(double x) {
  x = std::abs(x);
  if (x < 1) return 2.0 / 3.0 - x * x + x * x * x / 2.0;
  if (x < 2) return (2 - x) * (2 - x) * (2 - x) / 6.0;
  return 0.0;
}

// Interpolation matrix of one axis with mirrored end rows.
std::vector<std::vector<double>> interp_matrix(std::size_t m) {
  std::vector<std::vector<double>> a(m, std::vector<double>(m, 0.0));
  for (std::size_t k = 0; k < m; ++k) {
    a[k][k] = 4.0 / 6.0;
    if (k > 0) a[k][k - 1] += 1.0 / 6.0;
    if (k + 1 < m) a[k][k + 1] += 1.0 / 6.0;
  }
  if (m > 1) {
    a[0][1] = 2.0 / 6.0;
    a[m - 1][m - 2] = 2.0 / 6.0;
  }
  return a;
}

std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return x;
}

// Solves the full tensor-product interpolation system at once and evaluates
// the spline by direct summation over every control point.
DeformationField densify_oracle(const ControlLattice& lat, const GridShape& s, const Spacing& d) {
  const auto [mx, my, mz] = lat.count;
  const auto ax = interp_matrix(mx), ay = interp_matrix(my), az = interp_matrix(mz);
  const std::size_t n = mx * my * mz;
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < mz; ++k)
    for (std::size_t j = 0; j < my; ++j)
      for (std::size_t i = 0; i < mx; ++i)
        for (std::size_t kk = 0; kk < mz; ++kk)
          for (std::size_t jj = 0; jj < my; ++jj)
            for (std::size_t ii = 0; ii < mx; ++ii)
              a[lat.index(i, j, k)][lat.index(ii, jj, kk)] = ax[i][ii] * ay[j][jj] * az[k][kk];
  DeformationField f(s, d);
  for (std::size_t comp = 0; comp < 3; ++comp) {
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = lat.vectors[i][comp];
    const auto coeff = solve_dense(a, rhs);
    for (std::size_t z = 0; z < s.nz; ++z)
      for (std::size_t y = 0; y < s.ny; ++y)
        for (std::size_t x = 0; x < s.nx; ++x) {
          const double u = x * d.dx / lat.pitch[0] + 1, v = y * d.dy / lat.pitch[1] + 1,
                       w = z * d.dz / lat.pitch[2] + 1;
          double sum = 0;
          for (std::size_t k = 0; k < mz; ++k)
            for (std::size_t j = 0; j < my; ++j)
              for (std::size_t i = 0; i < mx; ++i)
                sum += coeff[lat.index(i, j, k)] * beta3(u - i) * beta3(v - j) * beta3(w - k);
          f(x, y, z)[comp] = sum;
        }
  }
  return f;
}

// Largest inter-point distance on a unit grid strictly below `k`.
double unit_grid_predecessor(double k) {
  double best = 0;
  const int r = static_cast<int>(std::ceil(k));
  for (int a = 0; a <= r; ++a)
    for (int b = 0; b <= r; ++b)
      for (int c = 0; c <= r; ++c) {
        const double dist = std::sqrt(double(a * a + b * b + c * c));
        if (dist < k - 1e-12) best = std::max(best, dist);
      }
  return best;
}

}  // namespace

// --- affine ---------------------------------------------------------------

TEST(Affine, IdentityParametersGiveZeroField) {
  const GridShape s{9, 7, 3};
  const Spacing d{0.8, 1.3, 2.5};
  const auto f = affine_field(AffineParams{}, s, d);
  expect_fields_near(f, zero_field(s, d), 1e-12);
}

TEST(Affine, PureTranslationIsConstant) {
  const GridShape s{10, 10, 2};
  AffineParams p;
  p.translate_x_px = 5;
  const auto f = affine_field(p, s, kUnit);
  expect_fields_near(f, constant_field(s, kUnit, {5, 0, 0}), 1e-12);
}

TEST(Affine, TranslationIsInPixelsTimesSpacing) {
  const GridShape s{6, 6, 2};
  const Spacing d{0.5, 2.0, 3.0};
  AffineParams p;
  p.translate_x_px = 4;
  p.translate_y_px = -3;
  expect_fields_near(affine_field(p, s, d), constant_field(s, d, {2.0, -6.0, 0}), 1e-12);
}

TEST(Affine, QuarterTurnAboutCentre) {
  // Centre of a 21 x 21 grid is voxel (10, 10); voxel (20, 10) sits at (+10, 0) mm.
  const GridShape s{21, 21, 1};
  AffineParams p;
  p.rotation_deg = 90;
  const auto f = affine_field(p, s, kUnit);
  EXPECT_NEAR(f(20, 10, 0)[0], -10, 1e-9);
  EXPECT_NEAR(f(20, 10, 0)[1], 10, 1e-9);
  EXPECT_EQ(f(20, 10, 0)[2], 0.0);
  EXPECT_NEAR(f(10, 10, 0)[0], 0, 1e-12);
  EXPECT_NEAR(f(10, 10, 0)[1], 0, 1e-12);
}

TEST(Affine, InPlaneOnly) {
  const GridShape s{8, 8, 4};
  AugmentationConfig c;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto f = affine_field(sample_affine(c, seed), s, Spacing{1, 1, 2});
    for (const auto& v : f.displacement) ASSERT_EQ(v[2], 0.0);
  }
}

TEST(Affine, SampledParametersStayInConfiguredRanges) {
  AugmentationConfig c;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto p = sample_affine(c, seed);
    ASSERT_LE(std::abs(p.translate_x_px), 32);
    ASSERT_LE(std::abs(p.translate_y_px), 32);
    ASSERT_LE(std::abs(p.rotation_deg), 9);
    ASSERT_GE(p.scale_x, 0.8);
    ASSERT_LE(p.scale_x, 1.2);
    ASSERT_GE(p.scale_y, 0.8);
    ASSERT_LE(p.scale_y, 1.2);
    ASSERT_LE(std::abs(p.shear), 0.1);
  }
}

// --- elastic --------------------------------------------------------------

TEST(Elastic, ZeroSigmaGivesZeroField) {
  AugmentationConfig c;
  c.elastic_sigma_mm = 0;
  const GridShape s{20, 20, 5};
  const Spacing d{2, 2, 3};
  expect_fields_near(elastic_field(c, s, d, 7), zero_field(s, d), 0.0);
}

TEST(Elastic, ConstantControlVectorsReproduceTheConstant) {
  const GridShape s{23, 17, 6};
  const Spacing d{1.5, 2.0, 4.0};
  auto lat = make_control_lattice(s, d, {10, 10, 10});
  for (auto& v : lat.vectors) v = {1.25, -3.5, 0.75};
  expect_fields_near(bspline_densify(lat, s, d), constant_field(s, d, {1.25, -3.5, 0.75}), 1e-9);
}

TEST(Elastic, PassesThroughControlVectorsOnCoincidentVoxels) {
  // Pitch 4 mm on a unit grid: voxel 4j sits on control point j + 1.
  const GridShape s{9, 9, 5};
  auto lat = make_control_lattice(s, kUnit, {4, 4, 4});
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (auto& v : lat.vectors) v = {g(rng), g(rng), g(rng)};
  const auto f = bspline_densify(lat, s, kUnit);
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t c = 0; c < 3; ++c)
          EXPECT_NEAR(f(4 * i, 4 * j, 4 * k)[c], lat.vectors[lat.index(i + 1, j + 1, k + 1)][c], 1e-9);
}

TEST(Elastic, DensificationMatchesDirectTensorProductSolve) {
  const GridShape s{13, 11, 7};
  const Spacing d{1.0, 1.5, 2.0};
  auto lat = make_control_lattice(s, d, {5, 6, 7});
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0, 5);
  for (auto& v : lat.vectors) v = {g(rng), g(rng), g(rng)};
  expect_fields_near(bspline_densify(lat, s, d), densify_oracle(lat, s, d), 1e-9);
}

TEST(Elastic, LatticePadsTheVolume) {
  const auto lat = make_control_lattice(GridShape{101, 50, 10}, Spacing{1, 1, 3}, {100, 100, 100});
  EXPECT_EQ(lat.count[0], 5u);
  EXPECT_EQ(lat.count[1], 4u);
  EXPECT_EQ(lat.count[2], 4u);
}

TEST(Elastic, DeterministicPerSeed) {
  AugmentationConfig c;
  const GridShape s{40, 40, 8};
  const Spacing d{3, 3, 5};
  const auto a = elastic_field(c, s, d, 42), b = elastic_field(c, s, d, 42);
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == elastic_field(c, s, d, 43));
}

TEST(Elastic, InPlaneOnly) {
  AugmentationConfig c;
  const auto f = elastic_field(c, GridShape{30, 30, 6}, Spacing{4, 4, 4}, 5);
  for (const auto& v : f.displacement) ASSERT_EQ(v[2], 0.0);
}

TEST(Elastic, ComponentStddevWithinLooseBounds) {
  AugmentationConfig c;
  const GridShape s{128, 128, 32};
  const Spacing d{4, 4, 4};
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto f = elastic_field(c, s, d, seed);
    for (std::size_t comp = 0; comp < 2; ++comp) {
      double sum = 0, sq = 0;
      for (const auto& v : f.displacement) {
        sum += v[comp];
        sq += v[comp] * v[comp];
      }
      const double n = static_cast<double>(f.displacement.size());
      const double sd = std::sqrt(sq / n - (sum / n) * (sum / n));
      EXPECT_GE(sd, 2.5) << "seed " << seed << " comp " << comp;
      EXPECT_LE(sd, 5.5) << "seed " << seed << " comp " << comp;
    }
  }
}

// --- composition ----------------------------------------------------------

TEST(Compose, ZeroIsNeutralOnBothSides) {
  const GridShape s{12, 10, 4};
  const Spacing d{1, 1.5, 2};
  AugmentationConfig c;
  const auto f = compose_fields(affine_field(sample_affine(c, 1), s, d), elastic_field(c, s, d, 1));
  expect_fields_near(compose_fields(zero_field(s, d), f), f, 1e-12);
  expect_fields_near(compose_fields(f, zero_field(s, d)), f, 1e-12);
}

TEST(Compose, ConstantTranslationsAdd) {
  const GridShape s{10, 10, 3};
  const Spacing d{1, 2, 3};
  const auto t = compose_fields(constant_field(s, d, {1.5, -2, 0}), constant_field(s, d, {0.25, 4, 0}));
  expect_fields_near(t, constant_field(s, d, {1.75, 2, 0}), 1e-12);
}

TEST(Compose, InnerIsSampledAtOuterDisplacedPosition) {
  // inner varies linearly in x, so trilinear sampling is exact away from the edge.
  const GridShape s{10, 3, 1};
  DeformationField inner(s, kUnit);
  for (std::size_t y = 0; y < 3; ++y)
    for (std::size_t x = 0; x < 10; ++x) inner(x, y, 0) = {0.0, 0.1 * x, 0.0};
  const auto r = compose_fields(constant_field(s, kUnit, {2.5, 0, 0}), inner);
  for (std::size_t x = 0; x + 3 < 10; ++x) {
    EXPECT_NEAR(r(x, 1, 0)[0], 2.5, 1e-12);
    EXPECT_NEAR(r(x, 1, 0)[1], 0.1 * (x + 2.5), 1e-12);
  }
}

TEST(Compose, GridMismatchRejected) {
  EXPECT_EQ(code_of([] {
              compose_fields(zero_field({4, 4, 4}, kUnit), zero_field({4, 4, 5}, kUnit));
            }),
            ErrorCode::ShapeMismatch);
}

// --- warping --------------------------------------------------------------

TEST(WarpCt, ZeroFieldIsIdentity) {
  const GridShape s{9, 8, 5};
  const Spacing d{0.7, 1.1, 3};
  const auto v = random_ct(s, d, 1);
  EXPECT_TRUE(warp_ct(v, zero_field(s, d)) == v);
}

TEST(WarpCt, OneVoxelShiftWithZeroFill) {
  const GridShape s{6, 4, 2};
  const Spacing d{2, 1, 1};
  const auto v = random_ct(s, d, 2);
  const auto w = warp_ct(v, constant_field(s, d, {2, 0, 0}));
  for (std::size_t z = 0; z < s.nz; ++z)
    for (std::size_t y = 0; y < s.ny; ++y) {
      for (std::size_t x = 0; x + 1 < s.nx; ++x) EXPECT_EQ(w(x, y, z), v(x + 1, y, z));
      EXPECT_EQ(w(s.nx - 1, y, z), 0.0f);
    }
}

TEST(WarpCt, HalfVoxelShiftAveragesAcrossStep) {
  const GridShape s{8, 2, 1};
  CtVolume v(s, kUnit);
  for (std::size_t y = 0; y < 2; ++y)
    for (std::size_t x = 4; x < 8; ++x) v(x, y, 0) = 100.0f;
  const auto w = warp_ct(v, constant_field(s, kUnit, {0.5, 0, 0}));
  for (std::size_t y = 0; y < 2; ++y) {
    EXPECT_EQ(w(2, y, 0), 0.0f);
    EXPECT_EQ(w(3, y, 0), 50.0f);
    EXPECT_EQ(w(4, y, 0), 100.0f);
    EXPECT_EQ(w(7, y, 0), 50.0f);  // half of the sample falls outside
  }
}

TEST(WarpCt, GridMismatchRejected) {
  const CtVolume v({4, 4, 4}, kUnit);
  EXPECT_EQ(code_of([&] { warp_ct(v, zero_field({4, 4, 4}, Spacing{1, 1, 2})); }),
            ErrorCode::SpacingMismatch);
}

TEST(WarpMask, ZeroFieldIsIdentity) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    const auto s = oracle::random_shape(rng);
    const auto d = oracle::random_spacing(rng);
    const auto m = oracle::random_mask(rng, s, d);
    EXPECT_TRUE(warp_mask(m, zero_field(s, d)) == m);
    EXPECT_TRUE(warp_mask(m, zero_field(s, d), MaskWarp::Nearest) == m);
  }
}

TEST(WarpMask, WholeVoxelTranslationIsExactShift) {
  std::mt19937_64 rng(5);
  const GridShape s{10, 9, 6};
  const Spacing d{1.2, 0.9, 2.5};
  const auto m = oracle::random_mask(rng, s, d);
  // out(p) = in(p + o): a displacement of +k voxels moves content by -k.
  const auto w = warp_mask(m, constant_field(s, d, {2 * 1.2, -0.9, 2.5}));
  EXPECT_TRUE(w == shift_mask(m, -2, 1, -1));
}

TEST(WarpMask, SubThresholdShiftLeavesSlabInPlace) {
  const GridShape s{10, 3, 3};
  const auto slab = oracle::box(s, kUnit, {3, 0, 0}, {6, 2, 2});
  for (double t : {0.4, -0.4}) {
    const auto w = warp_mask(slab, constant_field(s, kUnit, {t, 0, 0}));
    for (std::size_t z = 0; z < 3; ++z)
      for (std::size_t y = 0; y < 3; ++y)
        for (std::int64_t x = 0; x < 10; ++x) {
          // Linear sample at x + t between the two neighbouring voxels.
          const double pos = x + t;
          const auto lo = static_cast<std::int64_t>(std::floor(pos));
          const double f = pos - lo;
          const double v = (1 - f) * slab.at_or_zero(lo, y, z) + f * slab.at_or_zero(lo + 1, y, z);
          EXPECT_EQ(w(x, y, z), v >= 0.5 ? 1 : 0);
          EXPECT_EQ(w(x, y, z), slab(x, y, z));
        }
  }
}

TEST(WarpMask, NearestModeRoundsPositions) {
  const GridShape s{10, 1, 1};
  const auto slab = oracle::box(s, kUnit, {3, 0, 0}, {6, 0, 0});
  const auto w = warp_mask(slab, constant_field(s, kUnit, {0.6, 0, 0}), MaskWarp::Nearest);
  EXPECT_TRUE(w == shift_mask(slab, -1, 0, 0));
}

// --- mirroring ------------------------------------------------------------

TEST(Mirror, IsAVolumePreservingInvolution) {
  std::mt19937_64 rng(6);
  const auto tax = default_taxonomy();
  for (int i = 0; i < 10; ++i) {
    const auto s = oracle::random_shape(rng);
    const auto d = oracle::random_spacing(rng);
    MultiOrganSegmentation seg(s, d);
    for (const char* organ : {"Brainstem", "Parotid-Lt", "Parotid-Rt", "Lens-Lt"})
      seg.set(organ, oracle::random_mask(rng, s, d));
    const auto once = mirror_with_label_swap(seg, tax);
    EXPECT_TRUE(mirror_with_label_swap(once, tax) == seg);
    for (const auto& [organ, mask] : seg.channels()) {
      const auto target = tax.partner(organ).value_or(organ);
      EXPECT_EQ(foreground_count(once.channel(target)), foreground_count(mask));
    }
  }
}

TEST(Mirror, PairedContentMovesToPartner) {
  const GridShape s{8, 3, 2};
  MultiOrganSegmentation seg(s, kUnit);
  seg.set("Parotid-Lt", oracle::voxels(s, kUnit, {{1, 1, 0}}));
  const auto out = mirror_with_label_swap(seg, default_taxonomy());
  EXPECT_FALSE(out.has("Parotid-Lt"));
  ASSERT_TRUE(out.has("Parotid-Rt"));
  EXPECT_TRUE(out.channel("Parotid-Rt") == oracle::voxels(s, kUnit, {{6, 1, 0}}));
}

TEST(Mirror, UnpairedOrganKeepsItsName) {
  const GridShape s{5, 2, 2};
  MultiOrganSegmentation seg(s, kUnit);
  seg.set("Brainstem", oracle::voxels(s, kUnit, {{0, 0, 1}, {1, 1, 0}}));
  const auto out = mirror_with_label_swap(seg, default_taxonomy());
  ASSERT_TRUE(out.has("Brainstem"));
  EXPECT_TRUE(out.channel("Brainstem") == oracle::voxels(s, kUnit, {{4, 0, 1}, {3, 1, 0}}));
}

// --- noise ----------------------------------------------------------------

TEST(Noise, ZeroSigmaIsIdentity) {
  const auto v = random_ct({7, 7, 7}, kUnit, 8);
  EXPECT_TRUE(add_noise(v, 0, 123) == v);
}

TEST(Noise, NegativeSigmaRejected) {
  const CtVolume v({2, 2, 2}, kUnit);
  EXPECT_EQ(code_of([&] { add_noise(v, -1, 0); }), ErrorCode::InvalidArgument);
}

TEST(Noise, MomentsAt128Cubed) {
  const CtVolume v({128, 128, 128}, kUnit);
  const auto n = add_noise(v, 20, 2024);
  double sum = 0, sq = 0;
  for (float x : n.data()) {
    sum += x;
    sq += double(x) * x;
  }
  const double count = static_cast<double>(n.size());
  const double mean = sum / count;
  EXPECT_NEAR(mean, 0.0, 0.5);
  EXPECT_NEAR(std::sqrt(sq / count - mean * mean), 20.0, 0.5);
}

TEST(Noise, DeterministicPerSeed) {
  const auto v = random_ct({16, 16, 4}, kUnit, 9);
  EXPECT_TRUE(add_noise(v, 20, 1) == add_noise(v, 20, 1));
  EXPECT_FALSE(add_noise(v, 20, 1) == add_noise(v, 20, 2));
}

// --- metric sensitivity ---------------------------------------------------

TEST(Sensitivity, TranslationCrossesOverExactlyAtShiftDistance) {
  const GridShape s{26, 12, 12};
  const auto slab = oracle::box(s, kUnit, {6, 2, 2}, {11, 9, 9});
  for (int k = 1; k <= 5; ++k) {
    const auto moved = shift_mask(slab, k, 0, 0);
    const double below = unit_grid_predecessor(k);
    const auto at = surface_dsc(slab, moved, k);
    const auto under = surface_dsc(slab, moved, below);
    ASSERT_TRUE(at.value && under.value);
    EXPECT_DOUBLE_EQ(*at.value, 1.0) << "k=" << k;
    EXPECT_LT(*under.value, 1.0) << "k=" << k;
    EXPECT_NEAR(*under.value, *oracle::surface_dsc(slab, moved, below).value, 1e-12) << "k=" << k;
  }
}

TEST(Sensitivity, TranslationSweepIsMonotoneAtFixedTolerance) {
  // Faces only start re-matching once the shift reaches thickness - tau, so the
  // slab (12 thick) stays thicker than k + tau over the whole sweep.
  const GridShape s{30, 12, 12};
  const auto slab = oracle::box(s, kUnit, {4, 2, 2}, {15, 9, 9});
  for (double tau : {0.0, 1.0, 2.0, 3.0}) {
    double previous = 2.0;
    for (int k = 0; k <= 8; ++k) {
      const auto moved = warp_mask(slab, constant_field(s, kUnit, {-double(k), 0, 0}));
      ASSERT_TRUE(moved == shift_mask(slab, k, 0, 0));
      const double v = *surface_dsc(slab, moved, tau).value;
      EXPECT_NEAR(v, *oracle::surface_dsc(slab, moved, tau).value, 1e-12);
      EXPECT_LE(v, previous) << "tau=" << tau << " k=" << k;
      previous = v;
    }
  }
}

// --- full pipeline --------------------------------------------------------

TEST(Augment, DeterministicPerSeed) {
  const GridShape s{24, 24, 6};
  const Spacing d{2, 2, 3};
  const auto ct = random_ct(s, d, 10);
  std::mt19937_64 rng(10);
  MultiOrganSegmentation seg(s, d);
  seg.set("Parotid-Lt", oracle::random_mask(rng, s, d));
  seg.set("Brainstem", oracle::random_mask(rng, s, d));
  AugmentationConfig c;
  c.seed = 77;
  const auto a = augment(ct, seg, c, default_taxonomy());
  const auto b = augment(ct, seg, c, default_taxonomy());
  EXPECT_TRUE(a.ct == b.ct);
  EXPECT_TRUE(a.segmentation == b.segmentation);
  c.seed = 78;
  EXPECT_FALSE(augment(ct, seg, c, default_taxonomy()).ct == a.ct);
}

TEST(Augment, DegenerateRangesAreIdentity) {
  const GridShape s{12, 10, 4};
  const Spacing d{1, 1, 2};
  const auto ct = random_ct(s, d, 11);
  std::mt19937_64 rng(11);
  MultiOrganSegmentation seg(s, d);
  seg.set("Parotid-Rt", oracle::random_mask(rng, s, d));
  const auto out = augment(ct, seg, no_op_config(), default_taxonomy());
  EXPECT_FALSE(out.mirrored);
  EXPECT_TRUE(out.ct == ct);
  EXPECT_TRUE(out.segmentation == seg);
}

TEST(Augment, CertainMirrorSwapsLabels) {
  const GridShape s{12, 10, 4};
  const Spacing d{1, 1, 2};
  const auto ct = random_ct(s, d, 12);
  std::mt19937_64 rng(12);
  MultiOrganSegmentation seg(s, d);
  seg.set("Parotid-Lt", oracle::random_mask(rng, s, d));
  auto c = no_op_config();
  c.mirror_probability = 1;
  const auto out = augment(ct, seg, c, default_taxonomy());
  EXPECT_TRUE(out.mirrored);
  EXPECT_TRUE(out.segmentation == mirror_with_label_swap(seg, default_taxonomy()));
  EXPECT_EQ(out.ct(0, 3, 1), ct(11, 3, 1));
}

TEST(Augment, InvalidConfigRejected) {
  auto c = no_op_config();
  c.scale_min = 1.5;
  c.scale_max = 1.0;
  const CtVolume ct({4, 4, 4}, kUnit);
  const MultiOrganSegmentation seg({4, 4, 4}, kUnit);
  EXPECT_EQ(code_of([&] { augment(ct, seg, c, default_taxonomy()); }), ErrorCode::InvalidArgument);
}
