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

// Geometric and intensity augmentation, also used as a metric-sensitivity
// harness.
//
// A DeformationField stores, per voxel, the physical offset (mm) at which
// the source volume is sampled: out(p) = in(p + field(p)). All builders here
// displace in-plane only (z component 0).

#ifndef SURFDICE_PERTURB_HPP
#define SURFDICE_PERTURB_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "surfdice/grid.hpp"
#include "surfdice/random.hpp"

namespace surfdice {

using Vec3 = std::array<double, 3>;

struct DeformationField {
  GridShape shape;
  Spacing spacing;
  std::vector<Vec3> displacement;  // mm, x-fastest like every grid

  DeformationField() = default;
  DeformationField(GridShape s, Spacing d) : shape(s), spacing(d), displacement(s.count(), Vec3{}) {}

  const Vec3& operator()(std::size_t x, std::size_t y, std::size_t z) const {
    return displacement[shape.index(x, y, z)];
  }
  Vec3& operator()(std::size_t x, std::size_t y, std::size_t z) {
    return displacement[shape.index(x, y, z)];
  }
  friend bool operator==(const DeformationField&, const DeformationField&) = default;
};

struct AugmentationConfig {
  double translation_px = 32.0;  // uniform in [-t, t] per in-plane axis
  double rotation_deg = 9.0;     // uniform in [-r, r]
  double scale_min = 0.8;
  double scale_max = 1.2;
  double shear = 0.1;            // uniform in [-s, s]
  double mirror_probability = 0.5;
  Vec3 elastic_control_spacing_mm{100.0, 100.0, 100.0};
  double elastic_sigma_mm = 5.0;
  double noise_sigma_hu = 20.0;
  std::uint64_t seed = 0;

  void validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
    if (!(translation_px >= 0)) fail("translation range must be non-negative");
    if (!(rotation_deg >= 0)) fail("rotation range must be non-negative");
    if (!(scale_min > 0 && scale_min <= scale_max)) fail("scale range must satisfy 0 < min <= max");
    if (!(shear >= 0)) fail("shear range must be non-negative");
    if (!(mirror_probability >= 0 && mirror_probability <= 1)) fail("mirror probability outside [0, 1]");
    for (double p : elastic_control_spacing_mm)
      if (!(p > 0)) fail("elastic control spacing must be positive");
    if (!(elastic_sigma_mm >= 0)) fail("elastic sigma must be non-negative");
    if (!(noise_sigma_hu >= 0)) fail("noise sigma must be non-negative");
  }

  friend bool operator==(const AugmentationConfig&, const AugmentationConfig&) = default;
};

/// In-plane affine parameters. The map about the xy-centre of the volume is
/// rotation * shear * scale, followed by the translation.
struct AffineParams {
  double translate_x_px = 0.0;
  double translate_y_px = 0.0;
  double rotation_deg = 0.0;
  double scale_x = 1.0;
  double scale_y = 1.0;
  double shear = 0.0;
};

inline AffineParams sample_affine(const AugmentationConfig& config, std::uint64_t seed) {
  auto uniform = [seed](std::uint64_t k, double lo, double hi) {
    return lo + (hi - lo) * counter_uniform(seed, streams::kAffine, k);
  };
  AffineParams p;
  p.translate_x_px = uniform(0, -config.translation_px, config.translation_px);
  p.translate_y_px = uniform(1, -config.translation_px, config.translation_px);
  p.rotation_deg = uniform(2, -config.rotation_deg, config.rotation_deg);
  p.scale_x = uniform(3, config.scale_min, config.scale_max);
  p.scale_y = uniform(4, config.scale_min, config.scale_max);
  p.shear = uniform(5, -config.shear, config.shear);
  return p;
}

inline bool sample_mirror(const AugmentationConfig& config, std::uint64_t seed) {
  return counter_uniform(seed, streams::kMirror, 0) < config.mirror_probability;
}

inline DeformationField zero_field(const GridShape& shape, const Spacing& spacing) {
  return DeformationField(shape, spacing);
}

inline DeformationField affine_field(const AffineParams& p, const GridShape& shape,
                                     const Spacing& spacing) {
  DeformationField f(shape, spacing);
  const double cx = 0.5 * static_cast<double>(shape.nx - 1) * spacing.dx;
  const double cy = 0.5 * static_cast<double>(shape.ny - 1) * spacing.dy;
  const double theta = p.rotation_deg * std::numbers::pi / 180.0;
  const double c = std::cos(theta), s = std::sin(theta);
  // rotation * [[1, shear], [0, 1]] * diag(scale_x, scale_y)
  const double a00 = c * p.scale_x;
  const double a01 = (c * p.shear - s) * p.scale_y;
  const double a10 = s * p.scale_x;
  const double a11 = (s * p.shear + c) * p.scale_y;
  const double tx = p.translate_x_px * spacing.dx;
  const double ty = p.translate_y_px * spacing.dy;
  for (std::size_t z = 0; z < shape.nz; ++z)
    for (std::size_t y = 0; y < shape.ny; ++y)
      for (std::size_t x = 0; x < shape.nx; ++x) {
        const double rx = static_cast<double>(x) * spacing.dx - cx;
        const double ry = static_cast<double>(y) * spacing.dy - cy;
        f(x, y, z) = {a00 * rx + a01 * ry + tx - rx, a10 * rx + a11 * ry + ty - ry, 0.0};
      }
  return f;
}

/// Displacement vectors on a regular control lattice. Control point c sits at
/// physical position (c - 1) * pitch per axis, so one extra point pads each side.
struct ControlLattice {
  std::array<std::size_t, 3> count{};
  Vec3 pitch{};
  std::vector<Vec3> vectors;

  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return i + count[0] * (j + count[1] * k);
  }
};

/// Lattice covering the grid: floor(extent / pitch) + 4 points per axis.
inline ControlLattice make_control_lattice(const GridShape& shape, const Spacing& spacing,
                                           const Vec3& pitch) {
  ControlLattice lattice;
  lattice.pitch = pitch;
  for (std::size_t a = 0; a < 3; ++a) {
    const double extent = static_cast<double>(shape[a] - 1) * spacing[a];
    lattice.count[a] = static_cast<std::size_t>(std::floor(extent / pitch[a])) + 4;
  }
  lattice.vectors.assign(lattice.count[0] * lattice.count[1] * lattice.count[2], Vec3{});
  return lattice;
}

namespace detail {

inline std::array<double, 4> cubic_bspline_weights(double t) {
  const double u = 1.0 - t;
  return {u * u * u / 6.0, (3.0 * t * t * t - 6.0 * t * t + 4.0) / 6.0,
          (-3.0 * t * t * t + 3.0 * t * t + 3.0 * t + 1.0) / 6.0, t * t * t / 6.0};
}

/// Interpolation coefficients for a line of samples: solves
/// (c[k-1] + 4 c[k] + c[k+1]) / 6 = v[k] with mirror boundaries.
inline void bspline_prefilter(std::vector<double>& v) {
  const std::size_t n = v.size();
  if (n < 2) return;
  // Thomas algorithm on the tridiagonal system scaled by 6.
  std::vector<double> upper(n), rhs(n);
  double diag = 4.0;
  upper[0] = 2.0 / diag;
  rhs[0] = 6.0 * v[0] / diag;
  for (std::size_t k = 1; k < n; ++k) {
    const double lower = (k == n - 1) ? 2.0 : 1.0;
    const double up = 1.0;
    diag = 4.0 - lower * upper[k - 1];
    upper[k] = up / diag;
    rhs[k] = (6.0 * v[k] - lower * rhs[k - 1]) / diag;
  }
  v[n - 1] = rhs[n - 1];
  for (std::size_t k = n - 1; k-- > 0;) v[k] = rhs[k] - upper[k] * v[k + 1];
}

/// Evaluates the spline with coefficients `coeff` (c at (c - 1) * pitch) at n points i * step.
inline void bspline_line(const std::vector<double>& coeff, double pitch, double step, std::size_t n,
                         std::vector<double>& out) {
  out.assign(n, 0.0);
  const auto m = static_cast<std::ptrdiff_t>(coeff.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) * step / pitch + 1.0;
    const auto base = static_cast<std::ptrdiff_t>(std::floor(u));
    const auto w = cubic_bspline_weights(u - static_cast<double>(base));
    double sum = 0.0;
    for (std::ptrdiff_t t = 0; t < 4; ++t) {
      const std::ptrdiff_t c = std::clamp<std::ptrdiff_t>(base - 1 + t, 0, m - 1);
      sum += w[t] * coeff[c];
    }
    out[i] = sum;
  }
}

}  // namespace detail

/// Dense field through the control vectors by separable cubic b-spline
/// interpolation (prefiltered, so the field passes through every control vector).
inline DeformationField bspline_densify(const ControlLattice& lattice, const GridShape& shape,
                                        const Spacing& spacing) {
  DeformationField f(shape, spacing);
  const auto [mx, my, mz] = lattice.count;
  for (std::size_t comp = 0; comp < 3; ++comp) {
    // Coefficients, prefiltered along each axis.
    std::vector<double> coeff(mx * my * mz);
    for (std::size_t i = 0; i < coeff.size(); ++i) coeff[i] = lattice.vectors[i][comp];
    std::vector<double> line;
    auto prefilter_axis = [&](std::size_t axis) {
      const std::array<std::size_t, 3> m{mx, my, mz};
      const std::size_t stride = axis == 0 ? 1 : (axis == 1 ? mx : mx * my);
      for (std::size_t k = 0; k < mz; ++k)
        for (std::size_t j = 0; j < my; ++j)
          for (std::size_t i = 0; i < mx; ++i) {
            const std::array<std::size_t, 3> at{i, j, k};
            if (at[axis] != 0) continue;
            const std::size_t start = i + mx * (j + my * k);
            line.resize(m[axis]);
            for (std::size_t q = 0; q < m[axis]; ++q) line[q] = coeff[start + q * stride];
            detail::bspline_prefilter(line);
            for (std::size_t q = 0; q < m[axis]; ++q) coeff[start + q * stride] = line[q];
          }
    };
    prefilter_axis(0);
    prefilter_axis(1);
    prefilter_axis(2);

    // Evaluate along x, then y, then z.
    std::vector<double> ex(shape.nx * my * mz), exy(shape.nx * shape.ny * mz);
    std::vector<double> src, dst;
    for (std::size_t k = 0; k < mz; ++k)
      for (std::size_t j = 0; j < my; ++j) {
        src.assign(coeff.begin() + static_cast<std::ptrdiff_t>(mx * (j + my * k)),
                   coeff.begin() + static_cast<std::ptrdiff_t>(mx * (j + my * k) + mx));
        detail::bspline_line(src, lattice.pitch[0], spacing.dx, shape.nx, dst);
        for (std::size_t x = 0; x < shape.nx; ++x) ex[x + shape.nx * (j + my * k)] = dst[x];
      }
    for (std::size_t k = 0; k < mz; ++k)
      for (std::size_t x = 0; x < shape.nx; ++x) {
        src.resize(my);
        for (std::size_t j = 0; j < my; ++j) src[j] = ex[x + shape.nx * (j + my * k)];
        detail::bspline_line(src, lattice.pitch[1], spacing.dy, shape.ny, dst);
        for (std::size_t y = 0; y < shape.ny; ++y) exy[x + shape.nx * (y + shape.ny * k)] = dst[y];
      }
    for (std::size_t y = 0; y < shape.ny; ++y)
      for (std::size_t x = 0; x < shape.nx; ++x) {
        src.resize(mz);
        for (std::size_t k = 0; k < mz; ++k) src[k] = exy[x + shape.nx * (y + shape.ny * k)];
        detail::bspline_line(src, lattice.pitch[2], spacing.dz, shape.nz, dst);
        for (std::size_t z = 0; z < shape.nz; ++z) f(x, y, z)[comp] = dst[z];
      }
  }
  return f;
}

/// Random in-plane control vectors (sigma per component), densified.
inline DeformationField elastic_field(const AugmentationConfig& config, const GridShape& shape,
                                      const Spacing& spacing, std::uint64_t seed) {
  ControlLattice lattice = make_control_lattice(shape, spacing, config.elastic_control_spacing_mm);
  for (std::size_t i = 0; i < lattice.vectors.size(); ++i)
    lattice.vectors[i] = {config.elastic_sigma_mm * counter_gaussian(seed, streams::kElasticX, i),
                          config.elastic_sigma_mm * counter_gaussian(seed, streams::kElasticY, i),
                          0.0};
  return bspline_densify(lattice, shape, spacing);
}

namespace detail {

/// Trilinear sample at fractional voxel coordinates. Neighbours outside the
/// grid contribute `outside`; with clamp they read the nearest edge voxel.
template <typename Get>
double trilinear(const GridShape& s, double fx, double fy, double fz, bool clamp, Get&& get) {
  const double x0 = std::floor(fx), y0 = std::floor(fy), z0 = std::floor(fz);
  const double tx = fx - x0, ty = fy - y0, tz = fz - z0;
  const auto ix = static_cast<std::int64_t>(x0), iy = static_cast<std::int64_t>(y0),
             iz = static_cast<std::int64_t>(z0);
  double sum = 0.0;
  for (int c = 0; c < 8; ++c) {
    const int ox = c & 1, oy = (c >> 1) & 1, oz = (c >> 2) & 1;
    const double w = (ox ? tx : 1.0 - tx) * (oy ? ty : 1.0 - ty) * (oz ? tz : 1.0 - tz);
    if (w == 0.0) continue;
    std::int64_t x = ix + ox, y = iy + oy, z = iz + oz;
    if (clamp) {
      x = std::clamp<std::int64_t>(x, 0, static_cast<std::int64_t>(s.nx) - 1);
      y = std::clamp<std::int64_t>(y, 0, static_cast<std::int64_t>(s.ny) - 1);
      z = std::clamp<std::int64_t>(z, 0, static_cast<std::int64_t>(s.nz) - 1);
    } else if (!s.contains(x, y, z)) {
      continue;
    }
    sum += w * get(s.index(static_cast<std::size_t>(x), static_cast<std::size_t>(y),
                           static_cast<std::size_t>(z)));
  }
  return sum;
}

inline void require_same_grid(const GridShape& a, const Spacing& sa, const GridShape& b,
                              const Spacing& sb) {
  validate_compatible(a, sa, b, sb);
}

}  // namespace detail

/// Sampling location of `inner` is moved by `outer` first:
/// result(p) = outer(p) + inner(p + outer(p)), with `inner` interpolated
/// trilinearly and clamped at the grid edge.
inline DeformationField compose_fields(const DeformationField& outer, const DeformationField& inner) {
  detail::require_same_grid(outer.shape, outer.spacing, inner.shape, inner.spacing);
  DeformationField out(outer.shape, outer.spacing);
  const auto& s = outer.shape;
  const Spacing& d = outer.spacing;
  for (std::size_t z = 0; z < s.nz; ++z)
    for (std::size_t y = 0; y < s.ny; ++y)
      for (std::size_t x = 0; x < s.nx; ++x) {
        const Vec3& o = outer(x, y, z);
        const double fx = static_cast<double>(x) + o[0] / d.dx;
        const double fy = static_cast<double>(y) + o[1] / d.dy;
        const double fz = static_cast<double>(z) + o[2] / d.dz;
        Vec3 r{};
        for (std::size_t c = 0; c < 3; ++c)
          r[c] = o[c] + detail::trilinear(s, fx, fy, fz, true, [&](std::size_t i) {
                   return inner.displacement[i][c];
                 });
        out(x, y, z) = r;
      }
  return out;
}

/// Resamples with trilinear interpolation; samples outside the grid are 0.
inline CtVolume warp_ct(const CtVolume& v, const DeformationField& f) {
  detail::require_same_grid(v.shape(), v.spacing(), f.shape, f.spacing);
  CtVolume out(v.shape(), v.spacing());
  const auto& s = v.shape();
  const Spacing& d = v.spacing();
  const auto& src = v.data();
  for (std::size_t z = 0; z < s.nz; ++z)
    for (std::size_t y = 0; y < s.ny; ++y)
      for (std::size_t x = 0; x < s.nx; ++x) {
        const Vec3& o = f(x, y, z);
        out(x, y, z) = static_cast<float>(detail::trilinear(
            s, static_cast<double>(x) + o[0] / d.dx, static_cast<double>(y) + o[1] / d.dy,
            static_cast<double>(z) + o[2] / d.dz, false,
            [&](std::size_t i) { return static_cast<double>(src[i]); }));
      }
  return out;
}

enum class MaskWarp { Linear, Nearest };

/// Linear mode interpolates the {0,1} mask and keeps values >= 0.5.
inline Mask warp_mask(const Mask& m, const DeformationField& f, MaskWarp mode = MaskWarp::Linear) {
  detail::require_same_grid(m.shape(), m.spacing(), f.shape, f.spacing);
  Mask out(m.shape(), m.spacing());
  const auto& s = m.shape();
  const Spacing& d = m.spacing();
  const auto& src = m.data();
  for (std::size_t z = 0; z < s.nz; ++z)
    for (std::size_t y = 0; y < s.ny; ++y)
      for (std::size_t x = 0; x < s.nx; ++x) {
        const Vec3& o = f(x, y, z);
        const double fx = static_cast<double>(x) + o[0] / d.dx;
        const double fy = static_cast<double>(y) + o[1] / d.dy;
        const double fz = static_cast<double>(z) + o[2] / d.dz;
        if (mode == MaskWarp::Nearest) {
          out(x, y, z) = m.at_or_zero(static_cast<std::int64_t>(std::floor(fx + 0.5)),
                                      static_cast<std::int64_t>(std::floor(fy + 0.5)),
                                      static_cast<std::int64_t>(std::floor(fz + 0.5)))
                             ? 1
                             : 0;
        } else {
          const double v = detail::trilinear(s, fx, fy, fz, false, [&](std::size_t i) {
            return src[i] ? 1.0 : 0.0;
          });
          out(x, y, z) = v >= 0.5 ? 1 : 0;
        }
      }
  return out;
}

/// Whole-voxel shift with zero fill: out(p) = in(p - shift).
inline Mask shift_mask(const Mask& m, std::int64_t sx, std::int64_t sy, std::int64_t sz) {
  Mask out(m.shape(), m.spacing());
  const auto& s = m.shape();
  for (std::size_t z = 0; z < s.nz; ++z)
    for (std::size_t y = 0; y < s.ny; ++y)
      for (std::size_t x = 0; x < s.nx; ++x)
        out(x, y, z) = m.at_or_zero(static_cast<std::int64_t>(x) - sx,
                                    static_cast<std::int64_t>(y) - sy,
                                    static_cast<std::int64_t>(z) - sz);
  return out;
}

inline Mask mirror_x(const Mask& m) {
  Mask out(m.shape(), m.spacing());
  const auto& s = m.shape();
  for (std::size_t z = 0; z < s.nz; ++z)
    for (std::size_t y = 0; y < s.ny; ++y)
      for (std::size_t x = 0; x < s.nx; ++x) out(x, y, z) = m(s.nx - 1 - x, y, z);
  return out;
}

/// Mirrors every channel along x and exchanges left/right partners.
inline MultiOrganSegmentation mirror_with_label_swap(const MultiOrganSegmentation& seg,
                                                     const Taxonomy& taxonomy) {
  MultiOrganSegmentation out(seg.shape(), seg.spacing());
  for (const auto& [organ, mask] : seg.channels())
    out.set(taxonomy.partner(organ).value_or(organ), mirror_x(mask));
  return out;
}

/// Adds i.i.d. zero-mean Gaussian noise; voxel i uses draw i of the noise stream.
inline CtVolume add_noise(const CtVolume& v, double sigma_hu, std::uint64_t seed) {
  if (!(sigma_hu >= 0)) throw Error(ErrorCode::InvalidArgument, "noise sigma must be non-negative");
  CtVolume out = v;
  auto& d = out.data();
  for (std::size_t i = 0; i < d.size(); ++i)
    d[i] = static_cast<float>(static_cast<double>(d[i]) +
                              sigma_hu * counter_gaussian(seed, streams::kNoise, i));
  return out;
}

struct AugmentedCase {
  CtVolume ct;
  MultiOrganSegmentation segmentation;
  AffineParams affine;
  bool mirrored = false;
};

/// The full pipeline: mirror (with label swap) by chance, then one warp by the
/// combined field compose_fields(affine, elastic), then intensity noise.
inline AugmentedCase augment(const CtVolume& ct, const MultiOrganSegmentation& seg,
                             const AugmentationConfig& config, const Taxonomy& taxonomy,
                             MaskWarp mask_mode = MaskWarp::Linear) {
  config.validate();
  detail::require_same_grid(ct.shape(), ct.spacing(), seg.shape(), seg.spacing());
  AugmentedCase out{ct, seg, sample_affine(config, config.seed), sample_mirror(config, config.seed)};
  if (out.mirrored) {
    out.segmentation = mirror_with_label_swap(seg, taxonomy);
    CtVolume flipped(ct.shape(), ct.spacing());
    const auto& s = ct.shape();
    for (std::size_t z = 0; z < s.nz; ++z)
      for (std::size_t y = 0; y < s.ny; ++y)
        for (std::size_t x = 0; x < s.nx; ++x) flipped(x, y, z) = ct(s.nx - 1 - x, y, z);
    out.ct = std::move(flipped);
  }
  const DeformationField field =
      compose_fields(affine_field(out.affine, ct.shape(), ct.spacing()),
                     elastic_field(config, ct.shape(), ct.spacing(), config.seed));
  out.ct = add_noise(warp_ct(out.ct, field), config.noise_sigma_hu, config.seed);
  MultiOrganSegmentation warped(seg.shape(), seg.spacing());
  for (const auto& [organ, mask] : out.segmentation.channels())
    warped.set(organ, warp_mask(mask, field, mask_mode));
  out.segmentation = std::move(warped);
  return out;
}

}  // namespace surfdice

#endif  // SURFDICE_PERTURB_HPP
