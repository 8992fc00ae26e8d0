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

// Exact anisotropic Euclidean distance transform on the shifted raster.
//
// Separable lower-envelope-of-parabolas method (Felzenszwalb & Huttenlocher):
// one 1-D pass per axis over squared physical distances, linear in the number
// of raster points.

#ifndef SURFDICE_DISTANCE_HPP
#define SURFDICE_DISTANCE_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "surfdice/grid.hpp"
#include "surfdice/surface.hpp"

namespace surfdice {

/// Points with no source (every point, when the source is empty) hold +infinity.
inline constexpr double kNoSurface = std::numeric_limits<double>::infinity();

struct DistanceMap {
  GridShape shape;  // shifted-raster shape
  Spacing spacing;
  std::vector<double> dist;  // mm
  bool empty_source = true;

  double at(std::size_t i, std::size_t j, std::size_t k) const { return dist[shape.index(i, j, k)]; }
};

namespace detail {

/// Squared distance transform of one line. `f` holds squared distances
/// (+inf where undefined); `step` is the physical sample pitch. Results go to
/// `out`. `site` and `bound` are scratch buffers of at least f.size() and
/// f.size() + 1 entries.
inline void squared_edt_line(std::span<const double> f, double step, std::span<double> out,
                             std::span<std::size_t> site, std::span<double> bound) {
  const std::size_t n = f.size();
  auto sq = [](double v) { return v * v; };
  // Abscissa of the intersection of the parabolas rooted at q and v (q > v),
  // in physical units relative to sample 0.
  auto intersect = [&](std::size_t q, std::size_t v) {
    const double xq = step * static_cast<double>(q);
    const double xv = step * static_cast<double>(v);
    return ((f[q] + xq * xq) - (f[v] + xv * xv)) / (2.0 * (xq - xv));
  };

  std::ptrdiff_t k = -1;
  for (std::size_t q = 0; q < n; ++q) {
    if (!std::isfinite(f[q])) continue;
    if (k < 0) {
      k = 0;
      site[0] = q;
      bound[0] = -kNoSurface;
      bound[1] = kNoSurface;
      continue;
    }
    double s = intersect(q, site[k]);
    while (k > 0 && s <= bound[k]) {
      --k;
      s = intersect(q, site[k]);
    }
    ++k;
    site[k] = q;
    bound[k] = s;
    bound[k + 1] = kNoSurface;
  }

  if (k < 0) {
    for (std::size_t q = 0; q < n; ++q) out[q] = kNoSurface;
    return;
  }
  std::size_t j = 0;
  for (std::size_t q = 0; q < n; ++q) {
    const double x = step * static_cast<double>(q);
    while (bound[j + 1] < x) ++j;
    const std::size_t v = site[j];
    const double delta = step * (static_cast<double>(q) - static_cast<double>(v));
    out[q] = f[v] + sq(delta);
  }
}

}  // namespace detail

/// Distance (mm) from every raster point to the nearest source point.
inline DistanceMap distance_transform(std::span<const std::array<std::uint32_t, 3>> source,
                                      const GridShape& raster_shape, const Spacing& spacing) {
  DistanceMap map;
  map.shape = raster_shape;
  map.spacing = spacing;
  map.dist.assign(raster_shape.count(), kNoSurface);
  map.empty_source = source.empty();
  if (source.empty()) return map;

  for (const auto& r : source) {
    if (r[0] >= raster_shape.nx || r[1] >= raster_shape.ny || r[2] >= raster_shape.nz)
      throw Error(ErrorCode::InvalidArgument, "source point outside the raster");
    map.dist[raster_shape.index(r[0], r[1], r[2])] = 0.0;
  }

  const std::size_t longest = std::max({raster_shape.nx, raster_shape.ny, raster_shape.nz});
  std::vector<double> line(longest), result(longest), bound(longest + 1);
  std::vector<std::size_t> site(longest);
  auto& d = map.dist;

  for (std::size_t axis = 0; axis < 3; ++axis) {
    const std::size_t n = raster_shape[axis];
    const std::size_t stride = axis == 0 ? 1 : (axis == 1 ? raster_shape.nx
                                                          : raster_shape.nx * raster_shape.ny);
    const double step = spacing[axis];
    // Enumerate line starts: every point whose coordinate along `axis` is 0.
    for (std::size_t k = 0; k < raster_shape.nz; ++k) {
      if (axis == 2 && k > 0) break;
      for (std::size_t j = 0; j < raster_shape.ny; ++j) {
        if (axis == 1 && j > 0) break;
        for (std::size_t i = 0; i < raster_shape.nx; ++i) {
          if (axis == 0 && i > 0) break;
          const std::size_t start = raster_shape.index(i, j, k);
          bool any = false;
          for (std::size_t q = 0; q < n; ++q) {
            line[q] = d[start + q * stride];
            any = any || std::isfinite(line[q]);
          }
          if (!any) continue;
          detail::squared_edt_line(std::span<const double>(line.data(), n), step,
                                   std::span<double>(result.data(), n),
                                   std::span<std::size_t>(site.data(), n),
                                   std::span<double>(bound.data(), n + 1));
          for (std::size_t q = 0; q < n; ++q) d[start + q * stride] = result[q];
        }
      }
    }
  }
  for (auto& v : d)
    if (std::isfinite(v)) v = std::sqrt(v);
  return map;
}

inline DistanceMap distance_transform(const SurfaceElementList& source) {
  std::vector<std::array<std::uint32_t, 3>> points;
  points.reserve(source.elements.size());
  for (const auto& e : source.elements) points.push_back(e.raster_index);
  return distance_transform(points, source.raster_shape, source.spacing);
}

struct AreaDistance {
  double area = 0.0;      // mm^2
  double distance = 0.0;  // mm, +inf when the other surface is empty
};

/// Pairs each element of `own` with the other surface's distance at its raster point.
inline std::vector<AreaDistance> distances_to_other_surface(const SurfaceElementList& own,
                                                            const DistanceMap& other) {
  std::vector<AreaDistance> out;
  out.reserve(own.elements.size());
  for (const auto& e : own.elements) {
    const auto& r = e.raster_index;
    if (r[0] >= other.shape.nx || r[1] >= other.shape.ny || r[2] >= other.shape.nz)
      throw Error(ErrorCode::InvalidArgument, "surface element outside the distance map");
    out.push_back({e.area, other.empty_source ? kNoSurface : other.at(r[0], r[1], r[2])});
  }
  return out;
}

}  // namespace surfdice

#endif  // SURFDICE_DISTANCE_HPP
