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

// Surface elements on the half-voxel shifted raster.
//
// Raster point r = (i, j, k), 0 <= i <= nx (likewise j, k), sits between
// voxels i-1 and i on each axis. Its eight neighbours are the voxels
// (i - 1 + ox, j - 1 + oy, k - 1 + oz) for the corner offsets of
// mc::corner_offset; voxels outside the grid are background. With voxel
// centres at (x dx, y dy, z dz) the point's physical position is
// ((i - 1/2) dx, (j - 1/2) dy, (k - 1/2) dz).

#ifndef SURFDICE_SURFACE_HPP
#define SURFDICE_SURFACE_HPP

#include <array>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <vector>

#include "surfdice/grid.hpp"
#include "surfdice/marching_cubes.hpp"

namespace surfdice {

/// Triangulated surface area (mm^2) for each of the 256 neighbour configurations.
struct NeighborAreaTable {
  Spacing spacing;
  std::array<double, 256> area{};
};

inline NeighborAreaTable build_area_table(const Spacing& spacing) {
  NeighborAreaTable table;
  table.spacing = spacing;
  const std::array<double, 3> cell{spacing.dx, spacing.dy, spacing.dz};
  const auto& tris = mc::triangulation_table();
  for (int c = 0; c < 256; ++c) {
    double sum = 0.0;
    for (const auto& t : tris[c])
      sum += mc::triangle_area(mc::edge_midpoint(t[0], cell), mc::edge_midpoint(t[1], cell),
                               mc::edge_midpoint(t[2], cell));
    table.area[c] = sum;
  }
  return table;
}

/// Writes "config,area_mm2" followed by one line per configuration.
inline void write_area_table_csv(const NeighborAreaTable& table, std::ostream& out) {
  out << "config,area_mm2\n";
  char buf[64];
  for (int c = 0; c < 256; ++c) {
    std::snprintf(buf, sizeof buf, "%d,%.17g\n", c, table.area[c]);
    out << buf;
  }
}

struct SurfaceElement {
  std::array<std::uint32_t, 3> raster_index{};
  std::array<double, 3> position{};
  std::uint8_t config = 0;
  double area = 0.0;
};

/// Elements in raster-lexicographic order (x fastest).
struct SurfaceElementList {
  GridShape raster_shape;  // (nx + 1, ny + 1, nz + 1)
  Spacing spacing;
  std::vector<SurfaceElement> elements;
  double total_area = 0.0;

  bool empty() const { return elements.empty(); }
};

inline GridShape shifted_raster_shape(const GridShape& s) { return {s.nx + 1, s.ny + 1, s.nz + 1}; }

namespace detail {

/// Visits every shifted-raster point with its configuration code.
template <typename Visit>
void for_each_configuration(const Mask& m, Visit&& visit) {
  const auto& s = m.shape();
  // Zero-padded copy: voxel (x, y, z) is at padded (x + 1, y + 1, z + 1), so
  // raster point r's corner offset o reads padded (r + o).
  const std::size_t px = s.nx + 2, py = s.ny + 2, pz = s.nz + 2;
  std::vector<std::uint8_t> padded(px * py * pz, 0);
  for (std::size_t z = 0; z < s.nz; ++z)
    for (std::size_t y = 0; y < s.ny; ++y)
      for (std::size_t x = 0; x < s.nx; ++x)
        padded[(x + 1) + px * ((y + 1) + py * (z + 1))] = m(x, y, z) ? 1 : 0;

  std::array<std::size_t, 8> offset{};
  for (int b = 0; b < 8; ++b) {
    const auto o = mc::corner_offset(b);
    offset[b] = static_cast<std::size_t>(o[0]) + px * (static_cast<std::size_t>(o[1]) +
                                                       py * static_cast<std::size_t>(o[2]));
  }
  for (std::size_t k = 0; k + 1 < pz; ++k)
    for (std::size_t j = 0; j + 1 < py; ++j) {
      const std::size_t row = px * (j + py * k);
      for (std::size_t i = 0; i + 1 < px; ++i) {
        const std::uint8_t* p = padded.data() + row + i;
        unsigned config = 0;
        for (int b = 0; b < 8; ++b) config |= static_cast<unsigned>(p[offset[b]]) << b;
        visit(i, j, k, static_cast<std::uint8_t>(config));
      }
    }
}

}  // namespace detail

inline SurfaceElementList extract_surface(const Mask& m, const NeighborAreaTable& table) {
  if (!spacing_close(m.spacing(), table.spacing))
    throw Error(ErrorCode::SpacingMismatch, "area table was built for a different spacing");
  SurfaceElementList out;
  out.raster_shape = shifted_raster_shape(m.shape());
  out.spacing = m.spacing();
  const Spacing& d = m.spacing();
  detail::for_each_configuration(m, [&](std::size_t i, std::size_t j, std::size_t k,
                                        std::uint8_t config) {
    const double area = table.area[config];
    if (config == 0 || config == 255 || !(area > 0.0)) return;
    SurfaceElement e;
    e.raster_index = {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                      static_cast<std::uint32_t>(k)};
    e.position = {(static_cast<double>(i) - 0.5) * d.dx, (static_cast<double>(j) - 0.5) * d.dy,
                  (static_cast<double>(k) - 0.5) * d.dz};
    e.config = config;
    e.area = area;
    out.total_area += area;
    out.elements.push_back(e);
  });
  return out;
}

inline double total_surface_area(const Mask& m, const NeighborAreaTable& table) {
  return extract_surface(m, table).total_area;
}

/// Naive estimator: area of voxel faces separating foreground from background.
inline double exposed_face_area(const Mask& m) {
  const auto& s = m.shape();
  const Spacing& d = m.spacing();
  const std::array<double, 3> face{d.dy * d.dz, d.dx * d.dz, d.dx * d.dy};
  double total = 0.0;
  for (std::size_t z = 0; z < s.nz; ++z)
    for (std::size_t y = 0; y < s.ny; ++y)
      for (std::size_t x = 0; x < s.nx; ++x) {
        if (!m(x, y, z)) continue;
        const auto ix = static_cast<std::int64_t>(x), iy = static_cast<std::int64_t>(y),
                   iz = static_cast<std::int64_t>(z);
        total += face[0] * ((m.at_or_zero(ix - 1, iy, iz) ? 0 : 1) +
                            (m.at_or_zero(ix + 1, iy, iz) ? 0 : 1));
        total += face[1] * ((m.at_or_zero(ix, iy - 1, iz) ? 0 : 1) +
                            (m.at_or_zero(ix, iy + 1, iz) ? 0 : 1));
        total += face[2] * ((m.at_or_zero(ix, iy, iz - 1) ? 0 : 1) +
                            (m.at_or_zero(ix, iy, iz + 1) ? 0 : 1));
      }
  return total;
}

}  // namespace surfdice

#endif  // SURFDICE_SURFACE_HPP
