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

// Marching-cubes triangulation of binary cube configurations.
//
// Corner b (0..7) of a cube sits at offset (b & 1, (b >> 1) & 1, (b >> 2) & 1);
// bit b of a configuration code is set when that corner is foreground.
// Surface vertices are edge midpoints (iso-level 1/2 on binary data).
//
// The 256-entry table is generated, not transcribed, and reproduces the
// classic Lorensen-Cline case table:
//  - a configuration with more than four foreground corners uses the
//    triangulation of its complement, so area[c] == area[255 - c];
//  - each cube face contributes contour segments between its sign-changing
//    edges; a face with four sign changes cuts off each foreground corner
//    separately (of the configuration with at most four foreground corners);
//  - segments are chained into closed loops, and each loop is split into the
//    triangulation of maximal area on the unit cube (ties keep the first
//    candidate in split-vertex order). The same topology is reused for every
//    spacing.
// Like the classic table, neighbouring cubes can disagree across ambiguous
// faces, leaving small holes on checkerboard-like patterns.

#ifndef SURFDICE_MARCHING_CUBES_HPP
#define SURFDICE_MARCHING_CUBES_HPP

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace surfdice::mc {

struct Edge {
  int a;
  int b;
  int axis;
};

inline constexpr std::array<int, 3> corner_offset(int corner) {
  return {corner & 1, (corner >> 1) & 1, (corner >> 2) & 1};
}

/// The 12 cube edges, ordered by lower corner then axis.
inline const std::array<Edge, 12>& edges() {
  static const std::array<Edge, 12> table = [] {
    std::array<Edge, 12> out{};
    int n = 0;
    for (int a = 0; a < 8; ++a)
      for (int axis = 0; axis < 3; ++axis)
        if (!((a >> axis) & 1)) out[n++] = Edge{a, a | (1 << axis), axis};
    return out;
  }();
  return table;
}

inline int edge_between(int a, int b) {
  static const std::array<std::array<int, 8>, 8> lookup = [] {
    std::array<std::array<int, 8>, 8> out{};
    for (auto& row : out) row.fill(-1);
    const auto& e = edges();
    for (int i = 0; i < 12; ++i) {
      out[e[i].a][e[i].b] = i;
      out[e[i].b][e[i].a] = i;
    }
    return out;
  }();
  return lookup[a][b];
}

using Triangle = std::array<int, 3>;  // edge indices

/// Midpoint of edge `e` in physical units for a cell of size (sx, sy, sz).
inline std::array<double, 3> edge_midpoint(int e, const std::array<double, 3>& cell) {
  const auto& edge = edges()[e];
  const auto pa = corner_offset(edge.a);
  const auto pb = corner_offset(edge.b);
  std::array<double, 3> p{};
  for (int i = 0; i < 3; ++i) p[i] = 0.5 * (pa[i] + pb[i]) * cell[i];
  return p;
}

inline double triangle_area(const std::array<double, 3>& p0, const std::array<double, 3>& p1,
                            const std::array<double, 3>& p2) {
  const double ux = p1[0] - p0[0], uy = p1[1] - p0[1], uz = p1[2] - p0[2];
  const double vx = p2[0] - p0[0], vy = p2[1] - p0[1], vz = p2[2] - p0[2];
  const double cx = uy * vz - uz * vy;
  const double cy = uz * vx - ux * vz;
  const double cz = ux * vy - uy * vx;
  return 0.5 * std::sqrt(cx * cx + cy * cy + cz * cz);
}


/// Closed contour loops (edge-index sequences) of a configuration.
inline std::vector<std::vector<int>> contour_loops(std::uint8_t config) {
  auto inside = [config](int corner) { return ((config >> corner) & 1) != 0; };

  std::array<std::array<int, 2>, 12> neighbours{};
  std::array<int, 12> degree{};
  auto link = [&](int e0, int e1) {
    neighbours[e0][degree[e0]++] = e1;
    neighbours[e1][degree[e1]++] = e0;
  };

  for (int axis = 0; axis < 3; ++axis) {
    const int u = axis == 0 ? 1 : 0;
    const int v = axis == 2 ? 1 : 2;
    for (int side = 0; side < 2; ++side) {
      const int base = side << axis;
      const std::array<int, 4> ring{base, base | (1 << u), base | (1 << u) | (1 << v),
                                    base | (1 << v)};
      std::array<int, 4> ring_edge{};
      for (int i = 0; i < 4; ++i) ring_edge[i] = edge_between(ring[i], ring[(i + 1) % 4]);

      std::array<int, 4> crossing{};
      int crossings = 0;
      for (int i = 0; i < 4; ++i)
        if (inside(ring[i]) != inside(ring[(i + 1) % 4])) crossing[crossings++] = ring_edge[i];

      if (crossings == 2) {
        link(crossing[0], crossing[1]);
      } else if (crossings == 4) {
        for (int i = 0; i < 4; ++i)
          if (inside(ring[i])) link(ring_edge[(i + 3) % 4], ring_edge[i]);
      }
    }
  }

  std::vector<std::vector<int>> loops;
  std::array<bool, 12> visited{};
  for (int start = 0; start < 12; ++start) {
    if (degree[start] == 0 || visited[start]) continue;
    std::vector<int> loop{start};
    visited[start] = true;
    int prev = start;
    int cur = std::min(neighbours[start][0], neighbours[start][1]);
    while (cur != start) {
      loop.push_back(cur);
      visited[cur] = true;
      const int next = neighbours[cur][0] == prev ? neighbours[cur][1] : neighbours[cur][0];
      prev = cur;
      cur = next;
    }
    loops.push_back(std::move(loop));
  }
  return loops;
}

/// Maximal-area triangulation of a closed loop on the unit cube.
inline std::vector<Triangle> triangulate_loop(const std::vector<int>& loop) {
  const int n = static_cast<int>(loop.size());
  std::vector<std::array<double, 3>> p(n);
  for (int i = 0; i < n; ++i) p[i] = edge_midpoint(loop[i], {1.0, 1.0, 1.0});

  // best[i][j]: largest area of a triangulation of the sub-polygon i..j.
  std::vector<std::vector<double>> best(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<int>> split(n, std::vector<int>(n, -1));
  for (int len = 2; len < n; ++len)
    for (int i = 0; i + len < n; ++i) {
      const int j = i + len;
      for (int k = i + 1; k < j; ++k) {
        const double a = best[i][k] + best[k][j] + triangle_area(p[i], p[k], p[j]);
        if (split[i][j] < 0 || a > best[i][j] + 1e-12) {
          best[i][j] = a;
          split[i][j] = k;
        }
      }
    }

  std::vector<Triangle> out;
  std::vector<std::array<int, 2>> stack{{0, n - 1}};
  while (!stack.empty()) {
    const auto [i, j] = stack.back();
    stack.pop_back();
    if (j - i < 2) continue;
    const int k = split[i][j];
    out.push_back({loop[i], loop[k], loop[j]});
    stack.push_back({k, j});
    stack.push_back({i, k});
  }
  return out;
}

/// Triangles (as edge-index triples) for one configuration code.
inline std::vector<Triangle> triangulate(std::uint8_t config) {
  const bool complement = std::popcount(config) > 4;
  const auto canonical = static_cast<std::uint8_t>(complement ? ~config : config);
  std::vector<Triangle> triangles;
  for (const auto& loop : contour_loops(canonical)) {
    auto t = triangulate_loop(loop);
    triangles.insert(triangles.end(), t.begin(), t.end());
  }
  return triangles;
}

/// All 256 triangulations, built once.
inline const std::array<std::vector<Triangle>, 256>& triangulation_table() {
  static const std::array<std::vector<Triangle>, 256> table = [] {
    std::array<std::vector<Triangle>, 256> out;
    for (int c = 0; c < 256; ++c) out[c] = triangulate(static_cast<std::uint8_t>(c));
    return out;
  }();
  return table;
}

}  // namespace surfdice::mc

#endif  // SURFDICE_MARCHING_CUBES_HPP
