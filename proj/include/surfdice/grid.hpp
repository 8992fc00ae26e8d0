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

// Voxel grid data model.
//
// Storage order is x fastest: the voxel (x, y, z) lives at
// x + nx * (y + ny * z). NIfTI payloads, surface extraction and the
// distance transform all use this order.

#ifndef SURFDICE_GRID_HPP
#define SURFDICE_GRID_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "surfdice/error.hpp"

namespace surfdice {

/// Millimetres per voxel along x, y, z.
struct Spacing {
  double dx = 1.0;
  double dy = 1.0;
  double dz = 1.0;

  double operator[](std::size_t axis) const { return axis == 0 ? dx : (axis == 1 ? dy : dz); }
  double max() const { return std::max({dx, dy, dz}); }
  double min() const { return std::min({dx, dy, dz}); }
  double voxel_volume() const { return dx * dy * dz; }
  bool valid() const {
    return std::isfinite(dx) && std::isfinite(dy) && std::isfinite(dz) && dx > 0 && dy > 0 &&
           dz > 0;
  }
  Spacing scaled(double s) const { return {dx * s, dy * s, dz * s}; }

  friend bool operator==(const Spacing&, const Spacing&) = default;
};

inline constexpr double kSpacingRelativeTolerance = 1e-6;

inline bool spacing_close(double a, double b) {
  return std::abs(a - b) <= kSpacingRelativeTolerance * std::max(std::abs(a), std::abs(b));
}

inline bool spacing_close(const Spacing& a, const Spacing& b) {
  return spacing_close(a.dx, b.dx) && spacing_close(a.dy, b.dy) && spacing_close(a.dz, b.dz);
}

struct GridShape {
  std::size_t nx = 1;
  std::size_t ny = 1;
  std::size_t nz = 1;

  std::size_t operator[](std::size_t axis) const { return axis == 0 ? nx : (axis == 1 ? ny : nz); }
  std::size_t count() const { return nx * ny * nz; }
  std::size_t index(std::size_t x, std::size_t y, std::size_t z) const {
    return x + nx * (y + ny * z);
  }
  bool contains(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return x >= 0 && y >= 0 && z >= 0 && static_cast<std::size_t>(x) < nx &&
           static_cast<std::size_t>(y) < ny && static_cast<std::size_t>(z) < nz;
  }
  bool valid() const {
    if (nx == 0 || ny == 0 || nz == 0) return false;
    const auto limit = std::numeric_limits<std::uint64_t>::max();
    return nx <= limit / ny && nx * ny <= limit / nz;
  }

  friend bool operator==(const GridShape&, const GridShape&) = default;
};

/// Dense scalar grid with physical spacing.
template <typename T>
class Grid3 {
 public:
  using value_type = T;

  Grid3() = default;
  Grid3(GridShape shape, Spacing spacing, T fill = T{})
      : shape_(shape), spacing_(spacing) {
    if (!shape.valid())
      throw Error(ErrorCode::InvalidArgument, "grid shape must be positive on every axis");
    if (!spacing.valid())
      throw Error(ErrorCode::InvalidArgument, "spacing must be strictly positive on every axis");
    data_.assign(shape.count(), fill);
  }
  Grid3(GridShape shape, Spacing spacing, std::vector<T> data) : Grid3(shape, spacing) {
    if (data.size() != shape_.count())
      throw Error(ErrorCode::InvalidArgument, "voxel payload length does not match grid shape");
    data_ = std::move(data);
  }

  const GridShape& shape() const { return shape_; }
  const Spacing& spacing() const { return spacing_; }
  std::size_t size() const { return data_.size(); }

  T operator()(std::size_t x, std::size_t y, std::size_t z) const {
    return data_[shape_.index(x, y, z)];
  }
  T& operator()(std::size_t x, std::size_t y, std::size_t z) { return data_[shape_.index(x, y, z)]; }

  /// Out-of-grid reads return T{} (zero padding).
  T at_or_zero(std::int64_t x, std::int64_t y, std::int64_t z) const {
    if (!shape_.contains(x, y, z)) return T{};
    return data_[shape_.index(static_cast<std::size_t>(x), static_cast<std::size_t>(y),
                              static_cast<std::size_t>(z))];
  }

  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

  friend bool operator==(const Grid3&, const Grid3&) = default;

 private:
  GridShape shape_;
  Spacing spacing_;
  std::vector<T> data_;
};

/// Binary occupancy grid. Voxels hold 0 or 1.
using Mask = Grid3<std::uint8_t>;
/// Intensities in Hounsfield units.
using CtVolume = Grid3<float>;

inline std::size_t foreground_count(const Mask& m) {
  return static_cast<std::size_t>(
      std::count_if(m.data().begin(), m.data().end(), [](std::uint8_t v) { return v != 0; }));
}

inline bool is_empty(const Mask& m) {
  return std::none_of(m.data().begin(), m.data().end(), [](std::uint8_t v) { return v != 0; });
}

/// Physical volume in mm^3.
inline double mask_volume(const Mask& m) {
  return static_cast<double>(foreground_count(m)) * m.spacing().voxel_volume();
}

inline void validate_compatible(const GridShape& sa, const Spacing& pa, const GridShape& sb,
                                const Spacing& pb) {
  static constexpr const char* kAxis[] = {"x", "y", "z"};
  for (std::size_t axis = 0; axis < 3; ++axis) {
    if (sa[axis] != sb[axis])
      throw Error(ErrorCode::ShapeMismatch,
                  std::string(kAxis[axis]) + " extent " + std::to_string(sa[axis]) + " vs " +
                      std::to_string(sb[axis]));
  }
  for (std::size_t axis = 0; axis < 3; ++axis) {
    if (!spacing_close(pa[axis], pb[axis]))
      throw Error(ErrorCode::SpacingMismatch,
                  std::string(kAxis[axis]) + " spacing " + std::to_string(pa[axis]) + " vs " +
                      std::to_string(pb[axis]));
  }
}

template <typename A, typename B>
void validate_compatible(const Grid3<A>& a, const Grid3<B>& b) {
  validate_compatible(a.shape(), a.spacing(), b.shape(), b.spacing());
}

/// Inclusive voxel ranges; `empty` marks the no-foreground sentinel.
struct BoundingBox {
  bool empty = true;
  std::array<std::size_t, 3> lo{};
  std::array<std::size_t, 3> hi{};

  GridShape extent() const { return {hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1}; }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

inline BoundingBox bounding_box(const Mask& m, std::size_t pad_voxels = 0) {
  const auto& s = m.shape();
  BoundingBox box;
  box.lo = {s.nx, s.ny, s.nz};
  box.hi = {0, 0, 0};
  for (std::size_t z = 0; z < s.nz; ++z)
    for (std::size_t y = 0; y < s.ny; ++y)
      for (std::size_t x = 0; x < s.nx; ++x) {
        if (!m(x, y, z)) continue;
        box.empty = false;
        const std::array<std::size_t, 3> p{x, y, z};
        for (std::size_t a = 0; a < 3; ++a) {
          box.lo[a] = std::min(box.lo[a], p[a]);
          box.hi[a] = std::max(box.hi[a], p[a]);
        }
      }
  if (box.empty) return BoundingBox{};
  for (std::size_t a = 0; a < 3; ++a) {
    box.lo[a] = box.lo[a] >= pad_voxels ? box.lo[a] - pad_voxels : 0;
    box.hi[a] = std::min(box.hi[a] + pad_voxels, s[a] - 1);
  }
  return box;
}

inline BoundingBox union_box(const BoundingBox& a, const BoundingBox& b) {
  if (a.empty) return b;
  if (b.empty) return a;
  BoundingBox u;
  u.empty = false;
  for (std::size_t i = 0; i < 3; ++i) {
    u.lo[i] = std::min(a.lo[i], b.lo[i]);
    u.hi[i] = std::max(a.hi[i], b.hi[i]);
  }
  return u;
}

/// Copy of the voxels inside a non-empty box.
template <typename T>
Grid3<T> crop(const Grid3<T>& g, const BoundingBox& box) {
  if (box.empty) throw Error(ErrorCode::InvalidArgument, "cannot crop to an empty box");
  for (std::size_t a = 0; a < 3; ++a)
    if (box.hi[a] >= g.shape()[a] || box.lo[a] > box.hi[a])
      throw Error(ErrorCode::InvalidArgument, "crop box outside the grid");
  Grid3<T> out(box.extent(), g.spacing());
  const auto e = box.extent();
  for (std::size_t z = 0; z < e.nz; ++z)
    for (std::size_t y = 0; y < e.ny; ++y)
      for (std::size_t x = 0; x < e.nx; ++x)
        out(x, y, z) = g(x + box.lo[0], y + box.lo[1], z + box.lo[2]);
  return out;
}

/// Organ names and their left/right pairing.
struct Taxonomy {
  std::vector<std::string> organs;
  std::vector<std::pair<std::string, std::string>> lr_pairs;

  bool contains(const std::string& organ) const {
    return std::find(organs.begin(), organs.end(), organ) != organs.end();
  }

  std::optional<std::string> partner(const std::string& organ) const {
    for (const auto& [lt, rt] : lr_pairs) {
      if (organ == lt) return rt;
      if (organ == rt) return lt;
    }
    return std::nullopt;
  }

  /// Pairs every "<stem>-Lt" with an existing "<stem>-Rt".
  static std::vector<std::pair<std::string, std::string>> pairs_by_suffix(
      const std::vector<std::string>& organs) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& name : organs) {
      if (name.size() < 3 || name.compare(name.size() - 3, 3, "-Lt") != 0) continue;
      const std::string rt = name.substr(0, name.size() - 3) + "-Rt";
      if (std::find(organs.begin(), organs.end(), rt) != organs.end()) out.emplace_back(name, rt);
    }
    return out;
  }
};

/// The 21 head-and-neck organs at risk.
inline Taxonomy default_taxonomy() {
  Taxonomy t;
  t.organs = {"Brain",          "Brainstem",      "Cochlea-Lt",       "Cochlea-Rt",
              "Lacrimal-Lt",    "Lacrimal-Rt",    "Lens-Lt",          "Lens-Rt",
              "Lung-Lt",        "Lung-Rt",        "Mandible",         "Optic-Nerve-Lt",
              "Optic-Nerve-Rt", "Orbit-Lt",       "Orbit-Rt",         "Parotid-Lt",
              "Parotid-Rt",     "Spinal-Canal",   "Spinal-Cord",      "Submandibular-Lt",
              "Submandibular-Rt"};
  t.lr_pairs = Taxonomy::pairs_by_suffix(t.organs);
  return t;
}

/// Per-organ masks on one shared grid. Channels may overlap.
class MultiOrganSegmentation {
 public:
  MultiOrganSegmentation(GridShape shape, Spacing spacing) : shape_(shape), spacing_(spacing) {}

  void set(const std::string& organ, Mask mask) {
    validate_compatible(shape_, spacing_, mask.shape(), mask.spacing());
    channels_.insert_or_assign(organ, std::move(mask));
  }

  const GridShape& shape() const { return shape_; }
  const Spacing& spacing() const { return spacing_; }
  const std::map<std::string, Mask>& channels() const { return channels_; }
  const Mask& channel(const std::string& organ) const {
    auto it = channels_.find(organ);
    if (it == channels_.end()) throw Error(ErrorCode::MissingOrgan, organ);
    return it->second;
  }
  bool has(const std::string& organ) const { return channels_.count(organ) != 0; }

  friend bool operator==(const MultiOrganSegmentation&, const MultiOrganSegmentation&) = default;

 private:
  GridShape shape_;
  Spacing spacing_;
  std::map<std::string, Mask> channels_;
};

/// Ground truth defined only on whole labelled slices.
class SparseLabels {
 public:
  /// Throws InvalidSparseLabels unless `labelled` is a union of full axis-aligned
  /// planes and `values` lies inside it.
  SparseLabels(Mask labelled, Mask values)
      : labelled_(std::move(labelled)), values_(std::move(values)) {
    validate_compatible(labelled_, values_);
    const auto& l = labelled_.data();
    const auto& v = values_.data();
    for (std::size_t i = 0; i < l.size(); ++i)
      if (v[i] && !l[i])
        throw Error(ErrorCode::InvalidSparseLabels, "foreground outside the labelled region");
    check_union_of_planes();
  }

  const Mask& labelled() const { return labelled_; }
  const Mask& values() const { return values_; }

  /// Labelled region covering the whole grid.
  static SparseLabels dense(const Mask& values) {
    return SparseLabels(Mask(values.shape(), values.spacing(), std::uint8_t{1}), values);
  }

 private:
  void check_union_of_planes() const {
    const auto& s = labelled_.shape();
    std::vector<std::size_t> per_x(s.nx, 0), per_y(s.ny, 0), per_z(s.nz, 0);
    for (std::size_t z = 0; z < s.nz; ++z)
      for (std::size_t y = 0; y < s.ny; ++y)
        for (std::size_t x = 0; x < s.nx; ++x)
          if (labelled_(x, y, z)) {
            ++per_x[x];
            ++per_y[y];
            ++per_z[z];
          }
    for (std::size_t z = 0; z < s.nz; ++z)
      for (std::size_t y = 0; y < s.ny; ++y)
        for (std::size_t x = 0; x < s.nx; ++x) {
          if (!labelled_(x, y, z)) continue;
          if (per_x[x] == s.ny * s.nz || per_y[y] == s.nx * s.nz || per_z[z] == s.nx * s.ny)
            continue;
          throw Error(ErrorCode::InvalidSparseLabels,
                      "labelled voxel (" + std::to_string(x) + "," + std::to_string(y) + "," +
                          std::to_string(z) + ") is not part of a fully labelled slice");
        }
  }

  Mask labelled_;
  Mask values_;
};

}  // namespace surfdice

#endif  // SURFDICE_GRID_HPP
