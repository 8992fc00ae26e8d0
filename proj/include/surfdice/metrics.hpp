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

#ifndef SURFDICE_METRICS_HPP
#define SURFDICE_METRICS_HPP

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "surfdice/distance.hpp"
#include "surfdice/grid.hpp"
#include "surfdice/surface.hpp"

namespace surfdice {

/// Organ-specific tolerances in mm.
struct ToleranceSpec {
  std::map<std::string, double> per_organ;
  std::optional<double> default_tau;

  std::optional<double> lookup(const std::string& organ) const {
    auto it = per_organ.find(organ);
    if (it != per_organ.end()) return it->second;
    return default_tau;
  }

  void validate() const {
    for (const auto& [organ, tau] : per_organ)
      if (!(tau >= 0.0) || !std::isfinite(tau))
        throw Error(ErrorCode::NegativeTolerance, organ + ": " + std::to_string(tau));
    if (default_tau && (!(*default_tau >= 0.0) || !std::isfinite(*default_tau)))
      throw Error(ErrorCode::NegativeTolerance, "default: " + std::to_string(*default_tau));
  }
};

// Distances and quantized tolerances are both members of the discrete set of
// inter-point distances but reach it through different summation orders, so
// the inclusive comparison carries a relative slack far below the gap between
// distinct set members.
inline constexpr double kThresholdRelativeSlack = 1e-9;

inline bool within_tolerance(double distance, double tau) {
  return distance <= tau * (1.0 + kThresholdRelativeSlack);
}

/// Rounds `tau` to the nearest achievable inter-voxel distance
/// sqrt((n1 dx)^2 + (n2 dy)^2 + (n3 dz)^2), n >= 0, searching up to
/// `max_radius` (default tau + 2 max(spacing)). Ties go to the smaller distance.
inline double quantize_tolerance(double tau, const Spacing& spacing,
                                 std::optional<double> max_radius = std::nullopt) {
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw Error(ErrorCode::NegativeTolerance, std::to_string(tau));
  if (!spacing.valid())
    throw Error(ErrorCode::InvalidArgument, "spacing must be strictly positive on every axis");
  double radius = max_radius.value_or(tau + 2.0 * spacing.max());
  radius = std::max(radius, tau + spacing.max());
  const double radius_sq = radius * radius;

  double best = 0.0;
  double best_gap = tau;
  auto consider = [&](double candidate) {
    const double gap = std::abs(candidate - tau);
    if (gap < best_gap || (gap == best_gap && candidate < best)) {
      best = candidate;
      best_gap = gap;
    }
  };

  const auto n1_max = static_cast<long>(std::floor(radius / spacing.dx));
  const auto n2_max = static_cast<long>(std::floor(radius / spacing.dy));
  for (long n1 = 0; n1 <= n1_max; ++n1) {
    const double a = static_cast<double>(n1) * spacing.dx;
    for (long n2 = 0; n2 <= n2_max; ++n2) {
      const double b = static_cast<double>(n2) * spacing.dy;
      const double planar = a * a + b * b;
      if (planar > radius_sq) break;
      // For fixed (n1, n2) the distance grows with n3, so only the two
      // integers around the exact solution can be nearest.
      const double rest = std::max(0.0, tau * tau - planar);
      const auto n3_lo = static_cast<long>(std::floor(std::sqrt(rest) / spacing.dz));
      for (long n3 = n3_lo; n3 <= n3_lo + 1; ++n3) {
        const double c = static_cast<double>(n3) * spacing.dz;
        const double sq = planar + c * c;
        if (sq > radius_sq) continue;
        consider(std::sqrt(sq));
      }
    }
  }
  return best;
}

/// 2|a n b| / (|a| + |b|); nullopt when both masks are empty.
inline std::optional<double> volumetric_dsc(const Mask& a, const Mask& b) {
  validate_compatible(a, b);
  std::size_t na = 0, nb = 0, both = 0;
  const auto& da = a.data();
  const auto& db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    const bool ia = da[i] != 0, ib = db[i] != 0;
    na += ia;
    nb += ib;
    both += ia && ib;
  }
  if (na + nb == 0) return std::nullopt;
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

struct SparseCase {
  const SparseLabels& ground_truth;
  const Mask& prediction;
};

/// Volumetric DSC estimated from sparse labels: restricted intersections and
/// volumes are summed over all cases before the division.
inline std::optional<double> sparse_volumetric_dsc(std::span<const SparseCase> cases) {
  double numerator = 0.0;
  double denominator = 0.0;
  for (std::size_t p = 0; p < cases.size(); ++p) {
    const auto& gt = cases[p].ground_truth;
    const auto& pred = cases[p].prediction;
    try {
      validate_compatible(gt.labelled(), pred);
    } catch (const Error& e) {
      throw Error(e.code(), "case " + std::to_string(p) + ": " + e.detail());
    }
    const auto& l = gt.labelled().data();
    const auto& v = gt.values().data();
    const auto& m = pred.data();
    std::size_t n1 = 0, n2 = 0, both = 0;
    for (std::size_t i = 0; i < l.size(); ++i) {
      if (!l[i]) continue;
      const bool i1 = v[i] != 0, i2 = m[i] != 0;
      n1 += i1;
      n2 += i2;
      both += i1 && i2;
    }
    const double voxel = pred.spacing().voxel_volume();
    numerator += 2.0 * static_cast<double>(both) * voxel;
    denominator += static_cast<double>(n1 + n2) * voxel;
  }
  if (denominator == 0.0) return std::nullopt;
  return numerator / denominator;
}

struct SurfaceDscBreakdown {
  double overlap_area_1 = 0.0;  // area of surface 1 within tolerance of surface 2
  double overlap_area_2 = 0.0;
  double total_area_1 = 0.0;
  double total_area_2 = 0.0;
  double tau = 0.0;            // requested, mm
  double quantized_tau = 0.0;  // applied, mm
  std::optional<double> value;
};

/// Surface overlap at tolerance `tau` (quantized for this grid's spacing).
/// Both masks empty yields an undefined value; one empty yields 0.
inline SurfaceDscBreakdown surface_dsc(const Mask& a, const Mask& b, double tau) {
  validate_compatible(a, b);
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw Error(ErrorCode::NegativeTolerance, std::to_string(tau));

  SurfaceDscBreakdown out;
  out.tau = tau;
  out.quantized_tau = quantize_tolerance(tau, a.spacing());

  const BoundingBox box = union_box(bounding_box(a), bounding_box(b));
  if (box.empty) return out;

  const Mask ca = crop(a, box);
  const Mask cb = crop(b, box);
  const NeighborAreaTable table = build_area_table(a.spacing());
  const SurfaceElementList sa = extract_surface(ca, table);
  const SurfaceElementList sb = extract_surface(cb, table);
  out.total_area_1 = sa.total_area;
  out.total_area_2 = sb.total_area;

  if (!sa.empty() && !sb.empty()) {
    const DistanceMap da = distance_transform(sa);
    const DistanceMap db = distance_transform(sb);
    for (const auto& [area, distance] : distances_to_other_surface(sa, db))
      if (within_tolerance(distance, out.quantized_tau)) out.overlap_area_1 += area;
    for (const auto& [area, distance] : distances_to_other_surface(sb, da))
      if (within_tolerance(distance, out.quantized_tau)) out.overlap_area_2 += area;
  }
  const double total = out.total_area_1 + out.total_area_2;
  if (total > 0.0) out.value = (out.overlap_area_1 + out.overlap_area_2) / total;
  return out;
}

/// Per-patient surface DSC: overlaps and totals are summed over the relevant
/// organs before dividing.
inline std::optional<double> aggregate_surface_dsc(
    const std::map<std::string, SurfaceDscBreakdown>& breakdowns,
    std::span<const std::string> relevant) {
  double overlap = 0.0;
  double total = 0.0;
  for (const auto& organ : relevant) {
    auto it = breakdowns.find(organ);
    if (it == breakdowns.end()) throw Error(ErrorCode::MissingOrgan, organ);
    overlap += it->second.overlap_area_1 + it->second.overlap_area_2;
    total += it->second.total_area_1 + it->second.total_area_2;
  }
  if (total == 0.0) return std::nullopt;
  return overlap / total;
}

}  // namespace surfdice

#endif  // SURFDICE_METRICS_HPP
