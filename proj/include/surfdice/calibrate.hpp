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

// Organ-specific tolerances from inter-observer variation: surface distances
// between every pair of observers are pooled per organ and the tolerance is a
// nearest-rank percentile of the pooled population.

#ifndef SURFDICE_CALIBRATE_HPP
#define SURFDICE_CALIBRATE_HPP

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "surfdice/distance.hpp"
#include "surfdice/metrics.hpp"
#include "surfdice/surface.hpp"

namespace surfdice {

struct WeightedDistance {
  double distance = 0.0;  // mm
  double weight = 0.0;    // mm^2 of surface carrying this distance

  friend bool operator==(const WeightedDistance&, const WeightedDistance&) = default;
};

struct SampleProvenance {
  std::string organ;
  std::string scan_id;
  std::string observer_a;
  std::string observer_b;
  std::size_t count = 0;
};

struct DistanceSampleSet {
  std::string organ;
  std::vector<WeightedDistance> samples;
  std::vector<SampleProvenance> provenance;
};

/// Distances from each surface element of `a` to the surface of `b`, then from
/// `b` to `a`, each weighted by its element area. Both masks must be non-empty.
inline std::vector<WeightedDistance> collect_interobserver_distances(const Mask& a, const Mask& b) {
  validate_compatible(a, b);
  const BoundingBox ba = bounding_box(a), bb = bounding_box(b);
  if (ba.empty || bb.empty)
    throw Error(ErrorCode::InvalidArgument, "inter-observer pair contains an empty mask");
  const BoundingBox box = union_box(ba, bb);
  const Mask ca = crop(a, box), cb = crop(b, box);
  const NeighborAreaTable table = build_area_table(a.spacing());
  const SurfaceElementList sa = extract_surface(ca, table);
  const SurfaceElementList sb = extract_surface(cb, table);
  const DistanceMap da = distance_transform(sa);
  const DistanceMap db = distance_transform(sb);

  std::vector<WeightedDistance> out;
  out.reserve(sa.elements.size() + sb.elements.size());
  for (const auto& [area, distance] : distances_to_other_surface(sa, db))
    out.push_back({distance, area});
  for (const auto& [area, distance] : distances_to_other_surface(sb, da))
    out.push_back({distance, area});
  return out;
}

enum class PercentileWeighting { Area, Unweighted };

/// Weighted nearest-rank percentile: the smallest distance whose cumulative
/// weight reaches q of the total. Unweighted mode gives every sample weight 1.
inline double tolerance_percentile(std::span<const WeightedDistance> samples, double q = 0.95,
                                   PercentileWeighting weighting = PercentileWeighting::Area) {
  if (samples.empty()) throw Error(ErrorCode::EmptySampleSet, "no distance samples");
  if (!(q > 0.0 && q <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "percentile fraction must lie in (0, 1]");
  std::vector<WeightedDistance> sorted(samples.begin(), samples.end());
  for (auto& s : sorted) {
    if (!(s.distance >= 0.0) || !std::isfinite(s.distance) || !(s.weight > 0.0))
      throw Error(ErrorCode::InvalidArgument, "samples need finite distances and positive weights");
    if (weighting == PercentileWeighting::Unweighted) s.weight = 1.0;
  }
  std::sort(sorted.begin(), sorted.end(), [](const WeightedDistance& x, const WeightedDistance& y) {
    return x.distance < y.distance || (x.distance == y.distance && x.weight < y.weight);
  });
  double total = 0.0;
  for (const auto& s : sorted) total += s.weight;
  // Guards against q * total landing one ulp above an exactly reachable sum.
  const double target = q * total * (1.0 - 1e-12);
  double cumulative = 0.0;
  for (const auto& s : sorted) {
    cumulative += s.weight;
    if (cumulative >= target) return s.distance;
  }
  return sorted.back().distance;
}

inline double tolerance_percentile(const DistanceSampleSet& set, double q = 0.95,
                                   PercentileWeighting weighting = PercentileWeighting::Area) {
  try {
    return tolerance_percentile(std::span<const WeightedDistance>(set.samples), q, weighting);
  } catch (const Error& e) {
    throw Error(e.code(), set.organ + ": " + e.detail());
  }
}

/// One scan segmented by several observers: observer id -> organ -> mask.
struct CalibrationScan {
  std::string scan_id;
  std::map<std::string, std::map<std::string, Mask>> observers;
};

struct CalibrationResult {
  ToleranceSpec tolerances;
  double percentile = 0.95;
  PercentileWeighting weighting = PercentileWeighting::Area;
  std::map<std::string, std::size_t> sample_counts;
  std::vector<SampleProvenance> provenance;
  std::vector<std::string> warnings;
};

/// Accumulates inter-observer distances scan by scan.
class ToleranceCalibrator {
 public:
  void add_pair(const std::string& scan_id, const std::string& organ,
                const std::string& observer_a, const Mask& a, const std::string& observer_b,
                const Mask& b) {
    if (is_empty(a) || is_empty(b)) {
      warnings_.push_back("scan " + scan_id + ", organ " + organ + ": skipped pair " +
                          observer_a + "/" + observer_b + " with an empty mask");
      return;
    }
    add_samples(scan_id, organ, observer_a, observer_b, collect_interobserver_distances(a, b));
  }

  /// Pools samples computed elsewhere, e.g. on a worker thread.
  void add_samples(const std::string& scan_id, const std::string& organ,
                   const std::string& observer_a, const std::string& observer_b,
                   const std::vector<WeightedDistance>& samples) {
    auto& set = sets_[organ];
    set.organ = organ;
    set.provenance.push_back({organ, scan_id, observer_a, observer_b, samples.size()});
    set.samples.insert(set.samples.end(), samples.begin(), samples.end());
  }

  /// Pools every observer pair (in observer-id order) for every organ of the scan.
  void add_scan(const CalibrationScan& scan) {
    std::map<std::string, std::vector<std::string>> observers_per_organ;
    for (const auto& [observer, organs] : scan.observers)
      for (const auto& [organ, mask] : organs) observers_per_organ[organ].push_back(observer);
    for (const auto& [organ, observers] : observers_per_organ) {
      if (observers.size() < 2) {
        warnings_.push_back("scan " + scan.scan_id + ", organ " + organ +
                            ": fewer than two observers");
        continue;
      }
      for (std::size_t i = 0; i < observers.size(); ++i)
        for (std::size_t j = i + 1; j < observers.size(); ++j)
          add_pair(scan.scan_id, organ, observers[i],
                   scan.observers.at(observers[i]).at(organ), observers[j],
                   scan.observers.at(observers[j]).at(organ));
    }
  }

  void note_organ(const std::string& organ) { seen_.insert(organ); }
  void warn(std::string message) { warnings_.push_back(std::move(message)); }

  const std::map<std::string, DistanceSampleSet>& sample_sets() const { return sets_; }

  CalibrationResult finish(double q = 0.95,
                           PercentileWeighting weighting = PercentileWeighting::Area) const {
    CalibrationResult result;
    result.percentile = q;
    result.weighting = weighting;
    result.warnings = warnings_;
    for (const auto& organ : seen_)
      if (!sets_.count(organ))
        result.warnings.push_back("organ " + organ + ": no valid observer pair, omitted");
    for (const auto& [organ, set] : sets_) {
      result.tolerances.per_organ[organ] = tolerance_percentile(set, q, weighting);
      result.sample_counts[organ] = set.samples.size();
      result.provenance.insert(result.provenance.end(), set.provenance.begin(),
                               set.provenance.end());
    }
    return result;
  }

 private:
  std::map<std::string, DistanceSampleSet> sets_;
  std::set<std::string> seen_;
  std::vector<std::string> warnings_;
};

inline CalibrationResult calibrate_organ_tolerances(
    std::span<const CalibrationScan> scans, double q = 0.95,
    PercentileWeighting weighting = PercentileWeighting::Area) {
  ToleranceCalibrator calibrator;
  for (const auto& scan : scans) {
    for (const auto& [observer, organs] : scan.observers)
      for (const auto& [organ, mask] : organs) calibrator.note_organ(organ);
    calibrator.add_scan(scan);
  }
  return calibrator.finish(q, weighting);
}

}  // namespace surfdice

#endif  // SURFDICE_CALIBRATE_HPP
