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

// Flat entry points for language bindings. Inputs are raw buffers and
// standard containers, outputs are plain records, and no library type crosses
// this boundary. Failures throw surfdice::Error; the binding layer maps
// error_code_name() onto its exception type.

#ifndef SURFDICE_API_HPP
#define SURFDICE_API_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "surfdice/batch.hpp"
#include "surfdice/calibrate.hpp"
#include "surfdice/grid.hpp"
#include "surfdice/io/report.hpp"
#include "surfdice/metrics.hpp"

namespace surfdice::api {

/// Memory order of a 3-axis buffer. Axis 0 always maps to x.
enum class Layout {
  FirstAxisFastest,  // Fortran order, the library's native order
  LastAxisFastest,   // C order, e.g. a default numpy array
};

struct ArrayMask {
  const std::uint8_t* data = nullptr;  // nonzero = foreground
  std::array<std::size_t, 3> dims{};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};  // mm per axis
  Layout layout = Layout::LastAxisFastest;
};

inline Mask to_mask(const ArrayMask& a) {
  const GridShape shape{a.dims[0], a.dims[1], a.dims[2]};
  const Spacing spacing{a.spacing[0], a.spacing[1], a.spacing[2]};
  if (!spacing.valid()) throw Error(ErrorCode::InvalidArgument, "spacing must be positive and finite");
  Mask m(shape, spacing);
  if (shape.count() == 0) return m;
  if (!a.data) throw Error(ErrorCode::InvalidArgument, "null buffer");
  auto& d = m.data();
  if (a.layout == Layout::FirstAxisFastest) {
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.data[i] != 0;
    return m;
  }
  std::size_t src = 0;
  for (std::size_t x = 0; x < shape.nx; ++x)
    for (std::size_t y = 0; y < shape.ny; ++y)
      for (std::size_t z = 0; z < shape.nz; ++z) d[shape.index(x, y, z)] = a.data[src++] != 0;
  return m;
}

struct SurfaceDscRecord {
  bool defined = false;
  double value = 0.0;  // meaningful only when defined
  double overlap_area_1_mm2 = 0.0;
  double overlap_area_2_mm2 = 0.0;
  double total_area_1_mm2 = 0.0;
  double total_area_2_mm2 = 0.0;
  double tau_mm = 0.0;
  double tau_quantized_mm = 0.0;
};

inline SurfaceDscRecord surface_dsc(const ArrayMask& a, const ArrayMask& b, double tau_mm) {
  const SurfaceDscBreakdown bd = surfdice::surface_dsc(to_mask(a), to_mask(b), tau_mm);
  return {bd.value.has_value(), bd.value.value_or(0.0), bd.overlap_area_1, bd.overlap_area_2,
          bd.total_area_1,      bd.total_area_2,        bd.tau,           bd.quantized_tau};
}

inline std::optional<double> volumetric_dsc(const ArrayMask& a, const ArrayMask& b) {
  return surfdice::volumetric_dsc(to_mask(a), to_mask(b));
}

struct SparseArrayCase {
  ArrayMask labelled;      // voxels carrying ground truth, whole planes only
  ArrayMask ground_truth;  // foreground inside `labelled`
  ArrayMask prediction;
};

inline std::optional<double> sparse_volumetric_dsc(const std::vector<SparseArrayCase>& cases) {
  std::vector<SparseLabels> labels;
  std::vector<Mask> predictions;
  labels.reserve(cases.size());
  predictions.reserve(cases.size());
  for (const auto& c : cases) {
    labels.emplace_back(to_mask(c.labelled), to_mask(c.ground_truth));
    predictions.push_back(to_mask(c.prediction));
  }
  std::vector<SparseCase> views;
  for (std::size_t i = 0; i < cases.size(); ++i) views.push_back({labels[i], predictions[i]});
  return surfdice::sparse_volumetric_dsc(views);
}

inline double quantize_tolerance(double tau_mm, const std::array<double, 3>& spacing) {
  return surfdice::quantize_tolerance(tau_mm, Spacing{spacing[0], spacing[1], spacing[2]});
}

/// observer id -> organ -> mask, one entry per scan.
using ArrayScan = std::map<std::string, std::map<std::string, ArrayMask>>;

struct CalibrationRecord {
  std::map<std::string, double> tolerances_mm;
  std::map<std::string, std::size_t> sample_counts;
  std::vector<std::string> warnings;
};

inline CalibrationRecord calibrate_tolerances(const std::vector<ArrayScan>& scans,
                                              double percentile = 0.95, bool unweighted = false) {
  std::vector<CalibrationScan> converted;
  for (std::size_t i = 0; i < scans.size(); ++i) {
    CalibrationScan scan{"scan" + std::to_string(i), {}};
    for (const auto& [observer, organs] : scans[i])
      for (const auto& [organ, mask] : organs) scan.observers[observer].emplace(organ, to_mask(mask));
    converted.push_back(std::move(scan));
  }
  const CalibrationResult r = calibrate_organ_tolerances(
      converted, percentile, unweighted ? PercentileWeighting::Unweighted : PercentileWeighting::Area);
  return {r.tolerances.per_organ, r.sample_counts, r.warnings};
}

/// One report row as CSV cells keyed by column name.
using ReportRecord = std::map<std::string, std::string>;

inline std::vector<std::string> report_columns() {
  std::vector<std::string> out;
  std::string cur;
  for (char c : io::kReportCsvHeader) {
    if (c == ',') out.push_back(std::move(cur)), cur.clear();
    else cur += c;
  }
  out.push_back(cur);
  return out;
}

/// Rows of `evaluate`'s report.csv, cell for cell. An empty `reference` picks
/// the first observer id in sorted order; empty `candidates` means all others.
inline std::vector<ReportRecord> evaluate_dataset(const std::string& manifest_path,
                                                  const std::string& tolerances_path,
                                                  std::string reference = {},
                                                  std::vector<std::string> candidates = {},
                                                  unsigned jobs = 1) {
  const io::DatasetManifest manifest = io::load_manifest(manifest_path);
  const ToleranceSpec tolerances = io::load_tolerances(tolerances_path);
  tolerances.validate();
  const auto observers = manifest.observers();
  if (reference.empty() && !observers.empty()) reference = *observers.begin();
  if (candidates.empty())
    for (const auto& o : observers)
      if (o != reference) candidates.push_back(o);
  const EvaluationOutcome outcome =
      surfdice::evaluate_dataset(manifest, tolerances, reference, candidates, jobs);

  const std::string csv = io::report_to_csv(outcome.report);
  const auto columns = report_columns();
  std::vector<ReportRecord> out;
  std::size_t start = csv.find('\n') + 1;
  for (std::size_t line_no = 2; start < csv.size(); ++line_no) {
    const std::size_t end = csv.find('\n', start);
    const auto cells = io::detail::split_csv_line(csv.substr(start, end - start), line_no);
    ReportRecord record;
    for (std::size_t i = 0; i < columns.size(); ++i) record[columns[i]] = cells[i];
    out.push_back(std::move(record));
    start = end + 1;
  }
  return out;
}

}  // namespace surfdice::api

#endif  // SURFDICE_API_HPP
