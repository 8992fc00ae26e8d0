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

// Batch drivers behind the command-line tool. Each command takes a RunConfig
// and two streams and returns the process exit code:
//   0  success
//   1  configuration, manifest, tolerance or report load failure
//   2  at least one per-case error; the run still completes
// Errors are written to `err` one per line as "error: <context>: <code>: <detail>".

#ifndef SURFDICE_BATCH_HPP
#define SURFDICE_BATCH_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "surfdice/calibrate.hpp"
#include "surfdice/io/formats.hpp"
#include "surfdice/io/manifest.hpp"
#include "surfdice/io/nifti.hpp"
#include "surfdice/io/report.hpp"
#include "surfdice/metrics.hpp"
#include "surfdice/perturb.hpp"
#include "surfdice/random.hpp"

namespace surfdice {

inline constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  std::filesystem::path manifest;
  std::optional<std::filesystem::path> tolerances;
  std::optional<double> default_tau_mm;
  std::string reference;
  std::vector<std::string> candidates;
  std::filesystem::path out;
  io::ReportFormat format = io::ReportFormat::Csv;
  unsigned jobs = 1;
  std::uint64_t seed = 0;
  bool unweighted_percentile = false;
  MaskWarp mask_warp = MaskWarp::Linear;
  // perturb
  std::int64_t max_shift_voxels = 4;
  std::size_t augment_samples = 3;
  std::optional<std::filesystem::path> augmentation;
  // table
  std::filesystem::path report;

  void validate() const {
    if (jobs < 1) throw Error(ErrorCode::InvalidArgument, "--jobs must be at least 1");
    for (const auto& c : candidates)
      if (c == reference)
        throw Error(ErrorCode::InvalidArgument, "candidate \"" + c + "\" equals the reference");
    if (default_tau_mm && !(*default_tau_mm >= 0.0))
      throw Error(ErrorCode::NegativeTolerance, "--default-tau-mm must be non-negative");
    if (max_shift_voxels < 0) throw Error(ErrorCode::InvalidArgument, "--max-shift must be non-negative");
  }
};

namespace detail {

/// Runs fn(0..n-1) on `jobs` threads. Each index runs exactly once.
inline void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, jobs), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> failures(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < n; i = next++) fn(i);
      } catch (...) {
        failures[w] = std::current_exception();
        next = n;
      }
    });
  for (auto& t : pool) t.join();
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);
}

inline std::string describe_exception(const std::exception& e) {
  if (auto* se = dynamic_cast<const Error*>(&e))
    return std::string(error_code_name(se->code())) + ": " + se->detail();
  return std::string("internal: ") + e.what();
}

inline std::string error_flag(const std::exception& e) {
  if (auto* se = dynamic_cast<const Error*>(&e))
    return std::string(io::flag::kError) + "=" + std::string(error_code_name(se->code()));
  return std::string(io::flag::kError) + "=internal";
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::optional<std::filesystem::path> mask_path(const io::PatientEntry& p,
                                                      const std::string& observer,
                                                      const std::string& organ) {
  auto it = p.segmentations.find(observer);
  if (it == p.segmentations.end()) return std::nullopt;
  auto jt = it->second.find(organ);
  if (jt == it->second.end()) return std::nullopt;
  return jt->second;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// evaluate

struct EvaluationOutcome {
  io::EvaluationReport report;
  std::vector<std::string> errors;  // one line each, already sorted by task
};

/// Reference vs each candidate for every organ either of them segmented, plus
/// one aggregate row per (patient, scan, pair).
inline EvaluationOutcome evaluate_dataset(const io::DatasetManifest& manifest,
                                          const ToleranceSpec& tolerances,
                                          const std::string& reference,
                                          const std::vector<std::string>& candidates,
                                          unsigned jobs = 1) {
  struct Task {
    std::size_t patient;
    std::string organ;
    std::string candidate;
  };
  std::vector<Task> tasks;
  for (std::size_t p = 0; p < manifest.patients.size(); ++p) {
    const auto& entry = manifest.patients[p];
    for (const auto& cand : candidates) {
      std::set<std::string> organs;
      for (const auto& observer : {reference, cand})
        if (auto it = entry.segmentations.find(observer); it != entry.segmentations.end())
          for (const auto& [organ, path] : it->second) organs.insert(organ);
      for (const auto& organ : organs) tasks.push_back({p, organ, cand});
    }
  }

  struct Result {
    io::ReportRow row;
    std::optional<SurfaceDscBreakdown> breakdown;
    std::string error;
  };
  std::vector<Result> results(tasks.size());

  detail::parallel_for(tasks.size(), jobs, [&](std::size_t i) {
    const Task& t = tasks[i];
    const auto& entry = manifest.patients[t.patient];
    Result& res = results[i];
    io::ReportRow& row = res.row;
    row.patient = entry.patient_id;
    row.scan = entry.scan_id;
    row.organ = t.organ;
    row.pair = reference + ":" + t.candidate;
    const std::string context =
        entry.patient_id + "/" + entry.scan_id + " " + t.organ + " " + row.pair;
    const auto ref_path = detail::mask_path(entry, reference, t.organ);
    const auto cand_path = detail::mask_path(entry, t.candidate, t.organ);
    if (!ref_path || !cand_path) {
      const bool ref_missing = !ref_path;
      row.flags.emplace_back(ref_missing ? io::flag::kMissingReference : io::flag::kMissingCandidate);
      res.error = context + ": " + std::string(error_code_name(ErrorCode::MissingOrgan)) + ": no " +
                  (ref_missing ? "reference" : "candidate") + " mask";
      return;
    }
    try {
      const auto tau = tolerances.lookup(t.organ);
      row.tau_mm = tau;
      if (!tau) throw Error(ErrorCode::MissingOrgan, "no tolerance for organ " + t.organ);
      const Mask a = io::read_nifti_mask(*ref_path);
      const Mask b = io::read_nifti_mask(*cand_path);
      const SurfaceDscBreakdown bd = surface_dsc(a, b, *tau);
      row.surface_dsc = bd.value;
      row.tau_quantized_mm = bd.quantized_tau;
      row.volumetric_dsc = volumetric_dsc(a, b);
      row.overlap_area_1_mm2 = bd.overlap_area_1;
      row.overlap_area_2_mm2 = bd.overlap_area_2;
      row.total_area_1_mm2 = bd.total_area_1;
      row.total_area_2_mm2 = bd.total_area_2;
      row.volume_1_mm3 = mask_volume(a);
      row.volume_2_mm3 = mask_volume(b);
      const bool ea = is_empty(a), eb = is_empty(b);
      if (ea && eb) row.flags.emplace_back(io::flag::kUndefined);
      else if (ea) row.flags.emplace_back(io::flag::kEmptyReference);
      else if (eb) row.flags.emplace_back(io::flag::kEmptyCandidate);
      res.breakdown = bd;
    } catch (const std::exception& e) {
      row.flags.push_back(detail::error_flag(e));
      res.error = context + ": " + detail::describe_exception(e);
    }
  });

  EvaluationOutcome out;
  // (patient index, candidate) -> organ -> breakdown
  std::map<std::pair<std::size_t, std::string>, std::map<std::string, Result*>> by_case;
  for (std::size_t i = 0; i < tasks.size(); ++i)
    by_case[{tasks[i].patient, tasks[i].candidate}][tasks[i].organ] = &results[i];

  for (const auto& [key, organs] : by_case) {
    const auto& entry = manifest.patients[key.first];
    const auto relevant = manifest.relevant_for(entry);
    const std::set<std::string> relevant_set(relevant.begin(), relevant.end());
    for (const auto& [organ, res] : organs)
      if (!relevant_set.count(organ))
        res->row.flags.emplace_back(io::flag::kNotRelevant);

    io::ReportRow agg;
    agg.patient = entry.patient_id;
    agg.scan = entry.scan_id;
    agg.organ = std::string(io::kAggregateOrgan);
    agg.pair = reference + ":" + key.second;
    agg.flags.emplace_back(io::flag::kAggregate);
    agg.flags.push_back("organs=" + std::to_string(relevant.size()));
    std::map<std::string, SurfaceDscBreakdown> breakdowns;
    bool complete = true;
    for (const auto& organ : relevant) {
      auto it = organs.find(organ);
      if (it == organs.end()) {
        complete = false;
        out.errors.push_back(entry.patient_id + "/" + entry.scan_id + " " + organ + " " + agg.pair +
                             ": " + std::string(error_code_name(ErrorCode::MissingOrgan)) +
                             ": relevant organ has no masks");
      } else if (!it->second->breakdown) {
        complete = false;
      } else {
        breakdowns[organ] = *it->second->breakdown;
      }
    }
    if (complete) {
      agg.surface_dsc = aggregate_surface_dsc(breakdowns, relevant);
      double o1 = 0, o2 = 0, t1 = 0, t2 = 0;
      for (const auto& [organ, bd] : breakdowns) {
        o1 += bd.overlap_area_1;
        o2 += bd.overlap_area_2;
        t1 += bd.total_area_1;
        t2 += bd.total_area_2;
      }
      agg.overlap_area_1_mm2 = o1;
      agg.overlap_area_2_mm2 = o2;
      agg.total_area_1_mm2 = t1;
      agg.total_area_2_mm2 = t2;
    } else {
      agg.flags.emplace_back("incomplete");
    }
    out.report.rows.push_back(std::move(agg));
  }

  std::vector<std::pair<io::ReportRow, std::string>> rows;
  for (auto& r : results) rows.emplace_back(std::move(r.row), std::move(r.error));
  for (auto& [row, error] : rows) {
    if (!error.empty()) out.errors.push_back(error);
    out.report.rows.push_back(std::move(row));
  }
  out.report.sort();
  std::sort(out.errors.begin(), out.errors.end());
  return out;
}

namespace detail {

inline ToleranceSpec load_tolerance_config(const RunConfig& config) {
  ToleranceSpec spec;
  if (config.tolerances) spec = io::load_tolerances(*config.tolerances);
  if (config.default_tau_mm) spec.default_tau = config.default_tau_mm;
  spec.validate();
  return spec;
}

inline void report_errors(std::ostream& err, const std::vector<std::string>& errors) {
  for (const auto& e : errors) err << "error: " << e << '\n';
}

}  // namespace detail

inline int cmd_evaluate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  const std::string started_at = detail::utc_timestamp();
  io::DatasetManifest manifest;
  ToleranceSpec tolerances;
  std::vector<std::string> candidates = config.candidates;
  try {
    config.validate();
    if (config.reference.empty()) throw Error(ErrorCode::InvalidArgument, "--reference is required");
    manifest = io::load_manifest(config.manifest);
    tolerances = detail::load_tolerance_config(config);
    if (candidates.empty())
      for (const auto& o : manifest.observers())
        if (o != config.reference) candidates.push_back(o);
    if (candidates.empty()) throw Error(ErrorCode::InvalidArgument, "no candidate observers");
    std::filesystem::create_directories(config.out);
  } catch (const std::exception& e) {
    err << "error: setup: " << detail::describe_exception(e) << '\n';
    return 1;
  }

  EvaluationOutcome outcome;
  try {
    outcome = evaluate_dataset(manifest, tolerances, config.reference, candidates, config.jobs);
    io::write_report(outcome.report, io::ReportFormat::Csv, config.out / "report.csv");
    if (config.format == io::ReportFormat::Markdown)
      io::write_report(outcome.report, io::ReportFormat::Markdown, config.out / "report.md");
  } catch (const std::exception& e) {
    err << "error: evaluate: " << detail::describe_exception(e) << '\n';
    return 1;
  }
  detail::report_errors(err, outcome.errors);

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  nlohmann::json sidecar = {{"tool", "surfdice"},
                            {"version", kVersion},
                            {"command", "evaluate"},
                            {"started_at", started_at},
                            {"wall_seconds", seconds},
                            {"manifest", config.manifest.string()},
                            {"reference", config.reference},
                            {"candidates", candidates},
                            {"jobs", config.jobs},
                            {"tolerances", io::tolerances_to_json(tolerances)},
                            {"rows", outcome.report.rows.size()},
                            {"errors", outcome.errors}};
  try {
    io::write_json_file(config.out / "run.json", sidecar);
  } catch (const std::exception& e) {
    err << "error: sidecar: " << detail::describe_exception(e) << '\n';
    return 1;
  }
  out << "wrote " << (config.out / "report.csv").string() << " (" << outcome.report.rows.size()
      << " rows, " << outcome.errors.size() << " errors)\n";
  return outcome.errors.empty() ? 0 : 2;
}

// ---------------------------------------------------------------------------
// calibrate

struct CalibrationOutcome {
  CalibrationResult result;
  std::vector<std::string> errors;
};

/// Pools every observer pair of every scan, organ by organ.
inline CalibrationOutcome calibrate_dataset(const io::DatasetManifest& manifest, double q,
                                            PercentileWeighting weighting, unsigned jobs = 1) {
  struct Task {
    std::size_t patient;
    std::string organ;
    std::string a, b;
  };
  std::vector<Task> tasks;
  ToleranceCalibrator calibrator;
  for (std::size_t p = 0; p < manifest.patients.size(); ++p) {
    const auto& entry = manifest.patients[p];
    std::map<std::string, std::vector<std::string>> observers_per_organ;
    for (const auto& [observer, organs] : entry.segmentations)
      for (const auto& [organ, path] : organs) {
        observers_per_organ[organ].push_back(observer);
        calibrator.note_organ(organ);
      }
    for (const auto& [organ, observers] : observers_per_organ) {
      if (observers.size() < 2) {
        calibrator.warn("scan " + entry.scan_id + ", organ " + organ + ": fewer than two observers");
        continue;
      }
      for (std::size_t i = 0; i < observers.size(); ++i)
        for (std::size_t j = i + 1; j < observers.size(); ++j)
          tasks.push_back({p, organ, observers[i], observers[j]});
    }
  }

  struct Result {
    std::vector<WeightedDistance> samples;
    std::string warning;
    std::string error;
  };
  std::vector<Result> results(tasks.size());
  detail::parallel_for(tasks.size(), jobs, [&](std::size_t i) {
    const Task& t = tasks[i];
    const auto& entry = manifest.patients[t.patient];
    try {
      const Mask a = io::read_nifti_mask(entry.segmentations.at(t.a).at(t.organ));
      const Mask b = io::read_nifti_mask(entry.segmentations.at(t.b).at(t.organ));
      if (is_empty(a) || is_empty(b)) {
        results[i].warning = "scan " + entry.scan_id + ", organ " + t.organ + ": skipped pair " +
                             t.a + "/" + t.b + " with an empty mask";
        return;
      }
      results[i].samples = collect_interobserver_distances(a, b);
    } catch (const std::exception& e) {
      results[i].error = entry.patient_id + "/" + entry.scan_id + " " + t.organ + " " + t.a + ":" +
                         t.b + ": " + detail::describe_exception(e);
    }
  });

  CalibrationOutcome out;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& r = results[i];
    if (!r.error.empty()) out.errors.push_back(r.error);
    else if (!r.warning.empty()) calibrator.warn(r.warning);
    else
      calibrator.add_samples(manifest.patients[tasks[i].patient].scan_id, tasks[i].organ,
                             tasks[i].a, tasks[i].b, r.samples);
  }
  out.result = calibrator.finish(q, weighting);
  return out;
}

inline int cmd_calibrate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  io::DatasetManifest manifest;
  try {
    config.validate();
    manifest = io::load_manifest(config.manifest);
    if (manifest.observers().size() < 2)
      throw Error(ErrorCode::InvalidArgument, "calibration needs at least two observers");
    std::filesystem::create_directories(config.out);
  } catch (const std::exception& e) {
    err << "error: setup: " << detail::describe_exception(e) << '\n';
    return 1;
  }
  CalibrationOutcome outcome;
  try {
    outcome = calibrate_dataset(manifest, 0.95,
                                config.unweighted_percentile ? PercentileWeighting::Unweighted
                                                             : PercentileWeighting::Area,
                                config.jobs);
    io::write_json_file(config.out / "tolerances.json", io::calibration_to_json(outcome.result));
  } catch (const std::exception& e) {
    err << "error: calibrate: " << detail::describe_exception(e) << '\n';
    return 1;
  }
  for (const auto& w : outcome.result.warnings) err << "warning: " << w << '\n';
  detail::report_errors(err, outcome.errors);
  out << "organ\ttau_mm\tsamples\n";
  for (const auto& [organ, tau] : outcome.result.tolerances.per_organ) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", tau);
    out << organ << '\t' << buf << '\t' << outcome.result.sample_counts.at(organ) << '\n';
  }
  return outcome.errors.empty() ? 0 : 2;
}

// ---------------------------------------------------------------------------
// perturb

inline constexpr std::string_view kSensitivityCsvHeader =
    "patient,scan,organ,perturbation,magnitude,magnitude_mm,tau_mm,tau_quantized_mm,surface_dsc,"
    "volumetric_dsc,flags";

struct SensitivityRow {
  std::string patient;
  std::string scan;
  std::string organ;
  std::string perturbation;  // translate-x, mirror-swap, augment
  std::optional<double> magnitude;     // voxels for translations, sample index for augment
  std::optional<double> magnitude_mm;  // shift, or mean displacement over the mask
  std::optional<double> tau_mm;
  std::optional<double> tau_quantized_mm;
  std::optional<double> surface_dsc;
  std::optional<double> volumetric_dsc;
  std::vector<std::string> flags;
};

inline std::string sensitivity_to_csv(const std::vector<SensitivityRow>& rows) {
  using io::detail::format_fixed;
  std::string out(kSensitivityCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += io::detail::csv_field(r.patient) + ',' + io::detail::csv_field(r.scan) + ',' +
           io::detail::csv_field(r.organ) + ',' + r.perturbation + ',';
    out += format_fixed(r.magnitude, 0) + ',' + format_fixed(r.magnitude_mm, 6) + ',' +
           format_fixed(r.tau_mm, 6) + ',' + format_fixed(r.tau_quantized_mm, 6) + ',' +
           format_fixed(r.surface_dsc, 9) + ',' + format_fixed(r.volumetric_dsc, 9) + ',' +
           io::detail::csv_field(io::detail::join_flags(r.flags)) + '\n';
  }
  return out;
}

struct SensitivityOptions {
  std::int64_t max_shift_voxels = 4;
  std::size_t augment_samples = 3;
  AugmentationConfig augmentation;  // its seed is the base seed
  MaskWarp mask_warp = MaskWarp::Linear;
};

/// Mean displacement length over the foreground of `m`, in mm.
inline double mean_displacement(const DeformationField& f, const Mask& m) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < m.data().size(); ++i) {
    if (!m.data()[i]) continue;
    const auto& d = f.displacement[i];
    sum += std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    ++n;
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

/// Perturbed-vs-original rows for one organ of one scan's reference masks.
/// Augmentation samples use the geometric part of the pipeline only (affine
/// composed with elastic, no mirroring); sample s draws from seed
/// splitmix64(base seed + s).
inline std::vector<SensitivityRow> organ_sensitivity(const io::PatientEntry& entry,
                                                     const std::string& organ, const Mask& mask,
                                                     const std::optional<Mask>& partner_mask,
                                                     const std::optional<std::string>& partner,
                                                     double tau, const SensitivityOptions& opt) {
  std::vector<SensitivityRow> rows;
  auto evaluate = [&](const Mask& perturbed, const Mask& original, std::string kind,
                      std::optional<double> magnitude, std::optional<double> magnitude_mm) {
    SensitivityRow r{entry.patient_id, entry.scan_id, organ, std::move(kind), magnitude,
                     magnitude_mm};
    const auto bd = surface_dsc(original, perturbed, tau);
    r.tau_mm = tau;
    r.tau_quantized_mm = bd.quantized_tau;
    r.surface_dsc = bd.value;
    r.volumetric_dsc = volumetric_dsc(original, perturbed);
    if (!bd.value) r.flags.emplace_back(io::flag::kUndefined);
    rows.push_back(std::move(r));
  };
  for (std::int64_t k = 0; k <= opt.max_shift_voxels; ++k)
    evaluate(shift_mask(mask, k, 0, 0), mask, "translate-x", static_cast<double>(k),
             static_cast<double>(k) * mask.spacing().dx);
  // The mirrored partner should land on this organ for a symmetric anatomy.
  if (partner && partner_mask)
    evaluate(mirror_x(*partner_mask), mask, "mirror-swap", std::nullopt, std::nullopt);
  for (std::size_t s = 0; s < opt.augment_samples; ++s) {
    AugmentationConfig c = opt.augmentation;
    c.seed = splitmix64(opt.augmentation.seed + s);
    const DeformationField field =
        compose_fields(affine_field(sample_affine(c, c.seed), mask.shape(), mask.spacing()),
                       elastic_field(c, mask.shape(), mask.spacing(), c.seed));
    evaluate(warp_mask(mask, field, opt.mask_warp), mask, "augment", static_cast<double>(s),
             mean_displacement(field, mask));
  }
  return rows;
}

inline int cmd_perturb(const RunConfig& config, std::ostream& out, std::ostream& err) {
  io::DatasetManifest manifest;
  ToleranceSpec tolerances;
  SensitivityOptions opt;
  try {
    config.validate();
    if (config.reference.empty()) throw Error(ErrorCode::InvalidArgument, "--reference is required");
    manifest = io::load_manifest(config.manifest);
    tolerances = detail::load_tolerance_config(config);
    if (config.augmentation)
      opt.augmentation = io::augmentation_from_json(io::read_json_file(*config.augmentation));
    opt.augmentation.seed = config.seed;
    opt.max_shift_voxels = config.max_shift_voxels;
    opt.augment_samples = config.augment_samples;
    opt.mask_warp = config.mask_warp;
    std::filesystem::create_directories(config.out);
  } catch (const std::exception& e) {
    err << "error: setup: " << detail::describe_exception(e) << '\n';
    return 1;
  }

  struct Task {
    std::size_t patient;
    std::string organ;
  };
  std::vector<Task> tasks;
  for (std::size_t p = 0; p < manifest.patients.size(); ++p)
    if (auto it = manifest.patients[p].segmentations.find(config.reference);
        it != manifest.patients[p].segmentations.end())
      for (const auto& [organ, path] : it->second) tasks.push_back({p, organ});

  struct Result {
    std::vector<SensitivityRow> rows;
    std::string error;
  };
  std::vector<Result> results(tasks.size());
  detail::parallel_for(tasks.size(), config.jobs, [&](std::size_t i) {
    const auto& entry = manifest.patients[tasks[i].patient];
    const std::string& organ = tasks[i].organ;
    try {
      const auto tau = tolerances.lookup(organ);
      if (!tau) throw Error(ErrorCode::MissingOrgan, "no tolerance for organ " + organ);
      const Mask mask = io::read_nifti_mask(*detail::mask_path(entry, config.reference, organ));
      const auto partner = manifest.taxonomy.partner(organ);
      std::optional<Mask> partner_mask;
      if (partner)
        if (auto path = detail::mask_path(entry, config.reference, *partner))
          partner_mask = io::read_nifti_mask(*path);
      results[i].rows = organ_sensitivity(entry, organ, mask, partner_mask, partner, *tau, opt);
    } catch (const std::exception& e) {
      results[i].error = entry.patient_id + "/" + entry.scan_id + " " + organ + ": " +
                         detail::describe_exception(e);
    }
  });

  std::vector<SensitivityRow> rows;
  std::vector<std::string> errors;
  for (auto& r : results) {
    if (!r.error.empty()) errors.push_back(r.error);
    rows.insert(rows.end(), r.rows.begin(), r.rows.end());
  }
  try {
    io::write_text_file(config.out / "sensitivity.csv", sensitivity_to_csv(rows));
  } catch (const std::exception& e) {
    err << "error: perturb: " << detail::describe_exception(e) << '\n';
    return 1;
  }
  detail::report_errors(err, errors);
  out << "wrote " << (config.out / "sensitivity.csv").string() << " (" << rows.size()
      << " rows)\n";
  return errors.empty() ? 0 : 2;
}

// ---------------------------------------------------------------------------
// table

/// Prints the per-organ summary of a CSV report, or writes it to `config.out`
/// when that is set.
inline int cmd_table(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const io::EvaluationReport report = io::read_report(config.report);
    const io::ReportSummary summary = io::summarize(report);
    const std::string text = config.format == io::ReportFormat::Csv
                                 ? io::summary_to_csv(summary)
                                 : io::summary_to_markdown(summary);
    if (config.out.empty()) out << text;
    else io::write_text_file(config.out, text);
  } catch (const std::exception& e) {
    err << "error: table: " << detail::describe_exception(e) << '\n';
    return 1;
  }
  return 0;
}

}  // namespace surfdice

#endif  // SURFDICE_BATCH_HPP
