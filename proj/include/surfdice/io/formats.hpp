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

// JSON encodings of tolerance specs and augmentation configs.
//
// Tolerances:
//   {"organ_tolerances_mm": {"Brainstem": 2.5, ...},
//    "default_tau_mm": 3.0,                       (optional)
//    "percentile": 0.95, "weighting": "area",     (written by calibration)
//    "sample_counts": {...}, "provenance": [...]}
// Only "organ_tolerances_mm" and "default_tau_mm" are read back.

#ifndef SURFDICE_IO_FORMATS_HPP
#define SURFDICE_IO_FORMATS_HPP

#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "surfdice/calibrate.hpp"
#include "surfdice/io/manifest.hpp"
#include "surfdice/metrics.hpp"
#include "surfdice/perturb.hpp"

namespace surfdice::io {

inline nlohmann::json tolerances_to_json(const ToleranceSpec& spec) {
  nlohmann::json j;
  j["organ_tolerances_mm"] = nlohmann::json::object();
  for (const auto& [organ, tau] : spec.per_organ) j["organ_tolerances_mm"][organ] = tau;
  if (spec.default_tau) j["default_tau_mm"] = *spec.default_tau;
  return j;
}

inline nlohmann::json calibration_to_json(const CalibrationResult& r) {
  nlohmann::json j = tolerances_to_json(r.tolerances);
  j["percentile"] = r.percentile;
  j["weighting"] = r.weighting == PercentileWeighting::Area ? "area" : "unweighted";
  j["sample_counts"] = nlohmann::json::object();
  for (const auto& [organ, n] : r.sample_counts) j["sample_counts"][organ] = n;
  j["provenance"] = nlohmann::json::array();
  for (const auto& p : r.provenance)
    j["provenance"].push_back({{"organ", p.organ},
                               {"scan_id", p.scan_id},
                               {"observers", {p.observer_a, p.observer_b}},
                               {"samples", p.count}});
  j["warnings"] = r.warnings;
  return j;
}

inline ToleranceSpec tolerances_from_json(const nlohmann::json& j) {
  using detail::schema_error;
  if (!j.is_object()) schema_error("", "tolerance spec must be a JSON object");
  ToleranceSpec spec;
  const auto& organs = detail::require(j, "organ_tolerances_mm", "");
  if (!organs.is_object()) schema_error("/organ_tolerances_mm", "expected an object");
  for (const auto& [organ, tau] : organs.items()) {
    const std::string ptr = "/organ_tolerances_mm/" + detail::pointer_escape(organ);
    if (!tau.is_number()) schema_error(ptr, "expected a number");
    if (!(tau.get<double>() >= 0.0)) schema_error(ptr, "tolerance must be non-negative");
    spec.per_organ[organ] = tau.get<double>();
  }
  if (auto it = j.find("default_tau_mm"); it != j.end() && !it->is_null()) {
    if (!it->is_number() || !(it->get<double>() >= 0.0))
      schema_error("/default_tau_mm", "expected a non-negative number");
    spec.default_tau = it->get<double>();
  }
  return spec;
}

inline ToleranceSpec load_tolerances(const std::filesystem::path& path) {
  return tolerances_from_json(read_json_file(path));
}

inline nlohmann::json augmentation_to_json(const AugmentationConfig& c) {
  return {{"translation_px", c.translation_px},
          {"rotation_deg", c.rotation_deg},
          {"scale_min", c.scale_min},
          {"scale_max", c.scale_max},
          {"shear", c.shear},
          {"mirror_probability", c.mirror_probability},
          {"elastic_control_spacing_mm",
           {c.elastic_control_spacing_mm[0], c.elastic_control_spacing_mm[1],
            c.elastic_control_spacing_mm[2]}},
          {"elastic_sigma_mm", c.elastic_sigma_mm},
          {"noise_sigma_hu", c.noise_sigma_hu},
          {"seed", c.seed}};
}

/// Missing keys keep their defaults.
inline AugmentationConfig augmentation_from_json(const nlohmann::json& j) {
  using detail::schema_error;
  if (!j.is_object()) schema_error("", "augmentation config must be a JSON object");
  AugmentationConfig c;
  auto number = [&](const char* key, double& dest) {
    if (auto it = j.find(key); it != j.end()) {
      if (!it->is_number()) schema_error(std::string("/") + key, "expected a number");
      dest = it->get<double>();
    }
  };
  number("translation_px", c.translation_px);
  number("rotation_deg", c.rotation_deg);
  number("scale_min", c.scale_min);
  number("scale_max", c.scale_max);
  number("shear", c.shear);
  number("mirror_probability", c.mirror_probability);
  number("elastic_sigma_mm", c.elastic_sigma_mm);
  number("noise_sigma_hu", c.noise_sigma_hu);
  if (auto it = j.find("elastic_control_spacing_mm"); it != j.end()) {
    if (!it->is_array() || it->size() != 3)
      schema_error("/elastic_control_spacing_mm", "expected three numbers");
    for (std::size_t i = 0; i < 3; ++i) {
      if (!(*it)[i].is_number())
        schema_error("/elastic_control_spacing_mm/" + std::to_string(i), "expected a number");
      c.elastic_control_spacing_mm[i] = (*it)[i].get<double>();
    }
  }
  if (auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_unsigned()) schema_error("/seed", "expected a non-negative integer");
    c.seed = it->get<std::uint64_t>();
  }
  try {
    c.validate();
  } catch (const Error& e) {
    schema_error("", e.detail());
  }
  return c;
}

inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

}  // namespace surfdice::io

#endif  // SURFDICE_IO_FORMATS_HPP
