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

// Dataset manifest.
//
//   {
//     "taxonomy": {"organs": ["Brainstem", "Parotid-Lt", "Parotid-Rt"],
//                  "lr_pairs": [["Parotid-Lt", "Parotid-Rt"]]},
//     "patients": [
//       {"patient_id": "p01", "scan_id": "s01", "ct_path": "p01/ct.nii.gz",
//        "segmentations": {"oncologist": {"Brainstem": "p01/gt/Brainstem.nii.gz"},
//                          "model":      {"Brainstem": "p01/model/Brainstem.nii.gz"}}}
//     ],
//     "relevant_organs": {"p01": ["Brainstem"]}
//   }
//
// "taxonomy" defaults to the 21 head-and-neck organs; "lr_pairs" defaults to
// pairing "<x>-Lt" with "<x>-Rt". Relative paths resolve against the
// manifest's directory. A patient missing from "relevant_organs" counts every
// organ that any observer segmented for it.

#ifndef SURFDICE_IO_MANIFEST_HPP
#define SURFDICE_IO_MANIFEST_HPP

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "surfdice/grid.hpp"

namespace surfdice::io {

struct PatientEntry {
  std::string patient_id;
  std::string scan_id;
  std::optional<std::filesystem::path> ct_path;
  // observer id -> organ -> mask path
  std::map<std::string, std::map<std::string, std::filesystem::path>> segmentations;

  std::vector<std::string> organs() const {
    std::set<std::string> all;
    for (const auto& [observer, organs] : segmentations)
      for (const auto& [organ, path] : organs) all.insert(organ);
    return {all.begin(), all.end()};
  }
};

struct DatasetManifest {
  Taxonomy taxonomy;
  std::vector<PatientEntry> patients;
  std::map<std::string, std::vector<std::string>> relevant_organs;

  /// Explicit subset if given, else every organ present for the patient.
  std::vector<std::string> relevant_for(const PatientEntry& patient) const {
    auto it = relevant_organs.find(patient.patient_id);
    if (it != relevant_organs.end()) return it->second;
    return patient.organs();
  }

  std::set<std::string> observers() const {
    std::set<std::string> out;
    for (const auto& p : patients)
      for (const auto& [observer, organs] : p.segmentations) out.insert(observer);
    return out;
  }
};

namespace detail {

inline std::string pointer_escape(const std::string& token) {
  std::string out;
  for (char c : token) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

[[noreturn]] inline void schema_error(const std::string& pointer, const std::string& what) {
  throw Error(ErrorCode::Schema, (pointer.empty() ? std::string("/") : pointer) + ": " + what);
}

inline const nlohmann::json& require(const nlohmann::json& obj, const std::string& key,
                                     const std::string& pointer) {
  if (!obj.is_object()) schema_error(pointer, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(pointer, "missing required key \"" + key + "\"");
  return *it;
}

inline std::string require_string(const nlohmann::json& v, const std::string& pointer) {
  if (!v.is_string() || v.get<std::string>().empty()) schema_error(pointer, "expected a non-empty string");
  return v.get<std::string>();
}

}  // namespace detail

inline DatasetManifest parse_manifest(const nlohmann::json& doc,
                                      const std::filesystem::path& base_dir) {
  using detail::pointer_escape;
  using detail::require_string;
  using detail::schema_error;
  if (!doc.is_object()) schema_error("", "manifest must be a JSON object");

  DatasetManifest m;
  if (auto it = doc.find("taxonomy"); it != doc.end()) {
    const auto& organs = detail::require(*it, "organs", "/taxonomy");
    if (!organs.is_array()) schema_error("/taxonomy/organs", "expected an array");
    for (std::size_t i = 0; i < organs.size(); ++i) {
      const std::string name = require_string(organs[i], "/taxonomy/organs/" + std::to_string(i));
      if (m.taxonomy.contains(name))
        schema_error("/taxonomy/organs/" + std::to_string(i), "duplicate organ \"" + name + "\"");
      m.taxonomy.organs.push_back(name);
    }
    if (auto pit = it->find("lr_pairs"); pit != it->end()) {
      if (!pit->is_array()) schema_error("/taxonomy/lr_pairs", "expected an array");
      for (std::size_t i = 0; i < pit->size(); ++i) {
        const std::string ptr = "/taxonomy/lr_pairs/" + std::to_string(i);
        const auto& pair = (*pit)[i];
        if (!pair.is_array() || pair.size() != 2) schema_error(ptr, "expected [left, right]");
        const std::string lt = require_string(pair[0], ptr + "/0");
        const std::string rt = require_string(pair[1], ptr + "/1");
        for (const auto& name : {lt, rt})
          if (!m.taxonomy.contains(name)) schema_error(ptr, "organ \"" + name + "\" not in taxonomy");
        m.taxonomy.lr_pairs.emplace_back(lt, rt);
      }
    } else {
      m.taxonomy.lr_pairs = Taxonomy::pairs_by_suffix(m.taxonomy.organs);
    }
  } else {
    m.taxonomy = default_taxonomy();
  }

  const auto& patients = detail::require(doc, "patients", "");
  if (!patients.is_array()) schema_error("/patients", "expected an array");
  std::set<std::string> seen_paths;
  std::set<std::pair<std::string, std::string>> seen_scans;
  auto resolve = [&](const std::string& raw, const std::string& ptr) {
    std::filesystem::path p(raw);
    if (p.is_relative()) p = base_dir / p;
    p = p.lexically_normal();
    if (!seen_paths.insert(p.generic_string()).second)
      schema_error(ptr, "duplicate path \"" + raw + "\"");
    return p;
  };

  for (std::size_t i = 0; i < patients.size(); ++i) {
    const std::string ptr = "/patients/" + std::to_string(i);
    const auto& pj = patients[i];
    PatientEntry entry;
    entry.patient_id = require_string(detail::require(pj, "patient_id", ptr), ptr + "/patient_id");
    entry.scan_id = pj.contains("scan_id") ? require_string(pj["scan_id"], ptr + "/scan_id")
                                           : entry.patient_id;
    if (!seen_scans.insert({entry.patient_id, entry.scan_id}).second)
      schema_error(ptr, "duplicate patient/scan \"" + entry.patient_id + "/" + entry.scan_id + "\"");
    if (pj.contains("ct_path"))
      entry.ct_path = resolve(require_string(pj["ct_path"], ptr + "/ct_path"), ptr + "/ct_path");
    const auto& segs = detail::require(pj, "segmentations", ptr);
    if (!segs.is_object()) schema_error(ptr + "/segmentations", "expected an object");
    for (const auto& [observer, organs] : segs.items()) {
      const std::string optr = ptr + "/segmentations/" + pointer_escape(observer);
      if (!organs.is_object()) schema_error(optr, "expected an object of organ paths");
      auto& dest = entry.segmentations[observer];
      for (const auto& [organ, path] : organs.items()) {
        const std::string gptr = optr + "/" + pointer_escape(organ);
        if (!m.taxonomy.contains(organ)) schema_error(gptr, "organ \"" + organ + "\" not in taxonomy");
        dest[organ] = resolve(require_string(path, gptr), gptr);
      }
    }
    m.patients.push_back(std::move(entry));
  }

  if (auto it = doc.find("relevant_organs"); it != doc.end()) {
    if (!it->is_object()) schema_error("/relevant_organs", "expected an object");
    for (const auto& [patient, organs] : it->items()) {
      const std::string ptr = "/relevant_organs/" + pointer_escape(patient);
      const bool known = std::any_of(m.patients.begin(), m.patients.end(),
                                     [&](const PatientEntry& p) { return p.patient_id == patient; });
      if (!known) schema_error(ptr, "unknown patient \"" + patient + "\"");
      if (!organs.is_array()) schema_error(ptr, "expected an array");
      auto& dest = m.relevant_organs[patient];
      for (std::size_t i = 0; i < organs.size(); ++i) {
        const std::string organ = require_string(organs[i], ptr + "/" + std::to_string(i));
        if (!m.taxonomy.contains(organ))
          schema_error(ptr + "/" + std::to_string(i), "organ \"" + organ + "\" not in taxonomy");
        dest.push_back(organ);
      }
    }
  }
  return m;
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
  }
}

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_json_file(path), path.parent_path());
}

}  // namespace surfdice::io

#endif  // SURFDICE_IO_MANIFEST_HPP
