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

#ifndef SURFDICE_TESTS_FIXTURE_HPP
#define SURFDICE_TESTS_FIXTURE_HPP

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "support/oracles.hpp"
#include "surfdice/io/nifti.hpp"

namespace fixture {

using surfdice::GridShape;
using surfdice::Mask;
using surfdice::Spacing;

struct Case {
  std::string patient;
  std::string scan;
  std::string organ;
  Mask reference;
  Mask candidate;
  bool relevant = true;
  double tau = 0;
};

struct Dataset {
  std::filesystem::path manifest;
  std::filesystem::path tolerances;
  std::vector<Case> cases;
};

struct Options {
  bool with_copy_observer = false;  // "copy" holds the reference masks again
  bool drop_candidate_organ = false;  // p1 candidate lacks Parotid-Lt
};

inline const GridShape kShape{16, 14, 10};
inline const Spacing kSpacing{1.0, 1.25, 2.0};  // float32-exact

/// Two patients, hand-built boxes and balls, observers "ref" and "cand".
/// p2 lists only Brainstem as relevant, so its Spinal-Cord row is bracketed.
inline std::vector<Case> cases() {
  using oracle::ball;
  using oracle::box;
  const auto& s = kShape;
  const auto& d = kSpacing;
  return {
      {"p1", "s1", "Brainstem", box(s, d, {4, 3, 2}, {10, 9, 6}), box(s, d, {5, 3, 2}, {11, 10, 6}),
       true, 2.5},
      {"p1", "s1", "Parotid-Lt", ball(s, d, {5, 7.5, 8}, 3.2), ball(s, d, {6, 7.5, 8}, 3.0), true,
       2.0},
      {"p2", "p2", "Brainstem", box(s, d, {3, 3, 3}, {9, 8, 7}), box(s, d, {3, 4, 3}, {9, 8, 6}), true,
       2.5},
      {"p2", "p2", "Spinal-Cord", box(s, d, {7, 5, 0}, {8, 7, 9}), box(s, d, {7, 6, 0}, {9, 7, 9}),
       false, 1.5},
  };
}

inline Dataset write(const std::filesystem::path& dir, const Options& opt = {}) {
  using nlohmann::json;
  Dataset ds;
  ds.cases = cases();
  std::map<std::pair<std::string, std::string>, json> segs;
  std::map<std::string, std::string> scan_of;
  json tol = {{"organ_tolerances_mm", json::object()}};
  for (const auto& c : ds.cases) {
    scan_of[c.patient] = c.scan;
    tol["organ_tolerances_mm"][c.organ] = c.tau;
    auto put = [&](const std::string& observer, const Mask& m) {
      const std::string rel = c.patient + "/" + observer + "/" + c.organ + ".nii.gz";
      std::filesystem::create_directories(dir / c.patient / observer);
      surfdice::io::write_nifti(m, dir / rel);
      segs[{c.patient, observer}][c.organ] = rel;
    };
    put("ref", c.reference);
    if (!(opt.drop_candidate_organ && c.patient == "p1" && c.organ == "Parotid-Lt"))
      put("cand", c.candidate);
    if (opt.with_copy_observer) put("copy", c.reference);
  }
  json patients = json::array();
  for (const auto& [patient, scan] : scan_of) {
    json p = {{"patient_id", patient}, {"segmentations", json::object()}};
    if (scan != patient) p["scan_id"] = scan;
    for (const auto& [key, organs] : segs)
      if (key.first == patient) p["segmentations"][key.second] = organs;
    patients.push_back(p);
  }
  json manifest = {{"patients", patients}, {"relevant_organs", {{"p2", {"Brainstem"}}}}};
  ds.manifest = dir / "manifest.json";
  ds.tolerances = dir / "tolerances.json";
  std::ofstream(ds.manifest) << manifest.dump(2);
  std::ofstream(ds.tolerances) << tol.dump(2);
  return ds;
}

}  // namespace fixture

#endif  // SURFDICE_TESTS_FIXTURE_HPP
