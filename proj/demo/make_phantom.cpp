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

// Writes a small synthetic head-and-neck phantom dataset: two patients, three
// observers, four organs, plus manifest.json. Usage: make_phantom <out_dir>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>

#include "json.hpp"
#include "surfdice/io/formats.hpp"
#include "surfdice/io/nifti.hpp"

namespace fs = std::filesystem;
using surfdice::GridShape;
using surfdice::Mask;
using surfdice::Spacing;

namespace {

// Ellipsoid with semi-axes in mm, centred at c (mm).
Mask ellipsoid(GridShape s, Spacing d, double cx, double cy, double cz, double rx, double ry,
               double rz) {
  Mask m(s, d);
  for (std::size_t z = 0; z < s.nz; ++z)
    for (std::size_t y = 0; y < s.ny; ++y)
      for (std::size_t x = 0; x < s.nx; ++x) {
        const double u = (x * d.dx - cx) / rx, v = (y * d.dy - cy) / ry, w = (z * d.dz - cz) / rz;
        m(x, y, z) = u * u + v * v + w * w <= 1.0;
      }
  return m;
}

struct Observer {
  const char* id;
  double dx, dy, grow;  // mm offsets and radius change
};

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_phantom <out_dir>\n";
    return 1;
  }
  const fs::path root = argv[1];
  const GridShape shape{64, 64, 24};
  const Spacing spacing{1.0, 1.0, 2.5};
  const Observer observers[] = {{"oncologist", 0, 0, 0}, {"radiographer", 1, 0, 0.5}, {"model", 0, 2, -1}};

  nlohmann::json manifest;
  manifest["taxonomy"] = {{"organs", {"Brainstem", "Parotid-Lt", "Parotid-Rt", "Spinal-Cord"}},
                          {"lr_pairs", nlohmann::json::array({nlohmann::json::array({"Parotid-Lt", "Parotid-Rt"})})}};
  manifest["patients"] = nlohmann::json::array();
  try {
    for (int p = 0; p < 2; ++p) {
      const std::string pid = "p0" + std::to_string(p + 1);
      const double jitter = 1.5 * p;  // anatomy differs slightly per patient
      nlohmann::json entry = {{"patient_id", pid}, {"scan_id", "s01"}};
      for (const auto& o : observers) {
        const fs::path dir = root / pid / o.id;
        fs::create_directories(dir);
        const double g = o.grow;
        const std::pair<std::string, Mask> organs[] = {
            {"Brainstem", ellipsoid(shape, spacing, 32 + o.dx, 36 + o.dy + jitter, 30, 7 + g, 8 + g, 15 + g)},
            {"Parotid-Lt", ellipsoid(shape, spacing, 14 + o.dx, 28 + o.dy, 27, 6 + g, 9 + g, 12 + g)},
            {"Parotid-Rt", ellipsoid(shape, spacing, 49 + o.dx, 28 + o.dy, 27, 6 + g, 9 + g, 12 + g)},
            {"Spinal-Cord", ellipsoid(shape, spacing, 32 + o.dx, 48 + o.dy + jitter, 30, 3 + g, 3 + g, 28)},
        };
        for (const auto& [organ, mask] : organs) {
          const fs::path file = dir / (organ + ".nii.gz");
          surfdice::io::write_nifti(mask, file);
          entry["segmentations"][o.id][organ] = fs::relative(file, root).generic_string();
        }
      }
      manifest["patients"].push_back(entry);
    }
    manifest["relevant_organs"]["p02"] = {"Brainstem", "Spinal-Cord"};
    surfdice::io::write_json_file(root / "manifest.json", manifest);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::cout << "wrote " << (root / "manifest.json").string() << '\n';
  return 0;
}
