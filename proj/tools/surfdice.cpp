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

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "surfdice/batch.hpp"

namespace {

unsigned jobs_from_env() {
  if (const char* env = std::getenv("SURFDICE_JOBS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring SURFDICE_JOBS=" << env << '\n';
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  using surfdice::RunConfig;
  CLI::App app{"Surface DSC segmentation evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", surfdice::kVersion);

  RunConfig config;
  config.jobs = jobs_from_env();
  std::string format = "csv";
  std::string mask_warp = "linear";
  std::optional<double> default_tau;
  std::string tolerances, augmentation, out;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--manifest", config.manifest, "dataset manifest JSON")->required()->check(CLI::ExistingFile);
    cmd->add_option("--jobs", config.jobs, "worker threads (default $SURFDICE_JOBS or 1)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", out, "output directory")->required();
  };
  auto add_tolerances = [&](CLI::App* cmd) {
    cmd->add_option("--tolerances", tolerances, "tolerance JSON from calibrate");
    cmd->add_option("--default-tau-mm", default_tau, "tolerance for organs without an entry");
    cmd->add_option("--reference", config.reference, "reference observer id")->required();
  };

  auto* evaluate = app.add_subcommand("evaluate", "score candidates against a reference observer");
  add_common(evaluate);
  add_tolerances(evaluate);
  evaluate->add_option("--candidate", config.candidates, "candidate observer id (repeatable; default all others)");
  evaluate->add_option("--format", format, "also render report.md when md")
      ->check(CLI::IsMember({"csv", "md"}));

  auto* calibrate = app.add_subcommand("calibrate", "derive organ tolerances from inter-observer data");
  add_common(calibrate);
  calibrate->add_flag("--unweighted-percentile", config.unweighted_percentile,
                      "count every surface element once instead of by area");

  auto* perturb = app.add_subcommand("perturb", "metric response to controlled deformations");
  add_common(perturb);
  add_tolerances(perturb);
  perturb->add_option("--seed", config.seed, "augmentation seed");
  perturb->add_option("--max-shift", config.max_shift_voxels, "largest translation in voxels");
  perturb->add_option("--samples", config.augment_samples, "augmentation samples per organ");
  perturb->add_option("--augmentation", augmentation, "augmentation config JSON")->check(CLI::ExistingFile);
  perturb->add_option("--mask-warp", mask_warp, "mask resampling")
      ->check(CLI::IsMember({"linear", "nearest"}));

  auto* table = app.add_subcommand("table", "summarise a report.csv");
  table->add_option("report", config.report, "report CSV")->required();
  table->add_option("--format", format, "csv or md")->check(CLI::IsMember({"csv", "md"}));
  table->add_option("--out", out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  config.out = out;
  config.default_tau_mm = default_tau;
  if (!tolerances.empty()) config.tolerances = tolerances;
  if (!augmentation.empty()) config.augmentation = augmentation;
  config.format = format == "md" ? surfdice::io::ReportFormat::Markdown : surfdice::io::ReportFormat::Csv;
  config.mask_warp = mask_warp == "nearest" ? surfdice::MaskWarp::Nearest : surfdice::MaskWarp::Linear;

  if (*evaluate) return surfdice::cmd_evaluate(config, std::cout, std::cerr);
  if (*calibrate) return surfdice::cmd_calibrate(config, std::cout, std::cerr);
  if (*perturb) return surfdice::cmd_perturb(config, std::cout, std::cerr);
  return surfdice::cmd_table(config, std::cout, std::cerr);
}
