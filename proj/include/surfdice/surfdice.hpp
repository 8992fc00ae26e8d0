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

#ifndef SURFDICE_SURFDICE_HPP
#define SURFDICE_SURFDICE_HPP

#include "surfdice/api.hpp"
#include "surfdice/batch.hpp"
#include "surfdice/calibrate.hpp"
#include "surfdice/distance.hpp"
#include "surfdice/error.hpp"
#include "surfdice/grid.hpp"
#include "surfdice/io/formats.hpp"
#include "surfdice/io/manifest.hpp"
#include "surfdice/io/nifti.hpp"
#include "surfdice/io/report.hpp"
#include "surfdice/marching_cubes.hpp"
#include "surfdice/metrics.hpp"
#include "surfdice/perturb.hpp"
#include "surfdice/random.hpp"
#include "surfdice/surface.hpp"

#endif  // SURFDICE_SURFDICE_HPP
