// Copyright 2026 The iaclahe Authors
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

#pragma once

#include <cstdint>
#include <vector>

#include "iaclahe/autodiff.hpp"

namespace iaclahe {

struct GradcheckOptions {
    std::uint64_t seed = 0;
    int cases = 40;
    double eps = 1e-3;
    double tolerance = 1e-4;
    // differences at or below this pass regardless of relative error; the
    // command line uses 0 (pure relative), the acceptance suite 1e-8
    double abs_floor = 0.0;
    int max_plane = 64;
    int max_retries = 200;    // clip-limit redraws before giving up on a case
};

struct GradcheckCase {
    int index = 0;
    TileGrid grid;
    int width = 0;
    int height = 0;
    double max_rel_err = 0.0;  // over differences above the absolute floor
    bool pass = false;
};

struct GradcheckReport {
    std::vector<GradcheckCase> cases;
    double max_rel_err = 0.0;
    double max_abs_err = 0.0;  // over all tile gradients, floor or not
    bool all_pass = true;
};

/// Compares clahe_backward against the central-difference oracle on random
/// cases over grids 1x1/2x2/4x4. Cases are constructed away from both kink
/// families: clip limits are redrawn until every tile's C' clears all
/// histogram counts by a safety margin, and the L1 target is placed at least
/// 2.5 intensity levels from the forward output so no |.| sign flips inside
/// the probe interval. Throws KinkError when a case cannot be built.
GradcheckReport run_gradcheck(const GradcheckOptions& opt);

}  // namespace iaclahe
