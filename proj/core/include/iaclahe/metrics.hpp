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

#include "iaclahe/image.hpp"

namespace iaclahe {

struct MetricReport {
    double psnr_db = 0.0;  // +infinity when the planes are identical
    double ssim = 0.0;
};

/// 10*log10(255^2 / MSE); +infinity for identical planes.
double psnr(const Plane& a, const Plane& b);

/// Mean local SSIM over valid 11x11 windows, Gaussian-weighted (sigma 1.5),
/// K1=0.01, K2=0.03, L=255. Requires both dims >= 11.
double ssim(const Plane& a, const Plane& b);

MetricReport evaluate_pair(const Plane& a, const Plane& b);

}  // namespace iaclahe
