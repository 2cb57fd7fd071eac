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

#include "iaclahe/clahe.hpp"

namespace iaclahe {

/// Forward intermediates saved for the analytic backward pass. Immutable
/// after creation; safe to read concurrently.
struct Tape {
    PaddedPlane padded;
    TileGrid grid;
    double n_pix = 0.0;
    std::vector<double> hist;            // raw per-tile counts, tiles*kNumBins
    std::vector<double> clip_norm;       // C'_ij
    std::vector<double> excess;          // S_ij
    std::vector<std::uint8_t> clip_mask; // 1 where C' <= h(p)
    std::vector<double> luts;            // unrounded tables, tiles*kNumBins
    BlendAxis ax;                        // horizontal blend weights
    BlendAxis ay;                        // vertical blend weights

    std::span<const double> tile_hist(int i, int j) const {
        return {hist.data() + (std::size_t(i) * grid.cols + j) * kNumBins, kNumBins};
    }
    std::span<const std::uint8_t> tile_mask(int i, int j) const {
        return {clip_mask.data() + (std::size_t(i) * grid.cols + j) * kNumBins, kNumBins};
    }
};

/// dLoss/dC_ij per tile.
struct ClipGrad {
    TileGrid grid;
    std::vector<double> values;  // rows*cols

    double at(int i, int j) const { return values[std::size_t(i) * grid.cols + j]; }
    double& at(int i, int j) { return values[std::size_t(i) * grid.cols + j]; }
};

struct TapeForward {
    RealPlane output;  // unrounded enhanced intensities, original dimensions
    Tape tape;
};

/// Differentiable forward pass. Rounding the output elementwise reproduces
/// clahe() exactly (both run the identical real-valued pipeline).
TapeForward clahe_forward_tape(const Plane& p, TileGrid g, const ClipLimitMap& c);

struct L1Loss {
    double loss = 0.0;  // mean |y - target|
    RealPlane grad;     // sign(y - target)/pixel_count, sign(0) = 0
};

L1Loss l1_loss(const RealPlane& y, const Plane& target);

/// Analytic dLoss/dC via the chain through LUT application, the linear CDF,
/// and clip/redistribute. `output_grad` has the original (cropped) dims;
/// it is treated as zero over any padding.
ClipGrad clahe_backward(const Tape& t, const RealPlane& output_grad);

/// Central-difference oracle (L(C+eps e_ij) - L(C-eps e_ij)) / (2 eps) on the
/// unrounded forward with L1 loss against `target`. Throws KinkError if the
/// probe for any tile would cross a histogram count (the clip mask would
/// change between the two evaluations).
ClipGrad finite_diff_clip_grad(const Plane& p, TileGrid g, const ClipLimitMap& c,
                               const Plane& target, double eps);

}  // namespace iaclahe
