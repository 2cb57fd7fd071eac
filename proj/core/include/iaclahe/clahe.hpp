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

#include <span>
#include <vector>

#include "iaclahe/image.hpp"

namespace iaclahe {

/// One histogram bin per intensity level.
inline constexpr int kNumBins = 256;

/// Number of tile rows/columns the image is partitioned into.
struct TileGrid {
    int rows = 1;
    int cols = 1;

    TileGrid() = default;
    TileGrid(int r, int c);  // validates 1..64 per axis

    int tile_count() const { return rows * cols; }
    bool operator==(const TileGrid&) const = default;
};

/// Per-tile clip limits C_ij: positive, unitless multipliers. This is the
/// differentiable parameter of the pipeline.
struct ClipLimitMap {
    TileGrid grid;
    std::vector<double> values;  // rows*cols, row-major

    static ClipLimitMap uniform(TileGrid g, double clip);

    double at(int i, int j) const { return values[std::size_t(i) * grid.cols + j]; }
    double& at(int i, int j) { return values[std::size_t(i) * grid.cols + j]; }
};

/// Plane padded by edge replication so dimensions are exact tile multiples.
/// Every tile holds tile_w*tile_h pixels, which is the LUT denominator.
struct PaddedPlane {
    Plane plane;
    int orig_w = 0;
    int orig_h = 0;
    int tile_w = 0;
    int tile_h = 0;

    double pixels_per_tile() const { return double(tile_w) * double(tile_h); }
};

/// Per-tile bin counts, in pixels. Raw histograms sum to pixels_per_tile;
/// redistributed ones may sum to less (clipping removes mass).
struct TileHistograms {
    TileGrid grid;
    std::vector<double> counts;  // rows*cols*kNumBins

    std::span<double> tile(int i, int j) {
        return {counts.data() + (std::size_t(i) * grid.cols + j) * kNumBins, kNumBins};
    }
    std::span<const double> tile(int i, int j) const {
        return {counts.data() + (std::size_t(i) * grid.cols + j) * kNumBins, kNumBins};
    }
};

/// Per-tile intensity -> intensity tables, non-decreasing, entries in [0,255].
struct LutGrid {
    TileGrid grid;
    std::vector<double> tables;  // rows*cols*kNumBins

    std::span<double> table(int i, int j) {
        return {tables.data() + (std::size_t(i) * grid.cols + j) * kNumBins, kNumBins};
    }
    std::span<const double> table(int i, int j) const {
        return {tables.data() + (std::size_t(i) * grid.cols + j) * kNumBins, kNumBins};
    }
};

// ---------------------------------------------------------------------------
// Tile-center blend weights.
//
// Tile centers sit at ((j+0.5)*tile - 0.5); a pixel between two centers is
// blended as T[lo] + frac*(T[hi]-T[lo]); outside the center lattice the
// nearest tile row/column gets full weight. frac is computed exactly as
// r/(2*tile) with integer r, so independently written implementations can
// reproduce blended outputs bit for bit.

struct BlendAxis {
    std::vector<int> lo;
    std::vector<int> hi;
    std::vector<double> frac;
};

BlendAxis make_blend_axis(int padded_len, int tile_len, int tiles);

// ---------------------------------------------------------------------------
// Pipeline stages.

/// Edge-replicates right/bottom so dimensions divide evenly into the grid.
/// tile_w = ceil(W/cols), tile_h = ceil(H/rows); interior pixels unchanged.
PaddedPlane pad_to_tile_multiple(const Plane& p, TileGrid g);

TileHistograms compute_tile_histograms(const PaddedPlane& pp, TileGrid g);

/// C'_ij = C_ij * n_pix / n_bins, in histogram-count units.
std::vector<double> normalize_clip_limits(const ClipLimitMap& c, double n_pix, int n_bins);

struct RedistributedHistogram {
    std::vector<double> counts;
    double excess = 0.0;  // S: total mass above the limit
};

/// Clips bins at c_prime and adds excess/bin_count to every sub-limit bin
/// (single pass; clipped bins receive no share). Bins exactly at the limit
/// count as clipped. Works for any bin count; the pipeline always uses 256.
RedistributedHistogram clip_and_redistribute(std::span<const double> hist, double c_prime);

/// Unrounded CDF tables: table(p) = (255 * cumsum(h'))/n_pix. This is the
/// variant the differentiable path and the composed pipeline use.
LutGrid build_luts_real(const TileHistograms& redistributed, double n_pix);

/// Same tables rounded half away from zero and clamped to [0,255].
LutGrid build_luts(const TileHistograms& redistributed, double n_pix);

/// Blends the four surrounding tile tables per pixel, rounds half away from
/// zero, and crops to the original dimensions.
Plane apply_luts(const PaddedPlane& pp, const LutGrid& luts);

/// Full forward pipeline: pad, histograms, normalize, clip/redistribute,
/// CDF tables, blend. Integer rounding happens once, at the output.
Plane clahe(const Plane& p, TileGrid g, const ClipLimitMap& c);

/// Same pipeline but each pixel uses its owning tile's table alone (no
/// blending). Tile interiors then equal independent per-tile equalization.
Plane clahe_nearest_blend(const Plane& p, TileGrid g, const ClipLimitMap& c);

}  // namespace iaclahe
