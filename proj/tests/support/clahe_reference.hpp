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

// Brute-force CLAHE reference, written independently of the library pipeline:
// padding is an index clamp, every tile table is rebuilt from scratch with
// plain loops, and each output pixel is assembled on its own. It follows the
// pinned scalar formulas from the public contracts (normalization
// (C*n_pix)/256, ascending excess and CDF sums, frac = r/(2*tile), lerp form
// a + f*(b-a), round half away from zero) so agreement is bit-exact.

#pragma once

#include <cmath>
#include <map>
#include <vector>

#include "iaclahe/clahe.hpp"

namespace refclahe {

using iaclahe::ClipLimitMap;
using iaclahe::Plane;
using iaclahe::TileGrid;

// edge-replicated sample; equivalent to right/bottom padding
inline int sample(const Plane& p, int x, int y) {
    if (x >= p.width) x = p.width - 1;
    if (y >= p.height) y = p.height - 1;
    return p.data[std::size_t(y) * p.width + x];
}

inline std::vector<double> tile_lut(const Plane& p, TileGrid g, const ClipLimitMap& c, int ti,
                                    int tj) {
    const int tile_w = (p.width + g.cols - 1) / g.cols;
    const int tile_h = (p.height + g.rows - 1) / g.rows;
    const double n_pix = double(tile_w) * double(tile_h);

    double hist[256] = {};
    for (int y = ti * tile_h; y < (ti + 1) * tile_h; ++y)
        for (int x = tj * tile_w; x < (tj + 1) * tile_w; ++x)
            hist[sample(p, x, y)] += 1.0;

    const double limit = (c.at(ti, tj) * n_pix) / 256.0;
    double excess = 0.0;
    for (int b = 0; b < 256; ++b) {
        const double over = hist[b] - limit;
        if (over > 0.0) excess += over;
    }
    const double share = excess / 256.0;

    double redist[256];
    for (int b = 0; b < 256; ++b)
        redist[b] = limit <= hist[b] ? limit : hist[b] + share;

    std::vector<double> lut(256);
    double cum = 0.0;
    for (int b = 0; b < 256; ++b) {
        cum += redist[b];
        lut[std::size_t(b)] = (255.0 * cum) / n_pix;
    }
    return lut;
}

struct AxisPos {
    int lo, hi;
    double frac;
};

inline AxisPos axis_pos(int x, int tile, int tiles) {
    const long num = 2L * x + 1 - tile;
    if (num <= 0) return {0, 0, 0.0};
    const long q = num / (2L * tile);
    if (q >= tiles - 1) return {tiles - 1, tiles - 1, 0.0};
    return {int(q), int(q) + 1, double(num - q * 2L * tile) / double(2L * tile)};
}

inline Plane reference_clahe(const Plane& p, TileGrid g, const ClipLimitMap& c) {
    const int tile_w = (p.width + g.cols - 1) / g.cols;
    const int tile_h = (p.height + g.rows - 1) / g.rows;

    std::map<int, std::vector<double>> luts;  // memo of the pure per-tile table
    auto lut_of = [&](int ti, int tj) -> const std::vector<double>& {
        const int key = ti * g.cols + tj;
        auto it = luts.find(key);
        if (it == luts.end()) it = luts.emplace(key, tile_lut(p, g, c, ti, tj)).first;
        return it->second;
    };

    Plane out(p.width, p.height);
    for (int y = 0; y < p.height; ++y) {
        const AxisPos py = axis_pos(y, tile_h, g.rows);
        for (int x = 0; x < p.width; ++x) {
            const AxisPos px = axis_pos(x, tile_w, g.cols);
            const int b = sample(p, x, y);
            const double t00 = lut_of(py.lo, px.lo)[std::size_t(b)];
            const double t01 = lut_of(py.lo, px.hi)[std::size_t(b)];
            const double t10 = lut_of(py.hi, px.lo)[std::size_t(b)];
            const double t11 = lut_of(py.hi, px.hi)[std::size_t(b)];
            const double top = t00 + px.frac * (t01 - t00);
            const double bot = t10 + px.frac * (t11 - t10);
            out.at(x, y) = std::uint8_t(std::lround(top + py.frac * (bot - top)));
        }
    }
    return out;
}

// Plain global histogram equalization, pixel-count denominator.
inline Plane reference_global_he(const Plane& p) {
    double hist[256] = {};
    for (std::uint8_t v : p.data) hist[v] += 1.0;
    const double n = double(p.data.size());
    double lut[256];
    double cum = 0.0;
    for (int b = 0; b < 256; ++b) {
        cum += hist[b];
        lut[b] = (255.0 * cum) / n;
    }
    Plane out(p.width, p.height);
    for (std::size_t i = 0; i < p.data.size(); ++i)
        out.data[i] = std::uint8_t(std::lround(lut[p.data[i]]));
    return out;
}

}  // namespace refclahe
