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

#include "iaclahe/clahe.hpp"

#include <cmath>
#include <cstring>

#include "iaclahe/autodiff.hpp"

namespace iaclahe {

TileGrid::TileGrid(int r, int c) : rows(r), cols(c) {
    if (r < 1 || r > 64 || c < 1 || c > 64)
        throw Error("TileGrid: rows/cols must be in [1,64], got " + std::to_string(r) + "x" +
                    std::to_string(c));
}

ClipLimitMap ClipLimitMap::uniform(TileGrid g, double clip) {
    ClipLimitMap m;
    m.grid = g;
    m.values.assign(std::size_t(g.tile_count()), clip);
    return m;
}

BlendAxis make_blend_axis(int padded_len, int tile_len, int tiles) {
    BlendAxis ax;
    ax.lo.resize(padded_len);
    ax.hi.resize(padded_len);
    ax.frac.resize(padded_len);
    const long span = 2L * tile_len;
    for (int x = 0; x < padded_len; ++x) {
        // 2*(x - first tile center); centers at (t+0.5)*tile_len - 0.5
        const long num = 2L * x + 1 - tile_len;
        if (num <= 0) {
            ax.lo[x] = ax.hi[x] = 0;
            ax.frac[x] = 0.0;
        } else {
            const long q = num / span;
            if (q >= tiles - 1) {
                ax.lo[x] = ax.hi[x] = tiles - 1;
                ax.frac[x] = 0.0;
            } else {
                ax.lo[x] = int(q);
                ax.hi[x] = int(q) + 1;
                ax.frac[x] = double(num - q * span) / double(span);
            }
        }
    }
    return ax;
}

PaddedPlane pad_to_tile_multiple(const Plane& p, TileGrid g) {
    if (p.width < 1 || p.height < 1) throw Error("pad_to_tile_multiple: empty plane");

    PaddedPlane out;
    out.orig_w = p.width;
    out.orig_h = p.height;
    out.tile_w = (p.width + g.cols - 1) / g.cols;
    out.tile_h = (p.height + g.rows - 1) / g.rows;
    const int pw = out.tile_w * g.cols;
    const int ph = out.tile_h * g.rows;

    if (pw == p.width && ph == p.height) {
        out.plane = p;
        return out;
    }
    out.plane = Plane(pw, ph);
    for (int y = 0; y < ph; ++y) {
        const int sy = y < p.height ? y : p.height - 1;
        const std::uint8_t* src = p.data.data() + std::size_t(sy) * p.width;
        std::uint8_t* dst = out.plane.data.data() + std::size_t(y) * pw;
        std::memcpy(dst, src, std::size_t(p.width));
        std::uint8_t edge = src[p.width - 1];
        for (int x = p.width; x < pw; ++x) dst[x] = edge;
    }
    return out;
}

TileHistograms compute_tile_histograms(const PaddedPlane& pp, TileGrid g) {
    if (pp.plane.width != pp.tile_w * g.cols || pp.plane.height != pp.tile_h * g.rows)
        throw Error("compute_tile_histograms: padded plane does not match grid");

    TileHistograms th;
    th.grid = g;
    th.counts.assign(std::size_t(g.tile_count()) * kNumBins, 0.0);
    for (int i = 0; i < g.rows; ++i) {
        for (int j = 0; j < g.cols; ++j) {
            double* hist = th.counts.data() + (std::size_t(i) * g.cols + j) * kNumBins;
            for (int y = i * pp.tile_h; y < (i + 1) * pp.tile_h; ++y) {
                const std::uint8_t* row =
                    pp.plane.data.data() + std::size_t(y) * pp.plane.width + j * pp.tile_w;
                for (int x = 0; x < pp.tile_w; ++x) hist[row[x]] += 1.0;
            }
        }
    }
    return th;
}

std::vector<double> normalize_clip_limits(const ClipLimitMap& c, double n_pix, int n_bins) {
    if (n_pix < 1.0) throw Error("normalize_clip_limits: n_pix must be >= 1");
    if (n_bins != kNumBins) throw Error("normalize_clip_limits: n_bins must be 256");
    if (c.values.size() != std::size_t(c.grid.tile_count()))
        throw Error("normalize_clip_limits: clip map size does not match grid");

    std::vector<double> out(c.values.size());
    for (std::size_t t = 0; t < c.values.size(); ++t) {
        const double v = c.values[t];
        if (!(v > 0.0) || !std::isfinite(v))
            throw Error("normalize_clip_limits: clip limits must be positive and finite");
        out[t] = (v * n_pix) / double(n_bins);
    }
    return out;
}

RedistributedHistogram clip_and_redistribute(std::span<const double> hist, double c_prime) {
    if (hist.empty()) throw Error("clip_and_redistribute: empty histogram");
    if (!(c_prime > 0.0)) throw Error("clip_and_redistribute: c_prime must be positive");

    const std::size_t n_bins = hist.size();
    RedistributedHistogram out;
    out.counts.resize(n_bins);

    double excess = 0.0;
    for (std::size_t p = 0; p < n_bins; ++p) {
        const double over = hist[p] - c_prime;
        if (over > 0.0) excess += over;
    }
    const double share = excess / double(n_bins);
    for (std::size_t p = 0; p < n_bins; ++p)
        out.counts[p] = c_prime <= hist[p] ? c_prime : hist[p] + share;
    out.excess = excess;
    return out;
}

LutGrid build_luts_real(const TileHistograms& redistributed, double n_pix) {
    if (n_pix < 1.0) throw Error("build_luts_real: n_pix must be >= 1");

    const TileGrid g = redistributed.grid;
    LutGrid luts;
    luts.grid = g;
    luts.tables.resize(std::size_t(g.tile_count()) * kNumBins);
    for (int t = 0; t < g.tile_count(); ++t) {
        const double* h = redistributed.counts.data() + std::size_t(t) * kNumBins;
        double* lut = luts.tables.data() + std::size_t(t) * kNumBins;
        double cum = 0.0;
        for (int p = 0; p < kNumBins; ++p) {
            cum += h[p];
            lut[p] = (double(kMaxIntensity) * cum) / n_pix;
        }
    }
    return luts;
}

LutGrid build_luts(const TileHistograms& redistributed, double n_pix) {
    LutGrid luts = build_luts_real(redistributed, n_pix);
    for (double& v : luts.tables) {
        long r = std::lround(v);
        if (r < 0) r = 0;
        if (r > kMaxIntensity) r = kMaxIntensity;
        v = double(r);
    }
    return luts;
}

Plane apply_luts(const PaddedPlane& pp, const LutGrid& luts) {
    const TileGrid g = luts.grid;
    if (pp.plane.width != pp.tile_w * g.cols || pp.plane.height != pp.tile_h * g.rows)
        throw Error("apply_luts: padded plane does not match grid");

    const BlendAxis ax = make_blend_axis(pp.plane.width, pp.tile_w, g.cols);
    const BlendAxis ay = make_blend_axis(pp.plane.height, pp.tile_h, g.rows);

    Plane out(pp.orig_w, pp.orig_h);
    for (int y = 0; y < pp.orig_h; ++y) {
        const int i0 = ay.lo[y], i1 = ay.hi[y];
        const double fy = ay.frac[y];
        const std::uint8_t* src = pp.plane.data.data() + std::size_t(y) * pp.plane.width;
        std::uint8_t* dst = out.data.data() + std::size_t(y) * pp.orig_w;
        for (int x = 0; x < pp.orig_w; ++x) {
            const int p = src[x];
            const double fx = ax.frac[x];
            const double* t00 = luts.tables.data() + (std::size_t(i0) * g.cols + ax.lo[x]) * kNumBins;
            const double* t01 = luts.tables.data() + (std::size_t(i0) * g.cols + ax.hi[x]) * kNumBins;
            const double* t10 = luts.tables.data() + (std::size_t(i1) * g.cols + ax.lo[x]) * kNumBins;
            const double* t11 = luts.tables.data() + (std::size_t(i1) * g.cols + ax.hi[x]) * kNumBins;
            const double top = t00[p] + fx * (t01[p] - t00[p]);
            const double bot = t10[p] + fx * (t11[p] - t10[p]);
            dst[x] = std::uint8_t(std::lround(top + fy * (bot - top)));
        }
    }
    return out;
}

Plane clahe(const Plane& p, TileGrid g, const ClipLimitMap& c) {
    TapeForward fwd = clahe_forward_tape(p, g, c);
    Plane out(p.width, p.height);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = std::uint8_t(std::lround(fwd.output.data[i]));
    return out;
}

Plane clahe_nearest_blend(const Plane& p, TileGrid g, const ClipLimitMap& c) {
    if (c.grid != g) throw Error("clahe: clip map grid does not match");

    const PaddedPlane pp = pad_to_tile_multiple(p, g);
    const double n_pix = pp.pixels_per_tile();
    TileHistograms th = compute_tile_histograms(pp, g);
    const std::vector<double> limits = normalize_clip_limits(c, n_pix, kNumBins);
    for (int t = 0; t < g.tile_count(); ++t) {
        RedistributedHistogram r = clip_and_redistribute(
            std::span<const double>(th.counts.data() + std::size_t(t) * kNumBins, kNumBins),
            limits[std::size_t(t)]);
        std::memcpy(th.counts.data() + std::size_t(t) * kNumBins, r.counts.data(),
                    sizeof(double) * kNumBins);
    }
    const LutGrid luts = build_luts_real(th, n_pix);

    Plane out(pp.orig_w, pp.orig_h);
    for (int y = 0; y < pp.orig_h; ++y) {
        const int i = y / pp.tile_h;
        for (int x = 0; x < pp.orig_w; ++x) {
            const int j = x / pp.tile_w;
            const double v = luts.table(i, j)[pp.plane.at(x, y)];
            out.at(x, y) = std::uint8_t(std::lround(v));
        }
    }
    return out;
}

}  // namespace iaclahe
