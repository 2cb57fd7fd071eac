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

#include "iaclahe/autodiff.hpp"

#include <algorithm>
#include <cmath>

namespace iaclahe {

TapeForward clahe_forward_tape(const Plane& p, TileGrid g, const ClipLimitMap& c) {
    if (c.grid != g) throw Error("clahe_forward_tape: clip map grid does not match");

    TapeForward fwd;
    Tape& t = fwd.tape;
    t.padded = pad_to_tile_multiple(p, g);
    t.grid = g;
    t.n_pix = t.padded.pixels_per_tile();

    TileHistograms raw = compute_tile_histograms(t.padded, g);
    t.hist = raw.counts;
    t.clip_norm = normalize_clip_limits(c, t.n_pix, kNumBins);

    const int tiles = g.tile_count();
    t.excess.resize(std::size_t(tiles));
    t.clip_mask.assign(std::size_t(tiles) * kNumBins, 0);

    TileHistograms redist;
    redist.grid = g;
    redist.counts.resize(std::size_t(tiles) * kNumBins);
    for (int k = 0; k < tiles; ++k) {
        const double limit = t.clip_norm[std::size_t(k)];
        const double* h = t.hist.data() + std::size_t(k) * kNumBins;
        RedistributedHistogram r = clip_and_redistribute({h, kNumBins}, limit);
        std::copy(r.counts.begin(), r.counts.end(),
                  redist.counts.begin() + std::ptrdiff_t(k) * kNumBins);
        t.excess[std::size_t(k)] = r.excess;
        std::uint8_t* mask = t.clip_mask.data() + std::size_t(k) * kNumBins;
        for (int b = 0; b < kNumBins; ++b) mask[b] = limit <= h[b] ? 1 : 0;
    }

    t.luts = build_luts_real(redist, t.n_pix).tables;
    t.ax = make_blend_axis(t.padded.plane.width, t.padded.tile_w, g.cols);
    t.ay = make_blend_axis(t.padded.plane.height, t.padded.tile_h, g.rows);

    RealPlane& out = fwd.output;
    out = RealPlane(t.padded.orig_w, t.padded.orig_h);
    for (int y = 0; y < t.padded.orig_h; ++y) {
        const int i0 = t.ay.lo[y], i1 = t.ay.hi[y];
        const double fy = t.ay.frac[y];
        const std::uint8_t* src =
            t.padded.plane.data.data() + std::size_t(y) * t.padded.plane.width;
        double* dst = out.data.data() + std::size_t(y) * out.width;
        for (int x = 0; x < t.padded.orig_w; ++x) {
            const int b = src[x];
            const double fx = t.ax.frac[x];
            const double* t00 = t.luts.data() + (std::size_t(i0) * g.cols + t.ax.lo[x]) * kNumBins;
            const double* t01 = t.luts.data() + (std::size_t(i0) * g.cols + t.ax.hi[x]) * kNumBins;
            const double* t10 = t.luts.data() + (std::size_t(i1) * g.cols + t.ax.lo[x]) * kNumBins;
            const double* t11 = t.luts.data() + (std::size_t(i1) * g.cols + t.ax.hi[x]) * kNumBins;
            const double top = t00[b] + fx * (t01[b] - t00[b]);
            const double bot = t10[b] + fx * (t11[b] - t10[b]);
            dst[x] = top + fy * (bot - top);
        }
    }
    return fwd;
}

L1Loss l1_loss(const RealPlane& y, const Plane& target) {
    if (y.width != target.width || y.height != target.height)
        throw Error("l1_loss: dimensions differ");

    L1Loss out;
    out.grad = RealPlane(y.width, y.height);
    const std::size_t n = y.data.size();
    const double inv_n = 1.0 / double(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = y.data[i] - double(target.data[i]);
        if (d > 0.0) {
            sum += d;
            out.grad.data[i] = inv_n;
        } else if (d < 0.0) {
            sum -= d;
            out.grad.data[i] = -inv_n;
        }
    }
    out.loss = sum * inv_n;
    return out;
}

ClipGrad clahe_backward(const Tape& t, const RealPlane& output_grad) {
    if (output_grad.width != t.padded.orig_w || output_grad.height != t.padded.orig_h)
        throw Error("clahe_backward: gradient dimensions do not match the tape");

    const TileGrid g = t.grid;
    const int tiles = g.tile_count();

    // dL/dLUT_ij(r): scatter the blend weights of every pixel with intensity r
    std::vector<double> lut_grad(std::size_t(tiles) * kNumBins, 0.0);
    for (int y = 0; y < t.padded.orig_h; ++y) {
        const int i0 = t.ay.lo[y], i1 = t.ay.hi[y];
        const double fy = t.ay.frac[y];
        const std::uint8_t* src =
            t.padded.plane.data.data() + std::size_t(y) * t.padded.plane.width;
        const double* up = output_grad.data.data() + std::size_t(y) * output_grad.width;
        for (int x = 0; x < t.padded.orig_w; ++x) {
            const double gy = up[x];
            if (gy == 0.0) continue;
            const int b = src[x];
            const double fx = t.ax.frac[x];
            const int j0 = t.ax.lo[x], j1 = t.ax.hi[x];
            lut_grad[(std::size_t(i0) * g.cols + j0) * kNumBins + b] += gy * (1.0 - fx) * (1.0 - fy);
            lut_grad[(std::size_t(i0) * g.cols + j1) * kNumBins + b] += gy * fx * (1.0 - fy);
            lut_grad[(std::size_t(i1) * g.cols + j0) * kNumBins + b] += gy * (1.0 - fx) * fy;
            lut_grad[(std::size_t(i1) * g.cols + j1) * kNumBins + b] += gy * fx * fy;
        }
    }

    ClipGrad out;
    out.grid = g;
    out.values.assign(std::size_t(tiles), 0.0);
    const double lut_scale = double(kMaxIntensity) / t.n_pix;
    for (int k = 0; k < tiles; ++k) {
        const double* lg = lut_grad.data() + std::size_t(k) * kNumBins;
        const double* h = t.hist.data() + std::size_t(k) * kNumBins;
        const std::uint8_t* mask = t.clip_mask.data() + std::size_t(k) * kNumBins;
        const double limit = t.clip_norm[std::size_t(k)];

        // dL/dh'(p) = lut_scale * sum_{r >= p} dL/dLUT(r)   (linear CDF)
        // dh'(p)/dC' = 1 on clipped bins, -n_above/256 on the rest, with
        // n_above counting strictly-above bins.
        int n_above = 0;
        for (int b = 0; b < kNumBins; ++b)
            if (h[b] > limit) ++n_above;

        double suffix = 0.0;
        double sum_clipped = 0.0;
        double sum_unclipped = 0.0;
        for (int b = kNumBins - 1; b >= 0; --b) {
            suffix += lg[b];
            const double dhp = lut_scale * suffix;
            if (mask[b])
                sum_clipped += dhp;
            else
                sum_unclipped += dhp;
        }
        const double d_cprime = sum_clipped - (double(n_above) / double(kNumBins)) * sum_unclipped;
        out.values[std::size_t(k)] = d_cprime * (t.n_pix / double(kNumBins));
    }
    return out;
}

ClipGrad finite_diff_clip_grad(const Plane& p, TileGrid g, const ClipLimitMap& c,
                               const Plane& target, double eps) {
    if (!(eps > 0.0)) throw Error("finite_diff_clip_grad: eps must be positive");
    if (c.grid != g) throw Error("finite_diff_clip_grad: clip map grid does not match");

    // The probe shifts C' by eps*n_pix/256; if that interval contains any
    // histogram count, the clip mask changes inside it and the difference
    // quotient measures the wrong linear piece.
    TapeForward base = clahe_forward_tape(p, g, c);
    const double delta = eps * base.tape.n_pix / double(kNumBins);
    for (int i = 0; i < g.rows; ++i) {
        for (int j = 0; j < g.cols; ++j) {
            const double limit = base.tape.clip_norm[std::size_t(i) * g.cols + j];
            auto h = base.tape.tile_hist(i, j);
            for (int b = 0; b < kNumBins; ++b) {
                if (std::abs(h[std::size_t(b)] - limit) <= delta)
                    throw KinkError("finite_diff_clip_grad: probe for tile (" +
                                        std::to_string(i) + "," + std::to_string(j) +
                                        ") crosses the histogram count of bin " +
                                        std::to_string(b),
                                    i, j);
            }
        }
    }

    ClipGrad out;
    out.grid = g;
    out.values.assign(std::size_t(g.tile_count()), 0.0);
    for (std::size_t t = 0; t < out.values.size(); ++t) {
        ClipLimitMap probe = c;
        probe.values[t] = c.values[t] + eps;
        const double loss_hi = l1_loss(clahe_forward_tape(p, g, probe).output, target).loss;
        probe.values[t] = c.values[t] - eps;
        const double loss_lo = l1_loss(clahe_forward_tape(p, g, probe).output, target).loss;
        out.values[t] = (loss_hi - loss_lo) / (2.0 * eps);
    }
    return out;
}

}  // namespace iaclahe
