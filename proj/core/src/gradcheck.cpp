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

#include "iaclahe/gradcheck.hpp"

#include <cmath>

#include "iaclahe/rng.hpp"
#include "iaclahe/synth.hpp"

namespace iaclahe {

namespace {

// The loss is piecewise linear in each C_ij; between kinks the analytic
// gradient and the central difference agree to rounding error. Two kink
// families must stay outside the probe interval:
//  - clip-mask kinks: C' crossing a histogram count (checked via the tape,
//    with a 4x safety factor over finite_diff_clip_grad's own check);
//  - L1 sign kinks: an output pixel crossing the target. A C probe of eps
//    moves any output by at most eps*2*255 (= 0.51 for eps 1e-3), so a
//    target placed >= 2.5 levels away can never flip sign.
bool clip_kinks_clear(const Tape& tape, double eps) {
    const double delta = 4.0 * eps * tape.n_pix / double(kNumBins);
    for (int i = 0; i < tape.grid.rows; ++i) {
        for (int j = 0; j < tape.grid.cols; ++j) {
            const double limit = tape.clip_norm[std::size_t(i) * tape.grid.cols + j];
            for (double h : tape.tile_hist(i, j))
                if (std::abs(h - limit) <= delta) return false;
        }
    }
    return true;
}

Plane make_offset_target(const RealPlane& output, Rng& rng) {
    Plane target(output.width, output.height);
    for (std::size_t i = 0; i < target.data.size(); ++i) {
        const long base = std::lround(output.data[i]);
        const long d = 3 + rng.uniform_int(58);
        const long sign = rng.uniform_int(2) == 0 ? -1 : 1;
        long v = base + sign * d;
        if (v > 255) v = base - d;
        if (v < 0) v = base + d;
        target.data[i] = std::uint8_t(v);
    }
    return target;
}

}  // namespace

GradcheckReport run_gradcheck(const GradcheckOptions& opt) {
    const TileGrid grids[] = {TileGrid(1, 1), TileGrid(2, 2), TileGrid(4, 4)};

    GradcheckReport report;
    Rng rng(opt.seed);
    for (int n = 0; n < opt.cases; ++n) {
        const TileGrid grid = grids[n % 3];
        const int w = 8 + rng.uniform_int(opt.max_plane - 7);
        const int h = 8 + rng.uniform_int(opt.max_plane - 7);
        const Plane plane = synth_plane(w, h, rng.next_u64());

        // redraw clip limits until the probe clears every histogram count
        ClipLimitMap clip;
        TapeForward fwd;
        bool ok = false;
        for (int attempt = 0; attempt < opt.max_retries && !ok; ++attempt) {
            clip.grid = grid;
            clip.values.resize(std::size_t(grid.tile_count()));
            for (double& v : clip.values) v = rng.uniform(1.0, 10.0);
            fwd = clahe_forward_tape(plane, grid, clip);
            ok = clip_kinks_clear(fwd.tape, opt.eps);
        }
        if (!ok)
            throw KinkError("gradcheck: could not draw kink-free clip limits for case " +
                                std::to_string(n),
                            -1, -1);

        const Plane target = make_offset_target(fwd.output, rng);
        const ClipGrad analytic = clahe_backward(fwd.tape, l1_loss(fwd.output, target).grad);
        const ClipGrad numeric = finite_diff_clip_grad(plane, grid, clip, target, opt.eps);

        double max_rel = 0.0;
        bool pass = true;
        for (std::size_t t = 0; t < analytic.values.size(); ++t) {
            const double a = analytic.values[t];
            const double f = numeric.values[t];
            const double diff = std::abs(a - f);
            report.max_abs_err = std::max(report.max_abs_err, diff);
            if (diff == 0.0 || diff <= opt.abs_floor) continue;
            const double rel = diff / std::max(std::abs(a), std::abs(f));
            if (rel > max_rel) max_rel = rel;
            if (rel > opt.tolerance) pass = false;
        }

        GradcheckCase c{n, grid, w, h, max_rel, pass};
        report.cases.push_back(c);
        report.max_rel_err = std::max(report.max_rel_err, max_rel);
        report.all_pass = report.all_pass && c.pass;
    }
    return report;
}

}  // namespace iaclahe
