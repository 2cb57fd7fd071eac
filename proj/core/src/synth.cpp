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

#include "iaclahe/synth.hpp"

#include <cmath>

#include "iaclahe/rng.hpp"

namespace iaclahe {

namespace {

inline std::uint8_t to_u8(double v) {
    long r = std::lround(v);
    return std::uint8_t(r < 0 ? 0 : (r > 255 ? 255 : r));
}

struct Blob {
    double cx, cy, radius, amp;
};

}  // namespace

Plane synth_plane(int w, int h, std::uint64_t seed) {
    if (w < 1 || h < 1) throw Error("synth_plane: dims must be >= 1");
    Rng rng(seed);

    const double gx = rng.uniform(-90.0, 90.0);
    const double gy = rng.uniform(-90.0, 90.0);
    const double base = rng.uniform(60.0, 190.0);
    const double freq_x = rng.uniform(2.0, 9.0);
    const double freq_y = rng.uniform(2.0, 9.0);
    const double wave_amp = rng.uniform(5.0, 35.0);
    const double noise_amp = rng.uniform(2.0, 12.0);

    Blob blobs[3];
    for (Blob& b : blobs) {
        b.cx = rng.uniform(0.0, double(w));
        b.cy = rng.uniform(0.0, double(h));
        b.radius = rng.uniform(0.1, 0.45) * double(std::max(w, h));
        b.amp = rng.uniform(-80.0, 80.0);
    }

    Plane out(w, h);
    const double inv_w = w > 1 ? 1.0 / double(w - 1) : 0.0;
    const double inv_h = h > 1 ? 1.0 / double(h - 1) : 0.0;
    for (int y = 0; y < h; ++y) {
        const double fy = double(y) * inv_h;
        for (int x = 0; x < w; ++x) {
            const double fx = double(x) * inv_w;
            double v = base + gx * (fx - 0.5) + gy * (fy - 0.5);
            v += wave_amp * std::sin(freq_x * fx * 6.2831853) * std::sin(freq_y * fy * 6.2831853);
            for (const Blob& b : blobs) {
                const double dx = double(x) - b.cx;
                const double dy = double(y) - b.cy;
                const double d2 = (dx * dx + dy * dy) / (b.radius * b.radius);
                v += b.amp * std::exp(-d2);
            }
            v += rng.uniform(-noise_amp, noise_amp);
            out.at(x, y) = to_u8(v);
        }
    }
    return out;
}

RgbImage synth_rgb(int w, int h, std::uint64_t seed) {
    Rng rng(seed);
    const Plane luma = synth_plane(w, h, rng.next_u64());
    const double tint_r = rng.uniform(-30.0, 30.0);
    const double tint_g = rng.uniform(-30.0, 30.0);
    const double tint_b = rng.uniform(-30.0, 30.0);

    RgbImage out(w, h);
    for (std::size_t i = 0; i < luma.data.size(); ++i) {
        const double v = luma.data[i];
        const double chroma = rng.uniform(-10.0, 10.0);
        out.data[3 * i] = to_u8(v + tint_r + chroma);
        out.data[3 * i + 1] = to_u8(v + tint_g - chroma);
        out.data[3 * i + 2] = to_u8(v + tint_b + 0.5 * chroma);
    }
    return out;
}

}  // namespace iaclahe
