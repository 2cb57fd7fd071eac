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
#include <filesystem>
#include <span>
#include <vector>

#include "iaclahe/errors.hpp"

namespace iaclahe {

/// Maximum intensity of an 8-bit sample.
inline constexpr int kMaxIntensity = 255;

/// 8-bit RGB image, row-major interleaved R,G,B samples.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // size = width * height * 3

    RgbImage() = default;
    RgbImage(int w, int h) : width(w), height(h), data(std::size_t(w) * h * 3, 0) {}

    std::size_t index(int x, int y) const { return (std::size_t(y) * width + x) * 3; }
    bool operator==(const RgbImage&) const = default;
};

/// One 8-bit channel (the unit CLAHE operates on).
struct Plane {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  // size = width * height

    Plane() = default;
    Plane(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(std::size_t(w) * h, fill) {}

    std::uint8_t at(int x, int y) const { return data[std::size_t(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return data[std::size_t(y) * width + x]; }
    std::size_t pixel_count() const { return data.size(); }
    bool operator==(const Plane&) const = default;
};

/// Real-valued channel used for interpolation, network activations and the
/// differentiable pipeline (which stays unrounded end to end).
struct RealPlane {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    RealPlane() = default;
    RealPlane(int w, int h, double fill = 0.0)
        : width(w), height(h), data(std::size_t(w) * h, fill) {}

    double at(int x, int y) const { return data[std::size_t(y) * width + x]; }
    double& at(int x, int y) { return data[std::size_t(y) * width + x]; }
};

struct YCbCrPlanes {
    Plane y;
    Plane cb;
    Plane cr;
};

// ---------------------------------------------------------------------------
// Decoding / encoding. Supported containers: PNG (8-bit RGB or gray), binary
// PPM (P6) and binary PGM (P5) with maxval 255. Gray inputs are promoted to
// RGB by channel replication.

RgbImage decode_image(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_png(const RgbImage& img);
std::vector<std::uint8_t> encode_ppm(const RgbImage& img);
std::vector<std::uint8_t> encode_pgm(const Plane& plane);

RgbImage load_image(const std::filesystem::path& path);

/// Writes `img` in the format implied by the extension (.png, .ppm, or .pgm;
/// .pgm requires R==G==B for every pixel).
void save_image(const std::filesystem::path& path, const RgbImage& img);

// ---------------------------------------------------------------------------
// Color math. Full-range BT.601 with round-half-away-from-zero, clamped to
// [0,255]; constants are fixed here so golden values are portable.

YCbCrPlanes rgb_to_ycbcr(const RgbImage& img);
RgbImage ycbcr_to_rgb(const Plane& y, const Plane& cb, const Plane& cr);

RealPlane to_real(const Plane& p);
/// Rounds half away from zero and clamps to [0,255].
Plane to_plane(const RealPlane& p);

// ---------------------------------------------------------------------------
// Bilinear resize, align-corners-false (source coordinate (i+0.5)*scale-0.5),
// edge clamped.

/// Sampling positions for one axis of a bilinear resize:
/// out[i] = src[lo[i]] + frac[i] * (src[hi[i]] - src[lo[i]]).
struct ResizeAxis {
    std::vector<int> lo;
    std::vector<int> hi;
    std::vector<double> frac;
};

ResizeAxis make_resize_axis(int in_size, int out_size);

RealPlane resize_bilinear(const RealPlane& src, int out_w, int out_h);

}  // namespace iaclahe
