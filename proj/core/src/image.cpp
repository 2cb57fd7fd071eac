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

#include "iaclahe/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "codecs_internal.hpp"

namespace iaclahe {

namespace {

inline std::uint8_t clamp_u8(long v) {
    return std::uint8_t(v < 0 ? 0 : (v > 255 ? 255 : v));
}

// round half away from zero, then clamp
inline std::uint8_t round_u8(double v) { return clamp_u8(std::lround(v)); }

}  // namespace

RgbImage decode_image(std::span<const std::uint8_t> bytes) {
    if (detail::looks_like_png(bytes)) return detail::decode_png(bytes);
    if (detail::looks_like_pnm(bytes)) return detail::decode_pnm(bytes);
    throw DecodeError("unrecognized image stream (expected PNG, P6 PPM or P5 PGM)", 0);
}

RgbImage load_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw Error("read failed on " + path.string());
    return decode_image(bytes);
}

void save_image(const std::filesystem::path& path, const RgbImage& img) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });

    std::vector<std::uint8_t> bytes;
    if (ext == ".png") {
        bytes = encode_png(img);
    } else if (ext == ".ppm") {
        bytes = encode_ppm(img);
    } else if (ext == ".pgm") {
        Plane gray(img.width, img.height);
        for (std::size_t i = 0; i < gray.data.size(); ++i) {
            std::uint8_t r = img.data[3 * i], g = img.data[3 * i + 1], b = img.data[3 * i + 2];
            if (r != g || g != b)
                throw Error("save_image: .pgm requires a gray image (R==G==B)");
            gray.data[i] = r;
        }
        bytes = encode_pgm(gray);
    } else {
        throw Error("save_image: unsupported extension '" + ext + "' (use .png/.ppm/.pgm)");
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot create " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) throw Error("write failed on " + path.string());
}

YCbCrPlanes rgb_to_ycbcr(const RgbImage& img) {
    if (img.width < 1 || img.height < 1 ||
        img.data.size() != std::size_t(img.width) * img.height * 3)
        throw Error("rgb_to_ycbcr: malformed image");

    YCbCrPlanes out{Plane(img.width, img.height), Plane(img.width, img.height),
                    Plane(img.width, img.height)};
    const std::size_t n = std::size_t(img.width) * img.height;
    for (std::size_t i = 0; i < n; ++i) {
        double r = img.data[3 * i], g = img.data[3 * i + 1], b = img.data[3 * i + 2];
        out.y.data[i] = round_u8(0.299 * r + 0.587 * g + 0.114 * b);
        out.cb.data[i] = round_u8(128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b);
        out.cr.data[i] = round_u8(128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b);
    }
    return out;
}

RgbImage ycbcr_to_rgb(const Plane& y, const Plane& cb, const Plane& cr) {
    if (y.width != cb.width || y.width != cr.width || y.height != cb.height ||
        y.height != cr.height)
        throw Error("ycbcr_to_rgb: plane dimensions differ");

    RgbImage out(y.width, y.height);
    const std::size_t n = y.pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        double yy = y.data[i];
        double dcb = double(cb.data[i]) - 128.0;
        double dcr = double(cr.data[i]) - 128.0;
        out.data[3 * i] = round_u8(yy + 1.402 * dcr);
        out.data[3 * i + 1] = round_u8(yy - 0.344136 * dcb - 0.714136 * dcr);
        out.data[3 * i + 2] = round_u8(yy + 1.772 * dcb);
    }
    return out;
}

RealPlane to_real(const Plane& p) {
    RealPlane out(p.width, p.height);
    for (std::size_t i = 0; i < p.data.size(); ++i) out.data[i] = double(p.data[i]);
    return out;
}

Plane to_plane(const RealPlane& p) {
    Plane out(p.width, p.height);
    for (std::size_t i = 0; i < p.data.size(); ++i) out.data[i] = round_u8(p.data[i]);
    return out;
}

ResizeAxis make_resize_axis(int in_size, int out_size) {
    ResizeAxis ax;
    ax.lo.resize(out_size);
    ax.hi.resize(out_size);
    ax.frac.resize(out_size);
    const double scale = double(in_size) / double(out_size);
    for (int i = 0; i < out_size; ++i) {
        double s = (double(i) + 0.5) * scale - 0.5;
        if (s < 0.0) s = 0.0;
        if (s > double(in_size - 1)) s = double(in_size - 1);
        const int lo = int(s);
        const double f = s - double(lo);
        ax.lo[i] = lo;
        // exact hits (including the identity resize) must reproduce the
        // source sample bitwise, so collapse zero-weight taps
        ax.hi[i] = f == 0.0 ? lo : lo + 1;
        ax.frac[i] = f;
    }
    return ax;
}

RealPlane resize_bilinear(const RealPlane& src, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1) throw Error("resize_bilinear: target dims must be >= 1");
    if (src.width < 1 || src.height < 1) throw Error("resize_bilinear: empty source");

    ResizeAxis ax = make_resize_axis(src.width, out_w);
    ResizeAxis ay = make_resize_axis(src.height, out_h);

    RealPlane out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        const double* row_lo = src.data.data() + std::size_t(ay.lo[y]) * src.width;
        const double* row_hi = src.data.data() + std::size_t(ay.hi[y]) * src.width;
        const double fy = ay.frac[y];
        double* dst = out.data.data() + std::size_t(y) * out_w;
        for (int x = 0; x < out_w; ++x) {
            const double fx = ax.frac[x];
            double top = row_lo[ax.lo[x]] + fx * (row_lo[ax.hi[x]] - row_lo[ax.lo[x]]);
            double bot = row_hi[ax.lo[x]] + fx * (row_hi[ax.hi[x]] - row_hi[ax.lo[x]]);
            dst[x] = top + fy * (bot - top);
        }
    }
    return out;
}

}  // namespace iaclahe
