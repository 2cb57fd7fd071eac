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

// Binary PPM (P6) and PGM (P5), maxval 255 only.

#include <cctype>
#include <cstring>
#include <string>

#include "codecs_internal.hpp"

namespace iaclahe::detail {

namespace {

struct HeaderReader {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;

    // skips whitespace and '#' comments between header tokens
    void skip_separators() {
        while (pos < bytes.size()) {
            std::uint8_t c = bytes[pos];
            if (std::isspace(c)) {
                ++pos;
            } else if (c == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
    }

    long read_number(const char* what) {
        skip_separators();
        std::size_t start = pos;
        long v = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + (bytes[pos] - '0');
            if (v > 1000000000L)
                throw DecodeError(std::string("pnm: implausible ") + what, start);
            ++pos;
        }
        if (pos == start)
            throw DecodeError(std::string("pnm: missing ") + what, pos);
        return v;
    }
};

}  // namespace

bool looks_like_pnm(std::span<const std::uint8_t> bytes) {
    return bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6');
}

RgbImage decode_pnm(std::span<const std::uint8_t> bytes) {
    if (!looks_like_pnm(bytes))
        throw DecodeError("pnm: missing P5/P6 magic", 0);
    const bool color = bytes[1] == '6';

    HeaderReader hr{bytes, 2};
    long w = hr.read_number("width");
    long h = hr.read_number("height");
    long maxval = hr.read_number("maxval");
    if (w < 1 || h < 1)
        throw DecodeError("pnm: zero image dimension", 2);
    if (w * h > (1L << 26))
        throw DecodeError("pnm: image too large", 2);
    if (maxval != 255)
        throw UnsupportedFormatError("pnm: unsupported maxval " + std::to_string(maxval) +
                                     " (only 8-bit, maxval 255)");

    // exactly one whitespace byte separates the header from the payload
    if (hr.pos >= bytes.size() || !std::isspace(bytes[hr.pos]))
        throw DecodeError("pnm: missing whitespace before pixel data", hr.pos);
    std::size_t payload_at = hr.pos + 1;

    const std::size_t need = std::size_t(w) * h * (color ? 3 : 1);
    if (bytes.size() - payload_at < need)
        throw DecodeError("pnm: truncated pixel data", bytes.size());

    RgbImage img{int(w), int(h)};
    const std::uint8_t* src = bytes.data() + payload_at;
    if (color) {
        std::memcpy(img.data.data(), src, need);
    } else {
        for (std::size_t i = 0; i < need; ++i) {
            img.data[3 * i] = src[i];
            img.data[3 * i + 1] = src[i];
            img.data[3 * i + 2] = src[i];
        }
    }
    return img;
}

}  // namespace iaclahe::detail

namespace iaclahe {

std::vector<std::uint8_t> encode_ppm(const RgbImage& img) {
    if (img.width < 1 || img.height < 1 ||
        img.data.size() != std::size_t(img.width) * img.height * 3)
        throw Error("encode_ppm: malformed image");
    std::string header =
        "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.data.begin(), img.data.end());
    return out;
}

std::vector<std::uint8_t> encode_pgm(const Plane& plane) {
    if (plane.width < 1 || plane.height < 1 ||
        plane.data.size() != std::size_t(plane.width) * plane.height)
        throw Error("encode_pgm: malformed plane");
    std::string header =
        "P5\n" + std::to_string(plane.width) + " " + std::to_string(plane.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), plane.data.begin(), plane.data.end());
    return out;
}

}  // namespace iaclahe
