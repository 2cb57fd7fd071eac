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

// Minimal PNG reader/writer for the subset this project needs: 8-bit
// truecolor or grayscale, no interlacing, no alpha. The chunk layer and
// filters are handled here; DEFLATE goes through zlib. Rolling our own
// container keeps decode errors tied to byte offsets and the encoder output
// stable across environments.

#include <zlib.h>

#include <cstdlib>
#include <cstring>
#include <string>

#include "codecs_internal.hpp"

namespace iaclahe::detail {

namespace {

constexpr std::uint8_t kSignature[8] = {137, 80, 78, 71, 13, 10, 26, 10};
constexpr std::size_t kMaxPixels = std::size_t(1) << 26;  // 64 Mpixel cap

struct Reader {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;

    std::size_t remaining() const { return bytes.size() - pos; }

    void need(std::size_t n, const char* what) const {
        if (remaining() < n)
            throw DecodeError(std::string("png: truncated ") + what, pos);
    }

    std::uint32_t be32(const char* what) {
        need(4, what);
        std::uint32_t v = (std::uint32_t(bytes[pos]) << 24) | (std::uint32_t(bytes[pos + 1]) << 16) |
                          (std::uint32_t(bytes[pos + 2]) << 8) | std::uint32_t(bytes[pos + 3]);
        pos += 4;
        return v;
    }

    std::span<const std::uint8_t> take(std::size_t n, const char* what) {
        need(n, what);
        auto s = bytes.subspan(pos, n);
        pos += n;
        return s;
    }
};

std::uint8_t paeth(int a, int b, int c) {
    int p = a + b - c;
    int pa = std::abs(p - a);
    int pb = std::abs(p - b);
    int pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return std::uint8_t(a);
    if (pb <= pc) return std::uint8_t(b);
    return std::uint8_t(c);
}

std::vector<std::uint8_t> inflate_all(std::span<const std::uint8_t> in, std::size_t expected,
                                      std::size_t err_offset) {
    std::vector<std::uint8_t> out(expected);
    z_stream zs{};
    if (inflateInit(&zs) != Z_OK) throw Error("png: zlib init failed");
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = inflate(&zs, Z_FINISH);
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || zs.total_out != expected)
        throw DecodeError("png: corrupt compressed image data", err_offset);
    return out;
}

void append_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(std::uint8_t(v >> 24));
    out.push_back(std::uint8_t(v >> 16));
    out.push_back(std::uint8_t(v >> 8));
    out.push_back(std::uint8_t(v));
}

void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                  std::span<const std::uint8_t> payload) {
    append_be32(out, std::uint32_t(payload.size()));
    std::size_t type_at = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    uLong crc = crc32(0L, out.data() + type_at, uInt(4 + payload.size()));
    append_be32(out, std::uint32_t(crc));
}

}  // namespace

bool looks_like_png(std::span<const std::uint8_t> bytes) {
    return bytes.size() >= 8 && std::memcmp(bytes.data(), kSignature, 8) == 0;
}

RgbImage decode_png(std::span<const std::uint8_t> bytes) {
    Reader r{bytes};
    r.take(8, "signature");

    bool have_ihdr = false;
    bool have_iend = false;
    std::uint32_t width = 0, height = 0;
    int channels = 0;
    std::vector<std::uint8_t> idat;
    std::size_t first_idat_offset = 0;

    while (!have_iend) {
        if (r.remaining() == 0)
            throw DecodeError("png: stream ended before IEND", r.pos);
        std::size_t chunk_start = r.pos;
        std::uint32_t len = r.be32("chunk length");
        if (len > (std::uint32_t(1) << 30))
            throw DecodeError("png: implausible chunk length", chunk_start);
        auto type = r.take(4, "chunk type");
        auto data = r.take(len, "chunk data");
        std::uint32_t stored_crc = r.be32("chunk crc");
        uLong crc = crc32(0L, type.data(), 4);
        crc = crc32(crc, data.data(), uInt(data.size()));
        if (std::uint32_t(crc) != stored_crc)
            throw DecodeError("png: chunk crc mismatch", chunk_start);

        std::string name(type.begin(), type.end());
        if (!have_ihdr && name != "IHDR")
            throw DecodeError("png: first chunk is not IHDR", chunk_start);

        if (name == "IHDR") {
            if (have_ihdr) throw DecodeError("png: duplicate IHDR", chunk_start);
            if (len != 13) throw DecodeError("png: bad IHDR length", chunk_start);
            width = (std::uint32_t(data[0]) << 24) | (std::uint32_t(data[1]) << 16) |
                    (std::uint32_t(data[2]) << 8) | data[3];
            height = (std::uint32_t(data[4]) << 24) | (std::uint32_t(data[5]) << 16) |
                     (std::uint32_t(data[6]) << 8) | data[7];
            int bit_depth = data[8];
            int color_type = data[9];
            int compression = data[10];
            int filter = data[11];
            int interlace = data[12];
            if (width == 0 || height == 0)
                throw DecodeError("png: zero image dimension", chunk_start);
            if (std::size_t(width) * height > kMaxPixels)
                throw DecodeError("png: image too large", chunk_start);
            if (bit_depth != 8)
                throw UnsupportedFormatError("png: unsupported bit depth " +
                                             std::to_string(bit_depth) + " (only 8)");
            if (color_type == 0)
                channels = 1;
            else if (color_type == 2)
                channels = 3;
            else
                throw UnsupportedFormatError("png: unsupported color type " +
                                             std::to_string(color_type) +
                                             " (only grayscale and truecolor)");
            if (compression != 0 || filter != 0)
                throw UnsupportedFormatError("png: unsupported compression/filter method");
            if (interlace != 0)
                throw UnsupportedFormatError("png: interlaced images are not supported");
            have_ihdr = true;
        } else if (name == "IDAT") {
            if (idat.empty()) first_idat_offset = chunk_start;
            idat.insert(idat.end(), data.begin(), data.end());
        } else if (name == "IEND") {
            have_iend = true;
        } else if (name == "PLTE") {
            // legal as a suggested palette for truecolor; nothing to do
        } else if ((type[0] & 0x20) == 0) {
            throw UnsupportedFormatError("png: unhandled critical chunk " + name);
        }
        // ancillary chunks are skipped
    }

    if (idat.empty()) throw DecodeError("png: no IDAT chunk", r.pos);

    const std::size_t stride = std::size_t(width) * channels;
    std::vector<std::uint8_t> raw =
        inflate_all(idat, (stride + 1) * height, first_idat_offset);

    // undo per-row filters in place
    std::vector<std::uint8_t> pixels(stride * height);
    const int bpp = channels;
    for (std::uint32_t y = 0; y < height; ++y) {
        const std::uint8_t* src = raw.data() + std::size_t(y) * (stride + 1);
        std::uint8_t filter_type = src[0];
        const std::uint8_t* row = src + 1;
        std::uint8_t* dst = pixels.data() + std::size_t(y) * stride;
        const std::uint8_t* up = y > 0 ? dst - stride : nullptr;
        switch (filter_type) {
            case 0:
                std::memcpy(dst, row, stride);
                break;
            case 1:
                for (std::size_t i = 0; i < stride; ++i)
                    dst[i] = std::uint8_t(row[i] + (i >= std::size_t(bpp) ? dst[i - bpp] : 0));
                break;
            case 2:
                for (std::size_t i = 0; i < stride; ++i)
                    dst[i] = std::uint8_t(row[i] + (up ? up[i] : 0));
                break;
            case 3:
                for (std::size_t i = 0; i < stride; ++i) {
                    int a = i >= std::size_t(bpp) ? dst[i - bpp] : 0;
                    int b = up ? up[i] : 0;
                    dst[i] = std::uint8_t(row[i] + (a + b) / 2);
                }
                break;
            case 4:
                for (std::size_t i = 0; i < stride; ++i) {
                    int a = i >= std::size_t(bpp) ? dst[i - bpp] : 0;
                    int b = up ? up[i] : 0;
                    int c = (up && i >= std::size_t(bpp)) ? up[i - bpp] : 0;
                    dst[i] = std::uint8_t(row[i] + paeth(a, b, c));
                }
                break;
            default:
                throw DecodeError("png: invalid row filter " + std::to_string(filter_type),
                                  first_idat_offset);
        }
    }

    RgbImage img{int(width), int(height)};
    if (channels == 3) {
        img.data = std::move(pixels);
    } else {
        for (std::size_t i = 0; i < pixels.size(); ++i) {
            img.data[3 * i] = pixels[i];
            img.data[3 * i + 1] = pixels[i];
            img.data[3 * i + 2] = pixels[i];
        }
    }
    return img;
}

}  // namespace iaclahe::detail

namespace iaclahe {

std::vector<std::uint8_t> encode_png(const RgbImage& img) {
    if (img.width < 1 || img.height < 1 ||
        img.data.size() != std::size_t(img.width) * img.height * 3)
        throw Error("encode_png: malformed image");

    const std::size_t stride = std::size_t(img.width) * 3;
    std::vector<std::uint8_t> raw((stride + 1) * img.height);
    for (int y = 0; y < img.height; ++y) {
        std::uint8_t* dst = raw.data() + std::size_t(y) * (stride + 1);
        dst[0] = 0;  // filter: none
        std::memcpy(dst + 1, img.data.data() + std::size_t(y) * stride, stride);
    }

    uLongf comp_cap = compressBound(uLong(raw.size()));
    std::vector<std::uint8_t> comp(comp_cap);
    if (compress2(comp.data(), &comp_cap, raw.data(), uLong(raw.size()), 6) != Z_OK)
        throw Error("encode_png: deflate failed");
    comp.resize(comp_cap);

    std::vector<std::uint8_t> out(detail::kSignature, detail::kSignature + 8);
    std::uint8_t ihdr[13];
    ihdr[0] = std::uint8_t(std::uint32_t(img.width) >> 24);
    ihdr[1] = std::uint8_t(std::uint32_t(img.width) >> 16);
    ihdr[2] = std::uint8_t(std::uint32_t(img.width) >> 8);
    ihdr[3] = std::uint8_t(img.width);
    ihdr[4] = std::uint8_t(std::uint32_t(img.height) >> 24);
    ihdr[5] = std::uint8_t(std::uint32_t(img.height) >> 16);
    ihdr[6] = std::uint8_t(std::uint32_t(img.height) >> 8);
    ihdr[7] = std::uint8_t(img.height);
    ihdr[8] = 8;   // bit depth
    ihdr[9] = 2;   // truecolor
    ihdr[10] = 0;  // compression
    ihdr[11] = 0;  // filter
    ihdr[12] = 0;  // no interlace
    detail::append_chunk(out, "IHDR", ihdr);
    detail::append_chunk(out, "IDAT", comp);
    detail::append_chunk(out, "IEND", {});
    return out;
}

}  // namespace iaclahe
