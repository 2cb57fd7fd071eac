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

#include "iaclahe/estimator.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "iaclahe/rng.hpp"

namespace iaclahe {

namespace {

constexpr int kIn = kEstimatorInput;
constexpr int kF = kFeatureSize;
constexpr std::size_t kFPix = std::size_t(kF) * kF;

void write_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(std::uint8_t(v));
    out.push_back(std::uint8_t(v >> 8));
    out.push_back(std::uint8_t(v >> 16));
    out.push_back(std::uint8_t(v >> 24));
}

std::uint32_t read_u32le(const std::uint8_t* p) {
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
           (std::uint32_t(p[3]) << 24);
}

}  // namespace

EstimatorParams::EstimatorParams(int channels, int hidden)
    : channels_(channels), hidden_(hidden), flat_(param_count(channels, hidden), 0.0) {
    if (channels < 1 || hidden < 1)
        throw Error("EstimatorParams: channels and hidden width must be >= 1");
}

std::size_t param_count(int channels, int hidden) {
    // conv3x3 (9K) + conv1x1 (K) + fc1 (H+H) + fc2 (H+1)
    return std::size_t(channels) * 9 + std::size_t(channels) + 2 * std::size_t(hidden) +
           std::size_t(hidden) + 1;
}

std::size_t param_count(const EstimatorParams& p) { return p.flat().size(); }

EstimatorParams init_params(std::uint64_t seed, int channels, int hidden) {
    EstimatorParams p(channels, hidden);
    Rng rng(seed);
    const double conv3_bound = 1.0 / 3.0;  // fan-in 9
    const double conv1_bound = 1.0 / std::sqrt(double(channels));
    const double fc1_bound = 1.0;          // fan-in 1 (pooled scalar)
    const double fc2_bound = 1.0 / std::sqrt(double(hidden));
    for (double& w : p.conv3_w()) w = rng.uniform(-conv3_bound, conv3_bound);
    for (double& w : p.conv1_w()) w = rng.uniform(-conv1_bound, conv1_bound);
    for (double& w : p.fc1_w()) w = rng.uniform(-fc1_bound, fc1_bound);
    for (double& w : p.fc2_w()) w = rng.uniform(-fc2_bound, fc2_bound);
    // biases stay zero
    return p;
}

RealPlane preprocess(const Plane& y) {
    if (y.width < 1 || y.height < 1) throw Error("preprocess: empty plane");
    RealPlane resized = resize_bilinear(to_real(y), kIn, kIn);
    for (double& v : resized.data) v /= 255.0;
    return resized;
}

EstimatorOutput estimator_forward(const RealPlane& input, TileGrid grid,
                                  const EstimatorParams& params) {
    if (input.width != kIn || input.height != kIn)
        throw Error("estimator_forward: input must be 256x256 (use preprocess)");

    const int K = params.channels();
    const int H = params.hidden();

    EstimatorOutput out;
    ActCache& c = out.cache;
    c.params = params;
    c.grid = grid;
    c.input = input;
    c.pre_conv.resize(std::size_t(K) * kFPix);
    c.act_conv.resize(std::size_t(K) * kFPix);
    c.c_feat.assign(kFPix, 0.0);
    c.c_local.resize(kFPix);

    // conv3x3, stride 2, pad 1, no bias
    const double* x = input.data.data();
    auto conv3 = params.conv3_w();
    for (int k = 0; k < K; ++k) {
        const double* w = conv3.data() + std::size_t(k) * 9;
        double* pre = c.pre_conv.data() + std::size_t(k) * kFPix;
        double* act = c.act_conv.data() + std::size_t(k) * kFPix;
        for (int oy = 0; oy < kF; ++oy) {
            const int iy0 = 2 * oy - 1;
            for (int ox = 0; ox < kF; ++ox) {
                const int ix0 = 2 * ox - 1;
                double s = 0.0;
                for (int ky = 0; ky < 3; ++ky) {
                    const int iy = iy0 + ky;
                    if (iy < 0 || iy >= kIn) continue;
                    const double* row = x + std::size_t(iy) * kIn;
                    for (int kx = 0; kx < 3; ++kx) {
                        const int ix = ix0 + kx;
                        if (ix < 0 || ix >= kIn) continue;
                        s += w[ky * 3 + kx] * row[ix];
                    }
                }
                pre[oy * kF + ox] = s;
                act[oy * kF + ox] = hard_swish(s);
            }
        }
    }

    // conv1x1, no bias -> single-channel feature map
    auto conv1 = params.conv1_w();
    for (int k = 0; k < K; ++k) {
        const double wk = conv1[std::size_t(k)];
        const double* act = c.act_conv.data() + std::size_t(k) * kFPix;
        for (std::size_t i = 0; i < kFPix; ++i) c.c_feat[i] += wk * act[i];
    }

    for (std::size_t i = 0; i < kFPix; ++i) c.c_local[i] = sigmoid(c.c_feat[i]);

    // local map resized to the tile grid
    RealPlane local(kF, kF);
    local.data = c.c_local;
    c.local_resized = resize_bilinear(local, grid.cols, grid.rows);

    // global scale: adaptive average pooling degenerates to a mean here
    double sum = 0.0;
    for (std::size_t i = 0; i < kFPix; ++i) sum += c.c_feat[i];
    c.pooled = sum / double(kFPix);

    c.pre_fc1.resize(std::size_t(H));
    c.hidden.resize(std::size_t(H));
    auto fc1_w = params.fc1_w();
    auto fc1_b = params.fc1_b();
    for (int h = 0; h < H; ++h) {
        c.pre_fc1[std::size_t(h)] = fc1_w[std::size_t(h)] * c.pooled + fc1_b[std::size_t(h)];
        c.hidden[std::size_t(h)] = swish(c.pre_fc1[std::size_t(h)]);
    }
    auto fc2_w = params.fc2_w();
    double mlp = params.fc2_b();
    for (int h = 0; h < H; ++h) mlp += fc2_w[std::size_t(h)] * c.hidden[std::size_t(h)];
    c.mlp_out = mlp;
    c.c_global = softplus(mlp);

    out.clip_map.grid = grid;
    out.clip_map.values.resize(std::size_t(grid.tile_count()));
    for (int i = 0; i < grid.rows; ++i)
        for (int j = 0; j < grid.cols; ++j)
            out.clip_map.at(i, j) = c.c_global * c.local_resized.at(j, i);
    return out;
}

ParamGrads estimator_backward(const ActCache& c, const ClipGrad& upstream) {
    if (upstream.grid != c.grid)
        throw Error("estimator_backward: gradient grid does not match the cache");

    const EstimatorParams& params = c.params;
    const int K = params.channels();
    const int H = params.hidden();
    ParamGrads g(K, H);

    // product C_ij = c_global * local_ij
    double d_global = 0.0;
    RealPlane d_local_resized(c.grid.cols, c.grid.rows);
    for (int i = 0; i < c.grid.rows; ++i) {
        for (int j = 0; j < c.grid.cols; ++j) {
            const double u = upstream.at(i, j);
            d_global += u * c.local_resized.at(j, i);
            d_local_resized.at(j, i) = u * c.c_global;
        }
    }

    // MLP
    const double d_mlp = d_global * sigmoid(c.mlp_out);  // softplus'
    g.fc2_b() = d_mlp;
    auto fc2_w = params.fc2_w();
    auto fc1_w = params.fc1_w();
    double d_pooled = 0.0;
    for (int h = 0; h < H; ++h) {
        g.fc2_w()[std::size_t(h)] = d_mlp * c.hidden[std::size_t(h)];
        const double d_hidden = d_mlp * fc2_w[std::size_t(h)];
        const double z = c.pre_fc1[std::size_t(h)];
        const double s = sigmoid(z);
        const double d_pre = d_hidden * (s * (1.0 + z * (1.0 - s)));  // swish'
        g.fc1_w()[std::size_t(h)] = d_pre * c.pooled;
        g.fc1_b()[std::size_t(h)] = d_pre;
        d_pooled += d_pre * fc1_w[std::size_t(h)];
    }

    // feature-map gradient: pooling fan-out plus the sigmoid/resize branch
    std::vector<double> d_feat(kFPix, d_pooled / double(kFPix));

    std::vector<double> d_local(kFPix, 0.0);
    const ResizeAxis ax = make_resize_axis(kF, c.grid.cols);
    const ResizeAxis ay = make_resize_axis(kF, c.grid.rows);
    for (int i = 0; i < c.grid.rows; ++i) {
        const double fy = ay.frac[i];
        for (int j = 0; j < c.grid.cols; ++j) {
            const double v = d_local_resized.at(j, i);
            const double fx = ax.frac[j];
            d_local[std::size_t(ay.lo[i]) * kF + ax.lo[j]] += v * (1.0 - fy) * (1.0 - fx);
            d_local[std::size_t(ay.lo[i]) * kF + ax.hi[j]] += v * (1.0 - fy) * fx;
            d_local[std::size_t(ay.hi[i]) * kF + ax.lo[j]] += v * fy * (1.0 - fx);
            d_local[std::size_t(ay.hi[i]) * kF + ax.hi[j]] += v * fy * fx;
        }
    }
    for (std::size_t i = 0; i < kFPix; ++i) {
        const double s = c.c_local[i];
        d_feat[i] += d_local[i] * s * (1.0 - s);
    }

    // conv1x1
    auto conv1 = params.conv1_w();
    for (int k = 0; k < K; ++k) {
        const double* act = c.act_conv.data() + std::size_t(k) * kFPix;
        double s = 0.0;
        for (std::size_t i = 0; i < kFPix; ++i) s += d_feat[i] * act[i];
        g.conv1_w()[std::size_t(k)] = s;
    }

    // conv3x3 weights via the hard-swish chain; nine accumulators per channel
    const double* x = c.input.data.data();
    for (int k = 0; k < K; ++k) {
        const double wk = conv1[std::size_t(k)];
        const double* pre = c.pre_conv.data() + std::size_t(k) * kFPix;
        double acc[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
        for (int oy = 0; oy < kF; ++oy) {
            const int iy0 = 2 * oy - 1;
            for (int ox = 0; ox < kF; ++ox) {
                const double d_pre =
                    d_feat[std::size_t(oy) * kF + ox] * wk * hard_swish_deriv(pre[oy * kF + ox]);
                if (d_pre == 0.0) continue;
                const int ix0 = 2 * ox - 1;
                for (int ky = 0; ky < 3; ++ky) {
                    const int iy = iy0 + ky;
                    if (iy < 0 || iy >= kIn) continue;
                    const double* row = x + std::size_t(iy) * kIn;
                    for (int kx = 0; kx < 3; ++kx) {
                        const int ix = ix0 + kx;
                        if (ix < 0 || ix >= kIn) continue;
                        acc[ky * 3 + kx] += d_pre * row[ix];
                    }
                }
            }
        }
        for (int t = 0; t < 9; ++t) g.conv3_w()[std::size_t(k) * 9 + t] = acc[t];
    }
    return g;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {
constexpr char kMagic[4] = {'I', 'A', 'C', 'L'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_checkpoint(const EstimatorParams& params, const std::filesystem::path& path) {
    std::vector<std::uint8_t> out;
    out.reserve(16 + params.flat().size() * 8);
    out.insert(out.end(), kMagic, kMagic + 4);
    write_u32le(out, kVersion);
    write_u32le(out, std::uint32_t(params.channels()));
    write_u32le(out, std::uint32_t(params.hidden()));
    for (double v : params.flat()) {
        const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) out.push_back(std::uint8_t(bits >> (8 * i)));
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("save_checkpoint: cannot create " + path.string());
    f.write(reinterpret_cast<const char*>(out.data()), std::streamsize(out.size()));
    if (!f) throw Error("save_checkpoint: write failed on " + path.string());
}

EstimatorParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("load_checkpoint: cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());

    if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw CheckpointError("corrupt checkpoint: bad magic in " + path.string());
    if (read_u32le(bytes.data() + 4) != kVersion)
        throw CheckpointError("corrupt checkpoint: unsupported format version in " +
                              path.string());
    const std::uint32_t channels = read_u32le(bytes.data() + 8);
    const std::uint32_t hidden = read_u32le(bytes.data() + 12);
    if (channels < 1 || channels > 4096 || hidden < 1 || hidden > 4096)
        throw CheckpointError("corrupt checkpoint: implausible dimensions in " + path.string());

    const std::size_t want = param_count(int(channels), int(hidden));
    if (bytes.size() != 16 + want * 8)
        throw CheckpointError("corrupt checkpoint: truncated or oversized payload in " +
                              path.string());

    EstimatorParams params{int(channels), int(hidden)};
    for (std::size_t i = 0; i < want; ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b)
            bits |= std::uint64_t(bytes[16 + i * 8 + b]) << (8 * b);
        params.flat()[i] = std::bit_cast<double>(bits);
    }
    return params;
}

}  // namespace iaclahe
