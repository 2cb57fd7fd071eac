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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "iaclahe/autodiff.hpp"

namespace iaclahe {

// Lightweight clip-limit estimator:
//   y (any size) -> resize 256x256, /255
//     -> conv3x3 stride 2 pad 1, no bias (K channels) -> hard-swish
//     -> conv1x1, no bias -> C_feat (128x128)
//   local map:    sigmoid(C_feat), bilinearly resized to the tile grid
//   global scale: softplus(fc2(swish(fc1(mean(C_feat)))))
//   clip limits:  C_ij = c_global * local_ij   (always positive)
// Forward and backward are hand-written; no autodiff framework involved.

inline constexpr int kEstimatorInput = 256;
inline constexpr int kFeatureSize = 128;   // after the stride-2 conv
inline constexpr int kDefaultChannels = 16;
inline constexpr int kDefaultHidden = 16;

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
inline double swish(double z) { return z * sigmoid(z); }
inline double softplus(double z) {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}
inline double hard_swish(double z) {
    double t = z + 3.0;
    t = t < 0.0 ? 0.0 : (t > 6.0 ? 6.0 : t);
    return z * t / 6.0;
}
/// One-sided at the corners: 0 for z <= -3, 1 for z >= 3.
inline double hard_swish_deriv(double z) {
    if (z <= -3.0) return 0.0;
    if (z >= 3.0) return 1.0;
    return (2.0 * z + 3.0) / 6.0;
}

/// Full parameter set, stored flat so the optimizer, checkpoint code and
/// finite-difference checks can treat it as one vector. Flat layout (and
/// checkpoint order): conv3_w [k][ky][kx], conv1_w, fc1_w, fc1_b, fc2_w,
/// fc2_b. 209 scalars for the default (K,H) = (16,16).
class EstimatorParams {
public:
    explicit EstimatorParams(int channels = kDefaultChannels, int hidden = kDefaultHidden);

    int channels() const { return channels_; }
    int hidden() const { return hidden_; }

    std::span<double> flat() { return flat_; }
    std::span<const double> flat() const { return flat_; }

    std::span<double> conv3_w() { return {flat_.data(), std::size_t(channels_) * 9}; }
    std::span<const double> conv3_w() const { return {flat_.data(), std::size_t(channels_) * 9}; }

    std::span<double> conv1_w() { return {flat_.data() + channels_ * 9, std::size_t(channels_)}; }
    std::span<const double> conv1_w() const {
        return {flat_.data() + channels_ * 9, std::size_t(channels_)};
    }

    std::span<double> fc1_w() { return {flat_.data() + channels_ * 10, std::size_t(hidden_)}; }
    std::span<const double> fc1_w() const {
        return {flat_.data() + channels_ * 10, std::size_t(hidden_)};
    }

    std::span<double> fc1_b() {
        return {flat_.data() + channels_ * 10 + hidden_, std::size_t(hidden_)};
    }
    std::span<const double> fc1_b() const {
        return {flat_.data() + channels_ * 10 + hidden_, std::size_t(hidden_)};
    }

    std::span<double> fc2_w() {
        return {flat_.data() + channels_ * 10 + 2 * hidden_, std::size_t(hidden_)};
    }
    std::span<const double> fc2_w() const {
        return {flat_.data() + channels_ * 10 + 2 * hidden_, std::size_t(hidden_)};
    }

    double& fc2_b() { return flat_.back(); }
    double fc2_b() const { return flat_.back(); }

private:
    int channels_;
    int hidden_;
    std::vector<double> flat_;
};

/// Gradients have the same shape as the parameters.
using ParamGrads = EstimatorParams;

/// 9K + K + H + H + H + 1.
std::size_t param_count(int channels, int hidden);
std::size_t param_count(const EstimatorParams& p);

/// Fan-in-scaled uniform weights (U(-1/sqrt(fan_in), 1/sqrt(fan_in))) from a
/// seeded deterministic generator; biases zero.
EstimatorParams init_params(std::uint64_t seed, int channels = kDefaultChannels,
                            int hidden = kDefaultHidden);

/// Bilinear resize to 256x256 then scale into [0,1].
RealPlane preprocess(const Plane& y);

/// Everything the manual backward pass needs, including a copy of the
/// parameters the forward ran with.
struct ActCache {
    EstimatorParams params;
    TileGrid grid;
    RealPlane input;                 // 256x256, [0,1]
    std::vector<double> pre_conv;    // K x 128 x 128, pre hard-swish
    std::vector<double> act_conv;    // K x 128 x 128, post hard-swish
    std::vector<double> c_feat;      // 128 x 128
    std::vector<double> c_local;     // 128 x 128, sigmoid(c_feat)
    RealPlane local_resized;         // cols x rows
    double pooled = 0.0;             // mean(c_feat)
    std::vector<double> pre_fc1;     // H
    std::vector<double> hidden;      // H, swish(pre_fc1)
    double mlp_out = 0.0;
    double c_global = 0.0;           // softplus(mlp_out)
};

struct EstimatorOutput {
    ClipLimitMap clip_map;
    ActCache cache;
};

/// `input` must be 256x256 (use preprocess()).
EstimatorOutput estimator_forward(const RealPlane& input, TileGrid grid,
                                  const EstimatorParams& params);

/// Exact reverse-mode gradients of sum(upstream . C) w.r.t. every parameter.
ParamGrads estimator_backward(const ActCache& cache, const ClipGrad& upstream);

// Checkpoint file: "IACL" magic, then little-endian u32 version (=1), u32 K,
// u32 H, then all parameters as little-endian IEEE-754 doubles in flat order.
void save_checkpoint(const EstimatorParams& params, const std::filesystem::path& path);
EstimatorParams load_checkpoint(const std::filesystem::path& path);

}  // namespace iaclahe
