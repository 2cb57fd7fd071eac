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

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "iaclahe/estimator.hpp"
#include "iaclahe/rng.hpp"

namespace iaclahe {

/// Mid-gray-anchored contrast compression followed by an intensity shift:
/// y' = clamp(round(128 + (1-alpha)*(y-128) + beta), 0, 255).
/// Requires alpha in [-0.5, 0.9] and beta in [-60, 60].
Plane augment(const Plane& y, double alpha, double beta);

/// Uniform draw from `choices`.
TileGrid sample_tile_grid(Rng& rng, std::span<const TileGrid> choices);

/// (1,1), (2,2), (4,4), (8,8), (16,16).
std::vector<TileGrid> default_grid_choices();

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update in place. Returns false and leaves both
/// `params` and `state` untouched when the gradient has non-finite entries.
bool adam_step(EstimatorParams& params, const ParamGrads& grads, AdamState& state, double lr);

struct TrainConfig {
    std::filesystem::path data_dir;
    long iterations = 17680;
    double lr = 1e-4;
    int batch = 1;  // the trainer is strictly batch-1
    std::uint64_t seed = 0;
    std::vector<TileGrid> grid_choices = default_grid_choices();
    std::array<double, 2> alpha_range{-0.5, 0.9};
    std::array<double, 2> beta_range{-60.0, 60.0};
    int image_size = 640;
    std::filesystem::path checkpoint_out;  // empty: do not write
    long log_every = 100;
};

struct TrainLogRecord {
    long iteration = 0;
    double loss = 0.0;
    TileGrid grid;
    double millis = 0.0;
};

struct TrainResult {
    EstimatorParams params;
    double first_loss = 0.0;
    double final_loss = 0.0;
    long iterations_run = 0;
};

using TrainLogger = std::function<void(const TrainLogRecord&)>;

/// Runs the end-to-end loop: cycle shuffled clean images, resize to
/// image_size, take the Y channel, degrade with augment(), estimate clip
/// limits, differentiable CLAHE, L1 against the clean Y, backprop, Adam.
/// The logger fires at iteration 1 and every log_every iterations.
/// (seed, config, dataset) fully determines the parameter trajectory.
TrainResult train(const TrainConfig& cfg, const TrainLogger& logger = {});

}  // namespace iaclahe
