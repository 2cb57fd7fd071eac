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

#include "iaclahe/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>

namespace iaclahe {

Plane augment(const Plane& y, double alpha, double beta) {
    if (!(alpha >= -0.5 && alpha <= 0.9))
        throw Error("augment: alpha must be in [-0.5, 0.9]");
    if (!(beta >= -60.0 && beta <= 60.0))
        throw Error("augment: beta must be in [-60, 60]");

    Plane out(y.width, y.height);
    const double scale = 1.0 - alpha;
    for (std::size_t i = 0; i < y.data.size(); ++i) {
        const double v = 128.0 + scale * (double(y.data[i]) - 128.0) + beta;
        long r = std::lround(v);
        out.data[i] = std::uint8_t(r < 0 ? 0 : (r > 255 ? 255 : r));
    }
    return out;
}

TileGrid sample_tile_grid(Rng& rng, std::span<const TileGrid> choices) {
    if (choices.empty()) throw Error("sample_tile_grid: empty choice set");
    return choices[std::size_t(rng.uniform_int(int(choices.size())))];
}

std::vector<TileGrid> default_grid_choices() {
    return {TileGrid(1, 1), TileGrid(2, 2), TileGrid(4, 4), TileGrid(8, 8), TileGrid(16, 16)};
}

bool adam_step(EstimatorParams& params, const ParamGrads& grads, AdamState& state, double lr) {
    auto g = grads.flat();
    auto p = params.flat();
    if (g.size() != p.size() || state.m.size() != p.size())
        throw Error("adam_step: shape mismatch");

    for (double v : g)
        if (!std::isfinite(v)) return false;

    state.step += 1;
    const double b1 = state.beta1, b2 = state.beta2;
    const double bc1 = 1.0 - std::pow(b1, double(state.step));
    const double bc2 = 1.0 - std::pow(b2, double(state.step));
    for (std::size_t i = 0; i < p.size(); ++i) {
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g[i];
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g[i] * g[i];
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        p[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
    return true;
}

namespace {

// decoded, resized clean Y channel
struct CleanImage {
    Plane y;
};

std::vector<CleanImage> load_dataset(const TrainConfig& cfg) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(cfg.data_dir))
        throw Error("train: data directory does not exist: " + cfg.data_dir.string());

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(cfg.data_dir))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    std::vector<CleanImage> images;
    for (const auto& f : files) {
        RgbImage img;
        try {
            img = load_image(f);
        } catch (const Error& e) {
            std::cerr << "warning: skipping " << f.string() << ": " << e.what() << "\n";
            continue;
        }
        if (img.width != cfg.image_size || img.height != cfg.image_size) {
            RgbImage resized(cfg.image_size, cfg.image_size);
            for (int ch = 0; ch < 3; ++ch) {
                RealPlane channel(img.width, img.height);
                for (std::size_t i = 0; i < channel.data.size(); ++i)
                    channel.data[i] = double(img.data[3 * i + ch]);
                RealPlane r = resize_bilinear(channel, cfg.image_size, cfg.image_size);
                for (std::size_t i = 0; i < r.data.size(); ++i) {
                    long v = std::lround(r.data[i]);
                    resized.data[3 * i + ch] = std::uint8_t(v < 0 ? 0 : (v > 255 ? 255 : v));
                }
            }
            img = std::move(resized);
        }
        images.push_back(CleanImage{rgb_to_ycbcr(img).y});
    }
    if (images.empty())
        throw Error("train: no decodable images in " + cfg.data_dir.string());
    return images;
}

void validate_config(const TrainConfig& cfg) {
    if (cfg.iterations < 0) throw Error("train: iterations must be >= 0");
    if (!(cfg.lr > 0.0)) throw Error("train: learning rate must be positive");
    if (cfg.batch != 1) throw Error("train: only batch size 1 is supported");
    if (cfg.grid_choices.empty()) throw Error("train: grid_choices must be non-empty");
    if (cfg.image_size < 1) throw Error("train: image_size must be >= 1");
    if (cfg.log_every < 1) throw Error("train: log_every must be >= 1");
    if (!(cfg.alpha_range[0] <= cfg.alpha_range[1]) || cfg.alpha_range[0] < -0.5 ||
        cfg.alpha_range[1] > 0.9)
        throw Error("train: alpha_range must be an ordered subset of [-0.5, 0.9]");
    if (!(cfg.beta_range[0] <= cfg.beta_range[1]) || cfg.beta_range[0] < -60.0 ||
        cfg.beta_range[1] > 60.0)
        throw Error("train: beta_range must be an ordered subset of [-60, 60]");
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const TrainLogger& logger) {
    validate_config(cfg);
    const std::vector<CleanImage> images = load_dataset(cfg);

    Rng rng(cfg.seed);
    EstimatorParams params = init_params(cfg.seed);
    AdamState adam(params.flat().size());

    std::vector<std::size_t> order(images.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    TrainResult result{params, 0.0, 0.0, 0};
    for (long it = 1; it <= cfg.iterations; ++it) {
        const auto t0 = std::chrono::steady_clock::now();

        const std::size_t slot = std::size_t(it - 1) % images.size();
        if (slot == 0) rng.shuffle(order);
        const Plane& clean_y = images[order[slot]].y;

        // per-iteration draw order is fixed: alpha, beta, grid
        const double alpha = rng.uniform(cfg.alpha_range[0], cfg.alpha_range[1]);
        const double beta = rng.uniform(cfg.beta_range[0], cfg.beta_range[1]);
        const TileGrid grid = sample_tile_grid(rng, cfg.grid_choices);

        const Plane degraded = augment(clean_y, alpha, beta);
        EstimatorOutput est = estimator_forward(preprocess(degraded), grid, params);
        TapeForward fwd = clahe_forward_tape(degraded, grid, est.clip_map);
        L1Loss l1 = l1_loss(fwd.output, clean_y);
        ClipGrad d_clip = clahe_backward(fwd.tape, l1.grad);
        ParamGrads grads = estimator_backward(est.cache, d_clip);
        if (!adam_step(params, grads, adam, cfg.lr))
            std::cerr << "warning: non-finite gradient at iteration " << it
                      << "; parameters left untouched\n";

        if (it == 1) result.first_loss = l1.loss;
        result.final_loss = l1.loss;
        result.iterations_run = it;

        if (logger && (it == 1 || it % cfg.log_every == 0)) {
            const auto t1 = std::chrono::steady_clock::now();
            const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            logger(TrainLogRecord{it, l1.loss, grid, ms});
        }
    }

    result.params = params;
    if (!cfg.checkpoint_out.empty()) save_checkpoint(params, cfg.checkpoint_out);
    return result;
}

}  // namespace iaclahe
