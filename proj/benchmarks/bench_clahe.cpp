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

#include <benchmark/benchmark.h>

#include "iaclahe/autodiff.hpp"
#include "iaclahe/clahe.hpp"
#include "iaclahe/estimator.hpp"
#include "iaclahe/image.hpp"
#include "iaclahe/synth.hpp"

using namespace iaclahe;

namespace {

Plane test_plane(int w, int h) {
    static Plane fullhd = rgb_to_ycbcr(synth_rgb(1920, 1080, 1)).y;
    if (w == fullhd.width && h == fullhd.height) return fullhd;
    Plane p = rgb_to_ycbcr(synth_rgb(w, h, 1)).y;
    return p;
}

void BM_clahe_fixed(benchmark::State& state) {
    const int grid_n = int(state.range(0));
    const Plane y = test_plane(1920, 1080);
    const TileGrid g(grid_n, grid_n);
    const ClipLimitMap c = ClipLimitMap::uniform(g, 2.0);
    for (auto _ : state) {
        Plane out = clahe(y, g, c);
        benchmark::DoNotOptimize(out.data.data());
    }
}
BENCHMARK(BM_clahe_fixed)->Arg(1)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_estimator_inference(benchmark::State& state) {
    const Plane y = test_plane(1920, 1080);
    const EstimatorParams params = init_params(3);
    const TileGrid g(8, 8);
    for (auto _ : state) {
        EstimatorOutput out = estimator_forward(preprocess(y), g, params);
        benchmark::DoNotOptimize(out.clip_map.values.data());
    }
}
BENCHMARK(BM_estimator_inference)->Unit(benchmark::kMillisecond);

void BM_iaclahe_full(benchmark::State& state) {
    const Plane y = test_plane(1920, 1080);
    const EstimatorParams params = init_params(3);
    const TileGrid g(8, 8);
    for (auto _ : state) {
        EstimatorOutput est = estimator_forward(preprocess(y), g, params);
        Plane out = clahe(y, g, est.clip_map);
        benchmark::DoNotOptimize(out.data.data());
    }
}
BENCHMARK(BM_iaclahe_full)->Unit(benchmark::kMillisecond);

void BM_forward_backward(benchmark::State& state) {
    const Plane clean = rgb_to_ycbcr(synth_rgb(640, 640, 2)).y;
    const EstimatorParams params = init_params(4);
    const TileGrid g(8, 8);
    for (auto _ : state) {
        EstimatorOutput est = estimator_forward(preprocess(clean), g, params);
        TapeForward fwd = clahe_forward_tape(clean, g, est.clip_map);
        L1Loss l1 = l1_loss(fwd.output, clean);
        ClipGrad d_clip = clahe_backward(fwd.tape, l1.grad);
        ParamGrads grads = estimator_backward(est.cache, d_clip);
        benchmark::DoNotOptimize(grads.flat().data());
    }
}
BENCHMARK(BM_forward_backward)->Unit(benchmark::kMillisecond);

void BM_png_roundtrip(benchmark::State& state) {
    const RgbImage img = synth_rgb(512, 512, 5);
    for (auto _ : state) {
        RgbImage back = decode_image(encode_png(img));
        benchmark::DoNotOptimize(back.data.data());
    }
}
BENCHMARK(BM_png_roundtrip)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
