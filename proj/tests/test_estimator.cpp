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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "iaclahe/estimator.hpp"
#include "iaclahe/rng.hpp"
#include "iaclahe/synth.hpp"
#include "support/testutil.hpp"

using namespace iaclahe;

namespace {

// Nested-loop reference network, independent of the library implementation:
// no shared conv/resize code, everything indexed from first principles.
std::vector<double> reference_forward(const RealPlane& x, TileGrid grid,
                                      const EstimatorParams& p) {
    const int K = p.channels(), H = p.hidden();
    // conv3x3 stride 2 pad 1 + hard-swish + conv1x1
    std::vector<double> feat(128 * 128, 0.0);
    for (int oy = 0; oy < 128; ++oy) {
        for (int ox = 0; ox < 128; ++ox) {
            double acc = 0.0;
            for (int k = 0; k < K; ++k) {
                double s = 0.0;
                for (int ky = 0; ky < 3; ++ky)
                    for (int kx = 0; kx < 3; ++kx) {
                        const int iy = 2 * oy - 1 + ky, ix = 2 * ox - 1 + kx;
                        if (iy < 0 || iy >= 256 || ix < 0 || ix >= 256) continue;
                        s += p.conv3_w()[std::size_t(k) * 9 + ky * 3 + kx] * x.at(ix, iy);
                    }
                const double t = std::min(6.0, std::max(0.0, s + 3.0));
                acc += p.conv1_w()[std::size_t(k)] * (s * t / 6.0);
            }
            feat[std::size_t(oy) * 128 + ox] = acc;
        }
    }

    double pooled = 0.0;
    for (double v : feat) pooled += v;
    pooled /= 16384.0;

    double out = p.fc2_b();
    for (int h = 0; h < H; ++h) {
        const double z = p.fc1_w()[std::size_t(h)] * pooled + p.fc1_b()[std::size_t(h)];
        out += p.fc2_w()[std::size_t(h)] * (z / (1.0 + std::exp(-z)));
    }
    const double c_global = std::log(1.0 + std::exp(out));

    // sigmoid local map resized with align-corners-false bilinear sampling
    std::vector<double> result(std::size_t(grid.tile_count()));
    for (int i = 0; i < grid.rows; ++i) {
        double sy = (double(i) + 0.5) * (128.0 / grid.rows) - 0.5;
        sy = std::min(127.0, std::max(0.0, sy));
        const int y0 = std::min(126, int(sy));
        const double fy = sy - y0;
        for (int j = 0; j < grid.cols; ++j) {
            double sx = (double(j) + 0.5) * (128.0 / grid.cols) - 0.5;
            sx = std::min(127.0, std::max(0.0, sx));
            const int x0 = std::min(126, int(sx));
            const double fx = sx - x0;
            auto local = [&](int yy, int xx) {
                return 1.0 / (1.0 + std::exp(-feat[std::size_t(yy) * 128 + xx]));
            };
            const double top = local(y0, x0) * (1 - fx) + local(y0, x0 + 1) * fx;
            const double bot = local(y0 + 1, x0) * (1 - fx) + local(y0 + 1, x0 + 1) * fx;
            result[std::size_t(i) * grid.cols + j] = c_global * (top * (1 - fy) + bot * fy);
        }
    }
    return result;
}

RealPlane random_input(std::uint64_t seed) { return preprocess(synth_plane(200, 160, seed)); }

EstimatorParams random_params(std::uint64_t seed, double scale = 1.0) {
    EstimatorParams p = init_params(seed);
    if (scale != 1.0)
        for (double& v : p.flat()) v *= scale;
    return p;
}

// d(sum(upstream . C))/dtheta via central differences
double fd_scalar(const RealPlane& x, TileGrid grid, EstimatorParams p, const ClipGrad& up,
                 std::size_t idx, double eps) {
    auto eval = [&](double v) {
        const double saved = p.flat()[idx];
        p.flat()[idx] = v;
        const EstimatorOutput out = estimator_forward(x, grid, p);
        p.flat()[idx] = saved;
        double s = 0.0;
        for (std::size_t t = 0; t < out.clip_map.values.size(); ++t)
            s += up.values[t] * out.clip_map.values[t];
        return s;
    };
    const double v0 = p.flat()[idx];
    return (eval(v0 + eps) - eval(v0 - eps)) / (2.0 * eps);
}

}  // namespace

TEST_CASE("activation definitions") {
    CHECK(hard_swish(0.0) == 0.0);
    CHECK(hard_swish(3.0) == 3.0);
    CHECK(hard_swish(-3.0) == 0.0);
    CHECK(hard_swish(1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(hard_swish(10.0) == 10.0);
    CHECK(hard_swish(-10.0) == 0.0);
    CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(swish(0.0) == 0.0);
}

TEST_CASE("zero parameters give the closed-form clip map") {
    const double expected = 0.5 * std::log(2.0);
    EstimatorParams zero;
    const RealPlane x = random_input(3);
    for (TileGrid g : {TileGrid(1, 1), TileGrid(2, 2), TileGrid(8, 8), TileGrid(16, 16),
                       TileGrid(5, 3)}) {
        const EstimatorOutput out = estimator_forward(x, g, zero);
        for (double v : out.clip_map.values)
            CHECK(std::abs(v - expected) <= 1e-9);
    }
}

TEST_CASE("forward matches a nested-loop reference network") {
    Rng rng(55);
    for (int n = 0; n < 3; ++n) {
        const EstimatorParams p = random_params(rng.next_u64());
        const RealPlane x = random_input(rng.next_u64());
        const TileGrid g = n == 0 ? TileGrid(8, 8) : TileGrid(1 + rng.uniform_int(10),
                                                              1 + rng.uniform_int(10));
        const EstimatorOutput out = estimator_forward(x, g, p);
        const std::vector<double> ref = reference_forward(x, g, p);
        for (std::size_t t = 0; t < ref.size(); ++t) {
            CHECK(std::abs(out.clip_map.values[t] - ref[t]) <=
                  1e-6 * std::max(1.0, std::abs(ref[t])));
        }
    }
}

TEST_CASE("clip limits are always positive") {
    Rng rng(66);
    for (int n = 0; n < 5; ++n) {
        const EstimatorParams p = random_params(rng.next_u64(), rng.uniform(0.1, 3.0));
        const EstimatorOutput out =
            estimator_forward(random_input(rng.next_u64()), TileGrid(8, 8), p);
        for (double v : out.clip_map.values) {
            CHECK(v > 0.0);
            CHECK(std::isfinite(v));
            CHECK(v < out.cache.c_global);  // sigmoid keeps the local factor below 1
        }
    }
}

TEST_CASE("local map is grid independent") {
    const EstimatorParams p = random_params(7);
    const RealPlane x = random_input(8);
    const EstimatorOutput a = estimator_forward(x, TileGrid(4, 4), p);
    const EstimatorOutput b = estimator_forward(x, TileGrid(16, 16), p);
    CHECK(a.cache.c_local == b.cache.c_local);
    CHECK(a.cache.c_global == b.cache.c_global);

    // the map for any grid is the resized local map times the same scalar
    RealPlane local(kFeatureSize, kFeatureSize);
    local.data = a.cache.c_local;
    const RealPlane resized = resize_bilinear(local, 16, 16);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j)
            CHECK(b.clip_map.at(i, j) == a.cache.c_global * resized.at(j, i));
}

TEST_CASE("forward is deterministic") {
    const EstimatorParams p = random_params(11);
    const RealPlane x = random_input(12);
    const EstimatorOutput a = estimator_forward(x, TileGrid(8, 8), p);
    const EstimatorOutput b = estimator_forward(x, TileGrid(8, 8), p);
    CHECK(a.clip_map.values == b.clip_map.values);
    CHECK(init_params(99).flat()[0] == init_params(99).flat()[0]);
}

TEST_CASE("preprocess") {
    Plane white(40, 30, 255);
    const RealPlane a = preprocess(white);
    CHECK(a.width == 256);
    CHECK(a.height == 256);
    for (double v : a.data) CHECK(v == 1.0);

    Plane black(40, 30, 0);
    for (double v : preprocess(black).data) CHECK(v == 0.0);

    // 256x256 input: only the 1/255 scaling applies
    Plane exact = synth_plane(256, 256, 31);
    const RealPlane c = preprocess(exact);
    for (std::size_t i = 0; i < c.data.size(); ++i)
        CHECK(c.data[i] == double(exact.data[i]) / 255.0);
}

TEST_CASE("backward: zero upstream gives zero parameter gradients") {
    const EstimatorParams p = random_params(13);
    const EstimatorOutput out = estimator_forward(random_input(14), TileGrid(4, 4), p);
    ClipGrad up;
    up.grid = TileGrid(4, 4);
    up.values.assign(16, 0.0);
    const ParamGrads g = estimator_backward(out.cache, up);
    for (double v : g.flat()) CHECK(v == 0.0);
}

TEST_CASE("backward matches central finite differences on every parameter") {
    Rng rng(77);
    for (TileGrid grid : {TileGrid(3, 5), TileGrid(8, 8)}) {
        const EstimatorParams p = random_params(rng.next_u64(), 0.8);
        const RealPlane x = random_input(rng.next_u64());
        // keep pre-activations away from the hard-swish corners at +-3
        const EstimatorOutput out = estimator_forward(x, grid, p);
        for (double v : out.cache.pre_conv) REQUIRE(std::abs(std::abs(v) - 3.0) > 1e-3);

        ClipGrad up;
        up.grid = grid;
        up.values.resize(std::size_t(grid.tile_count()));
        for (double& v : up.values) v = rng.uniform(-1.0, 1.0);

        const ParamGrads analytic = estimator_backward(out.cache, up);
        const double eps = 1e-5;
        for (std::size_t i = 0; i < p.flat().size(); ++i) {
            const double fd = fd_scalar(x, grid, p, up, i, eps);
            const double a = analytic.flat()[i];
            const double diff = std::abs(a - fd);
            const bool ok = diff <= 1e-8 || diff <= 1e-4 * std::max(std::abs(a), std::abs(fd));
            if (!ok) {
                CAPTURE(i);
                CAPTURE(a);
                CAPTURE(fd);
            }
            CHECK(ok);
        }
    }
}

TEST_CASE("backward at the zero-parameter point matches finite differences") {
    EstimatorParams zero;
    const RealPlane x = random_input(21);
    const TileGrid grid(4, 4);
    const EstimatorOutput out = estimator_forward(x, grid, zero);
    ClipGrad up;
    up.grid = grid;
    Rng rng(22);
    up.values.resize(16);
    for (double& v : up.values) v = rng.uniform(-1.0, 1.0);
    const ParamGrads analytic = estimator_backward(out.cache, up);

    // fc2 bias: d c_global = sigmoid(0) = 0.5, local map is constant 0.5
    double upsum = 0.0;
    for (double v : up.values) upsum += v;
    CHECK(analytic.fc2_b() == doctest::Approx(0.25 * upsum).epsilon(1e-12));
    const double fd = fd_scalar(x, grid, zero, up, zero.flat().size() - 1, 1e-5);
    CHECK(std::abs(analytic.fc2_b() - fd) <= 1e-8 + 1e-4 * std::abs(fd));
}

TEST_CASE("parameter counting") {
    CHECK(param_count(16, 16) == 209);
    // 9K + K + (H+H) + (H+1), spelled out at the smallest width
    CHECK(param_count(1, 1) == 9 + 1 + 2 + 2);
    CHECK(param_count(EstimatorParams(16, 16)) == 209);
    CHECK(EstimatorParams().flat().size() == 209);
}

TEST_CASE("checkpoint round-trip and corruption handling") {
    const auto dir = testutil::fresh_dir("ckpt_work");
    const EstimatorParams p = random_params(3141);
    const auto path = dir / "model.iacl";
    save_checkpoint(p, path);

    SUBCASE("round-trip is bitwise lossless") {
        const EstimatorParams q = load_checkpoint(path);
        CHECK(q.channels() == p.channels());
        CHECK(q.hidden() == p.hidden());
        REQUIRE(q.flat().size() == p.flat().size());
        for (std::size_t i = 0; i < p.flat().size(); ++i) CHECK(q.flat()[i] == p.flat()[i]);
    }
    SUBCASE("file size equals the serialized scalar count") {
        CHECK(std::filesystem::file_size(path) == 16 + 8 * param_count(p));
    }
    SUBCASE("truncated file is rejected") {
        auto bytes = testutil::read_bytes(path);
        bytes.resize(bytes.size() - 9);
        std::ofstream f(dir / "trunc.iacl", std::ios::binary);
        f.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
        f.close();
        CHECK_THROWS_AS(load_checkpoint(dir / "trunc.iacl"), CheckpointError);
    }
    SUBCASE("wrong magic is rejected") {
        auto bytes = testutil::read_bytes(path);
        bytes[0] = 'X';
        std::ofstream f(dir / "magic.iacl", std::ios::binary);
        f.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
        f.close();
        CHECK_THROWS_AS(load_checkpoint(dir / "magic.iacl"), CheckpointError);
    }
    SUBCASE("missing file is an error") {
        CHECK_THROWS_AS(load_checkpoint(dir / "nope.iacl"), Error);
    }
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(estimator_forward(RealPlane(100, 256), TileGrid(2, 2), EstimatorParams()),
                    Error);
    const EstimatorOutput out =
        estimator_forward(random_input(1), TileGrid(2, 2), EstimatorParams());
    ClipGrad up;
    up.grid = TileGrid(4, 4);
    up.values.assign(16, 0.0);
    CHECK_THROWS_AS(estimator_backward(out.cache, up), Error);
}
