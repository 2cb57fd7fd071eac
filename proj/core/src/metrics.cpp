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

#include "iaclahe/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace iaclahe {

double psnr(const Plane& a, const Plane& b) {
    if (a.width != b.width || a.height != b.height) throw Error("psnr: dimensions differ");
    if (a.width < 1 || a.height < 1) throw Error("psnr: empty plane");

    double se = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = double(a.data[i]) - double(b.data[i]);
        se += d * d;
    }
    if (se == 0.0) return std::numeric_limits<double>::infinity();
    const double mse = se / double(a.data.size());
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

namespace {

constexpr int kWin = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);

std::array<double, kWin> gaussian_window() {
    std::array<double, kWin> w{};
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i) {
        const double d = double(i - kWin / 2);
        w[std::size_t(i)] = std::exp(-(d * d) / (2.0 * kSigma * kSigma));
        sum += w[std::size_t(i)];
    }
    for (double& v : w) v /= sum;
    return w;
}

// separable valid convolution of a w*h buffer with the 1-D window,
// horizontal then vertical: result is (w-10)*(h-10)
std::vector<double> filter_valid(const std::vector<double>& src, int w, int h,
                                 const std::array<double, kWin>& win) {
    const int cw = w - kWin + 1;
    const int ch = h - kWin + 1;
    std::vector<double> horiz(std::size_t(cw) * h);
    for (int y = 0; y < h; ++y) {
        const double* row = src.data() + std::size_t(y) * w;
        double* dst = horiz.data() + std::size_t(y) * cw;
        for (int x = 0; x < cw; ++x) {
            double s = 0.0;
            for (int k = 0; k < kWin; ++k) s += win[std::size_t(k)] * row[x + k];
            dst[x] = s;
        }
    }
    std::vector<double> out(std::size_t(cw) * ch);
    for (int y = 0; y < ch; ++y) {
        double* dst = out.data() + std::size_t(y) * cw;
        for (int x = 0; x < cw; ++x) {
            double s = 0.0;
            for (int k = 0; k < kWin; ++k) s += win[std::size_t(k)] * horiz[std::size_t(y + k) * cw + x];
            dst[x] = s;
        }
    }
    return out;
}

}  // namespace

double ssim(const Plane& a, const Plane& b) {
    if (a.width != b.width || a.height != b.height) throw Error("ssim: dimensions differ");
    if (a.width < kWin || a.height < kWin)
        throw Error("ssim: plane must be at least 11x11");

    const int w = a.width, h = a.height;
    const std::size_t n = a.data.size();
    std::vector<double> xa(n), xb(n), xaa(n), xbb(n), xab(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double va = a.data[i], vb = b.data[i];
        xa[i] = va;
        xb[i] = vb;
        xaa[i] = va * va;
        xbb[i] = vb * vb;
        xab[i] = va * vb;
    }

    const auto win = gaussian_window();
    const std::vector<double> mu_a = filter_valid(xa, w, h, win);
    const std::vector<double> mu_b = filter_valid(xb, w, h, win);
    const std::vector<double> e_aa = filter_valid(xaa, w, h, win);
    const std::vector<double> e_bb = filter_valid(xbb, w, h, win);
    const std::vector<double> e_ab = filter_valid(xab, w, h, win);

    double sum = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a[i], mb = mu_b[i];
        const double var_a = e_aa[i] - ma * ma;
        const double var_b = e_bb[i] - mb * mb;
        const double cov = e_ab[i] - ma * mb;
        sum += ((2.0 * ma * mb + kC1) * (2.0 * cov + kC2)) /
               ((ma * ma + mb * mb + kC1) * (var_a + var_b + kC2));
    }
    return sum / double(mu_a.size());
}

MetricReport evaluate_pair(const Plane& a, const Plane& b) {
    return MetricReport{psnr(a, b), ssim(a, b)};
}

}  // namespace iaclahe
