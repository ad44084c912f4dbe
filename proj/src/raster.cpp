// Copyright 2026 The diecg Authors
// SPDX-License-Identifier: Apache-2.0

#include "diecg/raster.hpp"

#include <cstdint>

namespace diecg {

GrayImage to_grayscale(const RgbImage& rgb) {
    GrayImage out(rgb.height(), rgb.width());
    for (Eigen::Index y = 0; y < rgb.height(); ++y) {
        for (Eigen::Index x = 0; x < rgb.width(); ++x) {
            out(y, x) = luminance(rgb.r(y, x), rgb.g(y, x), rgb.b(y, x));
        }
    }
    return out;
}

IntensityHistogram intensity_histogram(const GrayImage& img) {
    IntensityHistogram hist{};
    const std::uint8_t* p = img.data();
    const std::uint8_t* end = p + img.size();
    for (; p != end; ++p) ++hist[*p];
    return hist;
}

namespace {

// Between-class variance up to the constant factor 1/N^2:
//   (n1*S0 - n0*S1)^2 / (n0*n1)
// kept as a fraction so candidates compare exactly while it fits in 128 bits.
struct Score {
    unsigned __int128 num = 0;
    unsigned __int128 den = 1;
    long double approx = 0.0L;
};

constexpr std::uint64_t kExactPixelLimit = 1u << 18;

}  // namespace

int otsu_threshold(const IntensityHistogram& hist) {
    std::uint64_t total = 0;
    std::uint64_t total_sum = 0;
    for (int v = 0; v < 256; ++v) {
        total += hist[v];
        total_sum += hist[v] * static_cast<std::uint64_t>(v);
    }
    const bool exact = total <= kExactPixelLimit;

    int best_t = 0;
    Score best;
    std::uint64_t n0 = 0, s0 = 0;
    for (int t = 1; t < 256; ++t) {
        n0 += hist[t - 1];
        s0 += hist[t - 1] * static_cast<std::uint64_t>(t - 1);
        const std::uint64_t n1 = total - n0;
        if (n0 == 0 || n1 == 0) continue;
        const std::uint64_t s1 = total_sum - s0;

        const __int128 diff = static_cast<__int128>(n1) * s0 - static_cast<__int128>(n0) * s1;
        const unsigned __int128 mag = static_cast<unsigned __int128>(diff < 0 ? -diff : diff);
        Score cur;
        if (exact) {
            cur.num = mag * mag;
            cur.den = static_cast<unsigned __int128>(n0) * n1;
        } else {
            const long double d = static_cast<long double>(diff);
            cur.approx = d * d / (static_cast<long double>(n0) * static_cast<long double>(n1));
        }

        bool better;
        if (exact) {
            better = cur.num * best.den > best.num * cur.den;
        } else {
            better = cur.approx > best.approx;
        }
        if (better) {
            best = cur;
            best_t = t;
        }
    }
    return best_t;
}

OtsuResult otsu_binarize(const GrayImage& img) {
    OtsuResult result;
    result.threshold = otsu_threshold(intensity_histogram(img));
    result.degenerate = result.threshold == 0;
    result.image = threshold_below(img, result.threshold);
    return result;
}

}  // namespace diecg
