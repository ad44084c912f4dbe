// Copyright 2026 The diecg Authors
// SPDX-License-Identifier: Apache-2.0

#include "diecg/trace.hpp"

#include "diecg/error.hpp"

#include <algorithm>
#include <map>
#include <optional>

namespace diecg {

namespace {

struct Band {
    int lo = 0;
    int hi = 0;
};

// Keeps the ink of column `x` inside rows [lo, hi] and returns the extent of
// what was kept, if anything.
std::optional<Band> keep_window(const BinaryImage& src, BinaryImage& dst, int x, int lo, int hi) {
    const int rows = static_cast<int>(src.rows());
    lo = std::max(lo, 0);
    hi = std::min(hi, rows - 1);
    std::optional<Band> kept;
    for (int y = lo; y <= hi; ++y) {
        if (src(y, x) == kInk) {
            dst(y, x) = kInk;
            if (!kept) kept = Band{y, y};
            kept->hi = y;
        }
    }
    return kept;
}

}  // namespace

int choose_start_column(const BinaryImage& crop, int baseline, int band_n) {
    const int width = static_cast<int>(crop.cols());
    const int rows = static_cast<int>(crop.rows());
    if (width == 0 || rows == 0) throw TraceNotFoundError("empty lead crop");
    const int lo = std::max(baseline - band_n, 0);
    const int hi = std::min(baseline + band_n, rows - 1);
    if (lo > hi) throw TraceNotFoundError("baseline outside crop");

    // Longest vertical ink run inside the band at column x. A contained seed
    // also needs no ink run crossing the band edges: such a column is a steep
    // stroke and seeding on it would clip the stroke.
    auto longest_run = [&](int x, bool contained) {
        if (contained && ((lo > 0 && crop(lo, x) == kInk && crop(lo - 1, x) == kInk) ||
                          (hi + 1 < rows && crop(hi, x) == kInk && crop(hi + 1, x) == kInk))) {
            return 0;
        }
        int best = 0, run = 0;
        for (int y = lo; y <= hi; ++y) {
            run = crop(y, x) == kInk ? run + 1 : 0;
            best = std::max(best, run);
        }
        return best;
    };
    const int center = width / 2;
    const std::pair<int, bool> passes[] = {{kSeedMinRun, true}, {kSeedMinRun, false}, {1, false}};
    for (const auto& [min_run, contained] : passes) {
        for (int d = 0; d <= width; ++d) {
            if (center - d >= 0 && longest_run(center - d, contained) >= min_run) return center - d;
            if (center + d < width && longest_run(center + d, contained) >= min_run) return center + d;
        }
    }
    throw TraceNotFoundError("no ink within " + std::to_string(band_n) + " px of the baseline");
}

TraceMask remove_noise(const LeadImage& crop, const TraceParams& params) {
    const BinaryImage& img = crop.pixels;
    const int width = static_cast<int>(img.cols());
    const int n = params.band_n;
    if (params.start_col < 0 || params.start_col >= width) {
        throw TraceNotFoundError("start column outside crop");
    }

    TraceMask out;
    out.baseline = crop.baseline;
    out.mask = BinaryImage::Constant(img.rows(), img.cols(), kPaper);

    const auto seed = keep_window(img, out.mask, params.start_col, crop.baseline - n, crop.baseline + n);
    if (!seed) throw TraceNotFoundError("no ink near the baseline at the start column");

    Band band = *seed;
    for (int x = params.start_col + 1; x < width; ++x) {
        if (auto kept = keep_window(img, out.mask, x, band.lo - n, band.hi + n)) band = *kept;
    }
    band = *seed;
    for (int x = params.start_col - 1; x >= 0; --x) {
        if (auto kept = keep_window(img, out.mask, x, band.lo - n, band.hi + n)) band = *kept;
    }

    out.band_escape = out.mask.row(0).any() || out.mask.row(out.mask.rows() - 1).any();
    return out;
}

TraceMask track_trace(const LeadImage& crop, int band_n) {
    return remove_noise(crop, {band_n, choose_start_column(crop.pixels, crop.baseline, band_n)});
}

RawTrace extract_waveform(const TraceMask& mask) {
    const auto& m = mask.mask;
    const Eigen::Index width = m.cols();
    RawTrace trace;
    trace.values = Eigen::VectorXd::Zero(width);
    trace.filled = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(width, false);

    std::optional<double> previous;
    Eigen::Index first_defined = -1;
    for (Eigen::Index x = 0; x < width; ++x) {
        long long sum = 0;
        long long count = 0;
        for (Eigen::Index y = 0; y < m.rows(); ++y) {
            if (m(y, x) == kInk) {
                sum += y;
                ++count;
            }
        }
        if (count > 0) {
            const double mean = static_cast<double>(sum) / static_cast<double>(count);
            previous = static_cast<double>(mask.baseline) - mean;
            trace.values[x] = *previous;
            if (first_defined < 0) first_defined = x;
        } else {
            trace.filled[x] = true;
            if (previous) trace.values[x] = *previous;
        }
    }
    if (first_defined < 0) throw TraceNotFoundError("trace mask is empty");
    trace.values.head(first_defined).setConstant(trace.values[first_defined]);
    return trace;
}

int estimate_line_thickness(const BinaryImage& img, std::span<const int> baselines, int x0, int x1) {
    const int rows = static_cast<int>(img.rows());
    x0 = std::max(x0, 0);
    x1 = std::min(x1, static_cast<int>(img.cols()));
    std::map<int, int> votes;
    for (int b : baselines) {
        if (b < 0 || b >= rows) continue;
        for (int x = x0; x < x1; ++x) {
            if (img(b, x) != kInk) continue;
            int lo = b, hi = b;
            while (lo > 0 && img(lo - 1, x) == kInk) --lo;
            while (hi + 1 < rows && img(hi + 1, x) == kInk) ++hi;
            ++votes[hi - lo + 1];
        }
    }
    if (votes.empty()) return 1;
    return std::max_element(votes.begin(), votes.end(),
                            [](const auto& a, const auto& b) { return a.second < b.second; })
        ->first;
}

}  // namespace diecg
