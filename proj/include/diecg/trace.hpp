// Copyright 2026 The diecg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "diecg/image.hpp"

#include <Eigen/Core>

#include <span>

namespace diecg {

/// A lead crop together with its isoelectric line (crop-local row).
struct LeadImage {
    BinaryImage pixels;
    int baseline = 0;
};

struct TraceParams {
    /// Band tolerance in pixels: rows within N of the previous column's
    /// [c_min, c_max] extent are eligible.
    int band_n = 10;
    /// Column where tracking is seeded on the isoelectric line.
    int start_col = 0;
};

struct TraceMask {
    BinaryImage mask;
    int baseline = 0;
    /// Retained ink touched the top or bottom edge of the crop; the band most
    /// likely ran into an adjacent lead.
    bool band_escape = false;
};

struct RawTrace {
    /// Amplitude per column in pixels above the baseline (up is positive).
    Eigen::VectorXd values;
    /// True where the column had no ink and the value was carried over.
    Eigen::Array<bool, Eigen::Dynamic, 1> filled;

    double fill_fraction() const {
        return filled.size() == 0 ? 0.0 : static_cast<double>(filled.count()) / static_cast<double>(filled.size());
    }
};

/// Shortest vertical ink run accepted as a seed before falling back to any ink;
/// speckles and grid dots are shorter.
inline constexpr int kSeedMinRun = 3;

/// Column nearest the horizontal center (left side first on ties) whose rows
/// [baseline - N, baseline + N] hold a vertical ink run of at least
/// kSeedMinRun pixels with no stroke crossing the band edges. Falls back to
/// such a run crossing the edges, then to any ink. Throws TraceNotFoundError.
int choose_start_column(const BinaryImage& crop, int baseline, int band_n);

/// Band tracking. Seeds at `params.start_col` with the ink in rows
/// [b - N, b + N], then walks right to the crop edge and left from the seed
/// to column 0. Each column keeps the ink in [c_min - N, c_max + N] of the
/// previously processed column and updates c_min/c_max from what it kept;
/// a column with nothing kept leaves the band unchanged. Windows are clamped
/// to the crop. Throws TraceNotFoundError if the seed column has no ink near
/// the baseline.
TraceMask remove_noise(const LeadImage& crop, const TraceParams& params);

/// `choose_start_column` followed by `remove_noise`.
TraceMask track_trace(const LeadImage& crop, int band_n);

/// values[j] = baseline - mean(ink rows in column j). Empty columns repeat
/// the previous value; a leading empty run takes the first defined value.
/// Throws TraceNotFoundError for an all-empty mask.
RawTrace extract_waveform(const TraceMask& mask);

/// Most common vertical ink run length crossing the given baseline rows
/// between columns [x0, x1). Returns 1 if no run is found.
int estimate_line_thickness(const BinaryImage& img, std::span<const int> baselines, int x0, int x1);

}  // namespace diecg
