// Copyright 2026 The diecg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "diecg/image.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>

namespace diecg {

// ----------------------------------------------------------------------------
// Image I/O
// ----------------------------------------------------------------------------

/// ITU-R BT.601 luma, Y = 0.299 R + 0.587 G + 0.114 B, rounded half up.
constexpr std::uint8_t luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    return static_cast<std::uint8_t>((299u * r + 587u * g + 114u * b + 500u) / 1000u);
}

GrayImage to_grayscale(const RgbImage& rgb);

/// Loads a PNG or JPEG file as grayscale. Color inputs go through `luminance`;
/// transparent PNG pixels are composited over white first.
/// Throws IoError when the file cannot be read, FormatError when it is neither
/// PNG nor JPEG or fails to decode.
GrayImage load_grayscale(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const GrayImage& img);
void write_png(const std::filesystem::path& path, const RgbImage& img);
/// Ink is written black, paper white.
void write_png(const std::filesystem::path& path, const BinaryImage& img);

// ----------------------------------------------------------------------------
// Binarization
// ----------------------------------------------------------------------------

using IntensityHistogram = std::array<std::uint64_t, 256>;

IntensityHistogram intensity_histogram(const GrayImage& img);

struct OtsuResult {
    BinaryImage image;
    /// Pixels with intensity strictly below the threshold are ink.
    int threshold = 0;
    /// Set when no threshold separates two nonempty classes (constant image).
    /// The image is then all paper.
    bool degenerate = false;
};

/// Threshold in [0, 255] maximizing between-class variance, ties toward the
/// lower value. Threshold 0 (empty ink class) is returned only when every
/// candidate scores zero.
int otsu_threshold(const IntensityHistogram& hist);

OtsuResult otsu_binarize(const GrayImage& img);

template <typename Derived>
BinaryImage threshold_below(const Eigen::MatrixBase<Derived>& img, int threshold) {
    return (img.template cast<int>().array() < threshold);
}

// ----------------------------------------------------------------------------
// Projection histograms
// ----------------------------------------------------------------------------

enum class Axis {
    Vertical,   ///< one count per row
    Horizontal  ///< one count per column
};

struct Histogram {
    Axis axis = Axis::Vertical;
    Eigen::VectorXi counts;

    long long total() const { return counts.cast<long long>().sum(); }
};

/// Foreground counts per row (vertical) or per column (horizontal). Accepts any
/// boolean array expression, so blocks of a larger page work directly.
template <typename Derived>
Histogram projection_histogram(const Eigen::DenseBase<Derived>& img, Axis axis) {
    Histogram h;
    h.axis = axis;
    if (axis == Axis::Vertical) {
        h.counts = img.derived().rowwise().count().template cast<int>();
    } else {
        h.counts = img.derived().colwise().count().transpose().template cast<int>();
    }
    return h;
}

}  // namespace diecg
