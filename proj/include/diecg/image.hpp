// Copyright 2026 The diecg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>

namespace diecg {

/// Row-major dense image; rows are image rows (top to bottom), columns are x.
template <typename Scalar>
using Image = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// 8-bit intensities, 0 = black, 255 = white.
using GrayImage = Image<std::uint8_t>;

/// Two-valued pixel mask. `kInk` marks foreground (printed trace, grid or text
/// ink), `kPaper` marks background. Keeping this a typed mask avoids carrying
/// the 0/255 pixel-value convention past binarization.
using BinaryImage = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr bool kInk = true;
inline constexpr bool kPaper = false;

struct RgbImage {
    GrayImage r, g, b;

    RgbImage() = default;
    RgbImage(Eigen::Index height, Eigen::Index width, std::uint8_t fill = 255)
        : r(GrayImage::Constant(height, width, fill)),
          g(GrayImage::Constant(height, width, fill)),
          b(GrayImage::Constant(height, width, fill)) {}

    Eigen::Index width() const { return r.cols(); }
    Eigen::Index height() const { return r.rows(); }

    void set(Eigen::Index y, Eigen::Index x, std::uint8_t rv, std::uint8_t gv, std::uint8_t bv) {
        r(y, x) = rv;
        g(y, x) = gv;
        b(y, x) = bv;
    }

    bool operator==(const RgbImage& other) const {
        return r == other.r && g == other.g && b == other.b;
    }
};

/// Axis-aligned pixel rectangle; `x`,`y` is the top-left corner.
struct Rect {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;

    int right() const { return x + width; }    // exclusive
    int bottom() const { return y + height; }  // exclusive
    long long area() const { return static_cast<long long>(std::max(width, 0)) * std::max(height, 0); }
    bool empty() const { return width <= 0 || height <= 0; }
    bool contains(int px, int py) const { return px >= x && px < right() && py >= y && py < bottom(); }

    Rect intersect(const Rect& o) const {
        const int x0 = std::max(x, o.x), y0 = std::max(y, o.y);
        const int x1 = std::min(right(), o.right()), y1 = std::min(bottom(), o.bottom());
        return {x0, y0, std::max(0, x1 - x0), std::max(0, y1 - y0)};
    }

    bool operator==(const Rect&) const = default;
};

}  // namespace diecg
