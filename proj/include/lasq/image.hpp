#pragma once

#include <array>

#include "lasq/numerics.hpp"

namespace lasq {

/// RGB image with unit-interval float planes.
struct Image {
    std::array<Grid2D, 3> ch;  // R, G, B

    Image() = default;
    Image(Eigen::Index rows, Eigen::Index cols)
        : ch{Grid2D::Zero(rows, cols), Grid2D::Zero(rows, cols), Grid2D::Zero(rows, cols)} {}

    Eigen::Index rows() const { return ch[0].rows(); }
    Eigen::Index cols() const { return ch[0].cols(); }

    bool valid() const {
        if (rows() < 1 || cols() < 1) return false;
        for (const auto& c : ch) {
            if (c.rows() != rows() || c.cols() != cols()) return false;
            if (!c.allFinite() || (c < 0.0).any() || (c > 1.0).any()) return false;
        }
        return true;
    }
};

struct Yuv {
    Grid2D y, u, v;
};

/// Full-range BT.601: Y = 0.299R + 0.587G + 0.114B, U = 0.492(B-Y), V = 0.877(R-Y).
Yuv rgb_to_yuv(const Image& img);

/// Exact algebraic inverse of rgb_to_yuv; output clamped into [0,1] last.
Image yuv_to_rgb(const Yuv& yuv);

}  // namespace lasq
