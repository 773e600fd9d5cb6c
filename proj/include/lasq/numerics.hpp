#pragma once

#include <Eigen/Dense>

#include "lasq/rng.hpp"

namespace lasq {

using Grid2D = Eigen::ArrayXXd;

/// Windowed mean and population variance over (2r+1)^2 windows clipped at the
/// borders; each window is divided by its actual pixel count. Variance is
/// floored at zero.
void box_moments(const Grid2D& x, int radius, Grid2D& mean, Grid2D& var);

/// Same-size cross-correlation of x with an odd-sized kernel, zero padded.
Grid2D conv2d(const Grid2D& x, const Grid2D& kernel);

/// 2x2 average pooling; both dimensions must be even.
Grid2D avg_pool2(const Grid2D& x);

/// Corner-aligned bilinear interpolation to (rows, cols).
Grid2D bilinear_resize(const Grid2D& x, Eigen::Index rows, Eigen::Index cols);

/// Transpose of the bilinear_resize linear map: scatters a gradient of shape
/// grad back onto a (rows, cols) source grid.
Grid2D bilinear_resize_adjoint(const Grid2D& grad, Eigen::Index rows, Eigen::Index cols);

}  // namespace lasq
