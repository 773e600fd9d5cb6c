#include "lasq/numerics.hpp"

#include <stdexcept>

namespace lasq {

void box_moments(const Grid2D& x, int radius, Grid2D& mean, Grid2D& var) {
    if (radius < 0) throw std::invalid_argument("box_moments: radius must be >= 0");
    if (!x.allFinite()) throw std::invalid_argument("box_moments: input must be finite");

    const Eigen::Index rows = x.rows(), cols = x.cols();
    mean.resize(rows, cols);
    var.resize(rows, cols);

    // Running column sums give O(r) per pixel; grids here are desk scale.
    Grid2D x2 = x.square();
    for (Eigen::Index i = 0; i < rows; ++i) {
        const Eigen::Index r0 = std::max<Eigen::Index>(0, i - radius);
        const Eigen::Index r1 = std::min<Eigen::Index>(rows - 1, i + radius);
        for (Eigen::Index j = 0; j < cols; ++j) {
            const Eigen::Index c0 = std::max<Eigen::Index>(0, j - radius);
            const Eigen::Index c1 = std::min<Eigen::Index>(cols - 1, j + radius);
            const Eigen::Index n = (r1 - r0 + 1) * (c1 - c0 + 1);
            const double s = x.block(r0, c0, r1 - r0 + 1, c1 - c0 + 1).sum();
            const double s2 = x2.block(r0, c0, r1 - r0 + 1, c1 - c0 + 1).sum();
            const double m = s / static_cast<double>(n);
            mean(i, j) = m;
            var(i, j) = std::max(0.0, s2 / static_cast<double>(n) - m * m);
        }
    }
}

Grid2D conv2d(const Grid2D& x, const Grid2D& kernel) {
    if (kernel.rows() % 2 == 0 || kernel.cols() % 2 == 0)
        throw std::invalid_argument("conv2d: kernel dimensions must be odd");

    const Eigen::Index rows = x.rows(), cols = x.cols();
    const Eigen::Index kr = kernel.rows() / 2, kc = kernel.cols() / 2;
    Grid2D out = Grid2D::Zero(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            double acc = 0.0;
            for (Eigen::Index a = -kr; a <= kr; ++a) {
                const Eigen::Index ii = i + a;
                if (ii < 0 || ii >= rows) continue;
                for (Eigen::Index b = -kc; b <= kc; ++b) {
                    const Eigen::Index jj = j + b;
                    if (jj < 0 || jj >= cols) continue;
                    acc += x(ii, jj) * kernel(a + kr, b + kc);
                }
            }
            out(i, j) = acc;
        }
    }
    return out;
}

Grid2D avg_pool2(const Grid2D& x) {
    if (x.rows() % 2 != 0 || x.cols() % 2 != 0)
        throw std::invalid_argument("avg_pool2: dimensions must be even");
    Grid2D out(x.rows() / 2, x.cols() / 2);
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        for (Eigen::Index j = 0; j < out.cols(); ++j)
            out(i, j) = 0.25 * (x(2 * i, 2 * j) + x(2 * i + 1, 2 * j) +
                                x(2 * i, 2 * j + 1) + x(2 * i + 1, 2 * j + 1));
    return out;
}

namespace {

// Corner-aligned source coordinate plus interpolation weights.
inline void axis_weights(Eigen::Index dst, Eigen::Index src, Eigen::Index d,
                         Eigen::Index& lo, Eigen::Index& hi, double& w_hi) {
    if (dst <= 1 || src <= 1) {
        lo = hi = 0;
        w_hi = 0.0;
        return;
    }
    const double pos = static_cast<double>(d) * static_cast<double>(src - 1) /
                       static_cast<double>(dst - 1);
    lo = static_cast<Eigen::Index>(std::floor(pos));
    if (lo >= src - 1) lo = src - 2;
    hi = lo + 1;
    w_hi = pos - static_cast<double>(lo);
}

}  // namespace

Grid2D bilinear_resize(const Grid2D& x, Eigen::Index rows, Eigen::Index cols) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("bilinear_resize: bad target size");
    Grid2D out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        Eigen::Index r0, r1;
        double wr;
        axis_weights(rows, x.rows(), i, r0, r1, wr);
        for (Eigen::Index j = 0; j < cols; ++j) {
            Eigen::Index c0, c1;
            double wc;
            axis_weights(cols, x.cols(), j, c0, c1, wc);
            out(i, j) = (1 - wr) * ((1 - wc) * x(r0, c0) + wc * x(r0, c1)) +
                        wr * ((1 - wc) * x(r1, c0) + wc * x(r1, c1));
        }
    }
    return out;
}

Grid2D bilinear_resize_adjoint(const Grid2D& grad, Eigen::Index rows, Eigen::Index cols) {
    Grid2D out = Grid2D::Zero(rows, cols);
    for (Eigen::Index i = 0; i < grad.rows(); ++i) {
        Eigen::Index r0, r1;
        double wr;
        axis_weights(grad.rows(), rows, i, r0, r1, wr);
        for (Eigen::Index j = 0; j < grad.cols(); ++j) {
            Eigen::Index c0, c1;
            double wc;
            axis_weights(grad.cols(), cols, j, c0, c1, wc);
            const double g = grad(i, j);
            out(r0, c0) += (1 - wr) * (1 - wc) * g;
            out(r0, c1) += (1 - wr) * wc * g;
            out(r1, c0) += wr * (1 - wc) * g;
            out(r1, c1) += wr * wc * g;
        }
    }
    return out;
}

}  // namespace lasq
