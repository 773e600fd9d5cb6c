#include "lasq/metrics.hpp"

#include <limits>
#include <stdexcept>

namespace lasq {

double psnr(const Image& a, const Image& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("psnr: dimension mismatch");
    double mse = 0.0;
    long n = 0;
    for (int c = 0; c < 3; ++c) {
        mse += (a.ch[static_cast<size_t>(c)] - b.ch[static_cast<size_t>(c)]).square().sum();
        n += a.ch[static_cast<size_t>(c)].size();
    }
    mse /= static_cast<double>(n);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

namespace {

Grid2D gaussian_window() {
    Grid2D w(11, 11);
    const double sigma = 1.5;
    for (Eigen::Index i = 0; i < 11; ++i)
        for (Eigen::Index j = 0; j < 11; ++j) {
            const double di = static_cast<double>(i) - 5.0, dj = static_cast<double>(j) - 5.0;
            w(i, j) = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
        }
    return w / w.sum();
}

// Weighted local moment with the window clipped at borders and the remaining
// weights renormalized.
void weighted_moments(const Grid2D& x, const Grid2D& y, const Grid2D& w, Eigen::Index ci,
                      Eigen::Index cj, double& mx, double& my, double& sxx, double& syy,
                      double& sxy) {
    double wsum = 0.0, ax = 0.0, ay = 0.0, axx = 0.0, ayy = 0.0, axy = 0.0;
    for (Eigen::Index a = -5; a <= 5; ++a) {
        const Eigen::Index i = ci + a;
        if (i < 0 || i >= x.rows()) continue;
        for (Eigen::Index b = -5; b <= 5; ++b) {
            const Eigen::Index j = cj + b;
            if (j < 0 || j >= x.cols()) continue;
            const double wk = w(a + 5, b + 5);
            wsum += wk;
            ax += wk * x(i, j);
            ay += wk * y(i, j);
            axx += wk * x(i, j) * x(i, j);
            ayy += wk * y(i, j) * y(i, j);
            axy += wk * x(i, j) * y(i, j);
        }
    }
    mx = ax / wsum;
    my = ay / wsum;
    sxx = axx / wsum - mx * mx;
    syy = ayy / wsum - my * my;
    sxy = axy / wsum - mx * my;
}

}  // namespace

double ssim(const Image& a, const Image& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("ssim: dimension mismatch");
    if (a.rows() < 11 || a.cols() < 11)
        throw std::invalid_argument("ssim: minimum dimension is 11");

    const Grid2D ya = rgb_to_yuv(a).y;
    const Grid2D yb = rgb_to_yuv(b).y;
    static const Grid2D w = gaussian_window();
    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;

    double acc = 0.0;
    for (Eigen::Index i = 0; i < ya.rows(); ++i) {
        for (Eigen::Index j = 0; j < ya.cols(); ++j) {
            double mx, my, sxx, syy, sxy;
            weighted_moments(ya, yb, w, i, j, mx, my, sxx, syy, sxy);
            acc += ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) /
                   ((mx * mx + my * my + c1) * (sxx + syy + c2));
        }
    }
    return acc / static_cast<double>(ya.size());
}

}  // namespace lasq
