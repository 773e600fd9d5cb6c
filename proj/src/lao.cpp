#include "lasq/lao.hpp"

#include <stdexcept>

namespace lasq {

double compute_beta(double g_p, double var_g, const LaoParams& params) {
    return 2.0 * g_p - 1.0 + params.eta * var_g / (var_g + params.delta);
}

double compute_gamma(double g_p, double var_g, const LaoParams& params) {
    if (!(params.alpha + g_p > 0.0))
        throw std::invalid_argument("compute_gamma: alpha + g_p must be > 0");
    return std::pow(params.alpha + g_p, compute_beta(g_p, var_g, params));
}

GammaMap pixel_gamma_map(const LuminanceMap& g, const LaoParams& params) {
    GammaMap gm;
    gm.grid.resize(g.rows(), g.cols());
    for (Eigen::Index i = 0; i < g.rows(); ++i)
        for (Eigen::Index j = 0; j < g.cols(); ++j)
            gm.grid(i, j) = compute_gamma(g(i, j), 0.0, params);
    gm.gamma_min = gm.grid.minCoeff();
    gm.gamma_max = gm.grid.maxCoeff();
    gm.gamma_0 = gm.grid.mean();
    return gm;
}

Image apply_lao(const Image& img, const Region& p, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("apply_lao: gamma must be > 0");
    if (p.height() < 1 || p.width() < 1 || p.row_start < 0 || p.col_start < 0 ||
        p.row_end > img.rows() || p.col_end > img.cols())
        throw std::invalid_argument("apply_lao: bad region");

    Image out = img;
    if (gamma == 1.0) return out;  // exact identity
    const double e = 1.0 / gamma;
    for (auto& c : out.ch)
        c.block(p.row_start, p.col_start, p.height(), p.width()) =
            c.block(p.row_start, p.col_start, p.height(), p.width()).pow(e).min(1.0).max(0.0);
    return out;
}

}  // namespace lasq
