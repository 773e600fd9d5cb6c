#include "lasq/luminance.hpp"

#include <stdexcept>

namespace lasq {

LuminanceMap guided_filter_luminance(const Grid2D& y, const GuidedFilterParams& params) {
    if (params.radius < 1) throw std::invalid_argument("guided filter: radius must be >= 1");
    if (!(params.eps_gf > 0.0)) throw std::invalid_argument("guided filter: eps_gf must be > 0");
    if (!y.allFinite() || (y < 0.0).any() || (y > 1.0).any())
        throw std::invalid_argument("guided filter: luminance must be finite and in [0,1]");

    Grid2D mu, var;
    box_moments(y, params.radius, mu, var);
    Grid2D a = var / (var + params.eps_gf);
    Grid2D b = mu * (1.0 - a);

    Grid2D a_bar, b_bar, scratch;
    box_moments(a, params.radius, a_bar, scratch);
    box_moments(b, params.radius, b_bar, scratch);

    Grid2D g = a_bar * y + b_bar;
    return g.min(1.0).max(0.0);
}

RegionStats region_stats(const LuminanceMap& g, const Region& p) {
    if (p.height() < 1 || p.width() < 1) throw std::invalid_argument("region_stats: empty region");
    if (p.row_start < 0 || p.col_start < 0 || p.row_end > g.rows() || p.col_end > g.cols())
        throw std::invalid_argument("region_stats: region out of bounds");

    auto block = g.block(p.row_start, p.col_start, p.height(), p.width());
    RegionStats s;
    s.g_p = block.mean();
    s.var_g = std::max(0.0, block.square().mean() - s.g_p * s.g_p);
    return s;
}

}  // namespace lasq
