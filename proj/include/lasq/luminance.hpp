#pragma once

#include "lasq/numerics.hpp"

namespace lasq {

using LuminanceMap = Grid2D;

struct GuidedFilterParams {
    int radius = 8;
    double eps_gf = 0.01;
};

/// Half-open pixel ranges [row_start, row_end) x [col_start, col_end).
struct Region {
    Eigen::Index row_start = 0, row_end = 0, col_start = 0, col_end = 0;

    Eigen::Index height() const { return row_end - row_start; }
    Eigen::Index width() const { return col_end - col_start; }
    Eigen::Index area() const { return height() * width(); }
};

struct RegionStats {
    double g_p = 0.0;   // regional luminance mean
    double var_g = 0.0; // population variance over the region
};

/// Self-guided filter of the luminance channel:
///   a = var/(var + eps), b = mean(1 - a), G = mean(a)*y + mean(b), in [0,1].
LuminanceMap guided_filter_luminance(const Grid2D& y, const GuidedFilterParams& params);

RegionStats region_stats(const LuminanceMap& g, const Region& p);

}  // namespace lasq
