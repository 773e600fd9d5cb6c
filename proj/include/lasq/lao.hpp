#pragma once

#include "lasq/image.hpp"
#include "lasq/luminance.hpp"

namespace lasq {

struct LaoParams {
    double alpha = 0.15;  // base offset, in (0,1]
    double eta = 1.0;     // contrast gain
    double delta = 0.01;  // variance regularizer
};

/// Per-pixel gamma exponents with their distribution bounds.
struct GammaMap {
    Grid2D grid;
    double gamma_min = 0.0;
    double gamma_max = 0.0;
    double gamma_0 = 0.0;  // mean over all pixels
};

/// beta_P = 2 G_P - 1 + eta * var / (var + delta)
double compute_beta(double g_p, double var_g, const LaoParams& params);

/// gamma_P = (alpha + G_P)^beta_P
double compute_gamma(double g_p, double var_g, const LaoParams& params);

/// Treats each pixel as a 1x1 region (var = 0), so beta = 2G - 1.
GammaMap pixel_gamma_map(const LuminanceMap& g, const LaoParams& params);

/// Replaces every channel value v inside the region by v^(1/gamma); gamma > 1
/// brightens, gamma < 1 darkens.
Image apply_lao(const Image& img, const Region& p, double gamma);

}  // namespace lasq
