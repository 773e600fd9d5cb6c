#pragma once

#include "lasq/image.hpp"

namespace lasq {

/// 10*log10(1/MSE) with MAX = 1; identical inputs give +infinity.
double psnr(const Image& a, const Image& b);

/// Single-scale SSIM on the Y channel: 11x11 Gaussian window (sigma 1.5,
/// renormalized, clipped at borders), C1 = 0.01^2, C2 = 0.03^2, mean map value.
double ssim(const Image& a, const Image& b);

}  // namespace lasq
