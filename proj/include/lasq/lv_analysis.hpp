#pragma once

#include <optional>
#include <vector>

#include "lasq/image.hpp"

namespace lasq {

/// One pixel's (low-light, normal-light) luminance pair.
struct LvPoint {
    double x = 0.0;
    double y = 0.0;
};

struct KappaSummary {
    std::vector<double> bin_edges;  // bins+1 edges
    std::vector<long> counts;
    std::vector<std::pair<double, double>> quantile_curves;  // (q, kappa_q), a = 1
};

/// Per-pixel Y-channel pairs of two equally sized images.
std::vector<LvPoint> lv_points(const Image& low, const Image& normal);

/// kappa = ln(y)/ln(x) through the single power-law curve y = x^kappa;
/// points with either coordinate outside [clip_eps, 1-clip_eps] are excluded.
std::optional<double> estimate_kappa(const LvPoint& p, double clip_eps = 0.004);

KappaSummary kappa_summary(const std::vector<LvPoint>& points, int bins,
                           const std::vector<double>& quantiles, double clip_eps = 0.004);

}  // namespace lasq
