#include "lasq/lv_analysis.hpp"

#include <algorithm>
#include <stdexcept>

namespace lasq {

std::vector<LvPoint> lv_points(const Image& low, const Image& normal) {
    if (low.rows() != normal.rows() || low.cols() != normal.cols())
        throw std::invalid_argument("lv_points: dimension mismatch");
    const Grid2D yl = rgb_to_yuv(low).y;
    const Grid2D yn = rgb_to_yuv(normal).y;
    std::vector<LvPoint> pts;
    pts.reserve(static_cast<size_t>(yl.size()));
    for (Eigen::Index i = 0; i < yl.rows(); ++i)
        for (Eigen::Index j = 0; j < yl.cols(); ++j)
            pts.push_back(LvPoint{yl(i, j), yn(i, j)});
    return pts;
}

std::optional<double> estimate_kappa(const LvPoint& p, double clip_eps) {
    if (p.x < clip_eps || p.x > 1.0 - clip_eps) return std::nullopt;
    if (p.y < clip_eps || p.y > 1.0 - clip_eps) return std::nullopt;
    return std::log(p.y) / std::log(p.x);
}

KappaSummary kappa_summary(const std::vector<LvPoint>& points, int bins,
                           const std::vector<double>& quantiles, double clip_eps) {
    if (bins < 1) throw std::invalid_argument("kappa_summary: bins must be >= 1");

    std::vector<double> kappas;
    kappas.reserve(points.size());
    for (const LvPoint& p : points)
        if (auto k = estimate_kappa(p, clip_eps)) kappas.push_back(*k);
    if (kappas.empty()) throw std::invalid_argument("kappa_summary: no valid points");

    std::sort(kappas.begin(), kappas.end());
    const double k_lo = kappas.front(), k_hi = kappas.back();
    const double span = k_hi > k_lo ? k_hi - k_lo : 1.0;

    KappaSummary s;
    s.bin_edges.resize(static_cast<size_t>(bins) + 1);
    s.counts.assign(static_cast<size_t>(bins), 0);
    for (int b = 0; b <= bins; ++b)
        s.bin_edges[static_cast<size_t>(b)] = k_lo + span * b / bins;
    for (double k : kappas) {
        int b = static_cast<int>((k - k_lo) / span * bins);
        b = std::min(bins - 1, std::max(0, b));
        ++s.counts[static_cast<size_t>(b)];
    }

    for (double q : quantiles) {
        if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("kappa_summary: quantile outside (0,1)");
        // Nearest-rank on the sorted sample.
        const auto idx = static_cast<size_t>(
            std::min<double>(static_cast<double>(kappas.size()) - 1.0,
                             std::floor(q * static_cast<double>(kappas.size()))));
        s.quantile_curves.emplace_back(q, kappas[idx]);
    }
    return s;
}

}  // namespace lasq
