#include "lasq/hierarchy.hpp"

#include <stdexcept>

namespace lasq {

GridPartition grid_partition(Eigen::Index rows, Eigen::Index cols, int level) {
    if (level < 1) throw std::invalid_argument("grid_partition: level must be >= 1");
    const Eigen::Index m = Eigen::Index{1} << ((level - 1 + 1) / 2);  // ceil((n-1)/2)
    const Eigen::Index w = Eigen::Index{1} << ((level - 1) / 2);      // floor((n-1)/2)
    if (rows < m || cols < w)
        throw std::invalid_argument("grid_partition: image smaller than grid");

    GridPartition part;
    part.level = level;
    part.patch_rows = m;
    part.patch_cols = w;
    part.regions.reserve(static_cast<size_t>(m * w));

    // Contiguous bands; remainder pixels go to the last band of each axis.
    const Eigen::Index rb = rows / m, cb = cols / w;
    for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::Index r0 = i * rb;
        const Eigen::Index r1 = (i == m - 1) ? rows : r0 + rb;
        for (Eigen::Index j = 0; j < w; ++j) {
            const Eigen::Index c0 = j * cb;
            const Eigen::Index c1 = (j == w - 1) ? cols : c0 + cb;
            part.regions.push_back(Region{r0, r1, c0, c1});
        }
    }
    return part;
}

Image synthesize_level(const Image& img, const LaoSet& gamma_set, const GridPartition& part) {
    if (gamma_set.level != part.level)
        throw std::invalid_argument("synthesize_level: level mismatch");
    if (gamma_set.values.size() != part.regions.size())
        throw std::invalid_argument("synthesize_level: gamma count != patch count");

    Image out = img;
    for (size_t z = 0; z < part.regions.size(); ++z) {
        const Region& p = part.regions[z];
        const double gamma = gamma_set.values[z];
        if (!(gamma > 0.0)) throw std::invalid_argument("synthesize_level: gamma must be > 0");
        if (gamma == 1.0) continue;
        const double e = 1.0 / gamma;
        for (auto& c : out.ch)
            c.block(p.row_start, p.col_start, p.height(), p.width()) =
                c.block(p.row_start, p.col_start, p.height(), p.width()).pow(e).min(1.0).max(0.0);
    }
    return out;
}

HierarchyStack build_stack(const Image& img, const std::vector<LaoSet>& gamma_hierarchy) {
    HierarchyStack stack;
    stack.levels.reserve(gamma_hierarchy.size());
    for (const LaoSet& set : gamma_hierarchy) {
        GridPartition part = grid_partition(img.rows(), img.cols(), set.level);
        stack.levels.push_back(synthesize_level(img, set, part));
    }
    return stack;
}

}  // namespace lasq
