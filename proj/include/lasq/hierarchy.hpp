#pragma once

#include <vector>

#include "lasq/sampler.hpp"

namespace lasq {

/// Level-n grid of 2^(n-1) disjoint covering patches, row-major;
/// m_n = 2^ceil((n-1)/2) row bands, w_n = 2^floor((n-1)/2) column bands.
struct GridPartition {
    int level = 1;
    Eigen::Index patch_rows = 1;  // m_n
    Eigen::Index patch_cols = 1;  // w_n
    std::vector<Region> regions;
};

struct HierarchyStack {
    std::vector<Image> levels;  // I_H^(1) .. I_H^(N)
};

GridPartition grid_partition(Eigen::Index rows, Eigen::Index cols, int level);

/// Applies gamma_set.values[z] to the z-th row-major patch of the partition.
Image synthesize_level(const Image& img, const LaoSet& gamma_set, const GridPartition& part);

/// Level n is synthesized from the ORIGINAL image, never cumulatively.
HierarchyStack build_stack(const Image& img, const std::vector<LaoSet>& gamma_hierarchy);

}  // namespace lasq
