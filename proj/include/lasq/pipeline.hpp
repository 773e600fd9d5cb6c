#pragma once

#include "lasq/config.hpp"
#include "lasq/denoiser.hpp"
#include "lasq/hierarchy.hpp"
#include "lasq/metrics.hpp"

namespace lasq {

/// Everything produced by the sampling half of the pipeline.
struct HierarchyRun {
    LuminanceMap g;
    GammaMap gamma_map;
    TruncGaussian dist;
    double chain_init = 1.0;  // full-image gamma, clamped into the support
    std::vector<LaoSet> gamma_sets;
    HierarchyStack stack;
};

/// Guided-filter luminance -> gamma map -> target distribution -> MCMC
/// hierarchy -> enhanced stack, all from the original image.
HierarchyRun run_hierarchy(const Image& input, const RunConfig& cfg);

/// Reference-free enhancement: the level-1 image of the hierarchy stack.
Image enhance_hierarchy_only(const Image& input, const RunConfig& cfg);

/// Full path: hierarchy guidance, then encode -> DDIM inference -> decode
/// with a trained denoiser.
Image enhance_with_denoiser(const Image& input, const RunConfig& cfg,
                            const DenoiserParams& params, int ddim_steps);

/// Builds training samples from images on disk: x0 = top-level guide,
/// guides = encoded hierarchy stack, f_l = encoded input.
TrainSample make_train_sample(const Image& input, const RunConfig& cfg);

}  // namespace lasq
