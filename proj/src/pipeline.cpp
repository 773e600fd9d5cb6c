#include "lasq/pipeline.hpp"

#include <stdexcept>

namespace lasq {

namespace {

/// Gamma-corrects only the Y channel patchwise and reconverts, leaving chroma
/// untouched.
HierarchyStack build_stack_y_only(const Image& img, const std::vector<LaoSet>& sets) {
    const Yuv yuv = rgb_to_yuv(img);
    HierarchyStack stack;
    stack.levels.reserve(sets.size());
    for (const LaoSet& set : sets) {
        GridPartition part = grid_partition(img.rows(), img.cols(), set.level);
        if (set.values.size() != part.regions.size())
            throw std::invalid_argument("build_stack_y_only: gamma count != patch count");
        Grid2D y = yuv.y;
        for (size_t z = 0; z < part.regions.size(); ++z) {
            const Region& p = part.regions[z];
            const double gamma = set.values[z];
            if (!(gamma > 0.0)) throw std::invalid_argument("build_stack_y_only: gamma <= 0");
            if (gamma == 1.0) continue;
            y.block(p.row_start, p.col_start, p.height(), p.width()) =
                y.block(p.row_start, p.col_start, p.height(), p.width())
                    .pow(1.0 / gamma)
                    .min(1.0)
                    .max(0.0);
        }
        stack.levels.push_back(yuv_to_rgb(Yuv{y, yuv.u, yuv.v}));
    }
    return stack;
}

}  // namespace

HierarchyRun run_hierarchy(const Image& input, const RunConfig& cfg) {
    if (!input.valid()) throw std::invalid_argument("run_hierarchy: invalid input image");
    validate_config(cfg);

    HierarchyRun run;
    const Yuv yuv = rgb_to_yuv(input);
    run.g = guided_filter_luminance(yuv.y, GuidedFilterParams{cfg.gf_radius, cfg.gf_eps});

    const LaoParams lao{cfg.lao_alpha, cfg.lao_eta, cfg.lao_delta};
    run.gamma_map = pixel_gamma_map(run.g, lao);

    std::optional<double> sigma;
    if (cfg.sampler_sigma > 0.0) sigma = cfg.sampler_sigma;
    run.dist = build_distribution(run.gamma_map, sigma);

    // Global equilibrium state: the LAO gamma of the full image, kept inside
    // the distribution's support.
    const RegionStats global = region_stats(run.g, Region{0, run.g.rows(), 0, run.g.cols()});
    run.chain_init = compute_gamma(global.g_p, global.var_g, lao);
    run.chain_init = std::min(run.dist.hi, std::max(run.dist.lo, run.chain_init));

    Rng rng(cfg.seed);
    run.gamma_sets = sample_lao_hierarchy(
        run.dist, ChainConfig{cfg.sampler_lambda, cfg.sampler_levels}, run.chain_init, rng);

    run.stack = cfg.lao_y_only ? build_stack_y_only(input, run.gamma_sets)
                               : build_stack(input, run.gamma_sets);
    return run;
}

Image enhance_hierarchy_only(const Image& input, const RunConfig& cfg) {
    return run_hierarchy(input, cfg).stack.levels.front();
}

Image enhance_with_denoiser(const Image& input, const RunConfig& cfg,
                            const DenoiserParams& params, int ddim_steps) {
    const EncoderConfig enc{cfg.encoder_k, 3};
    const Latent f_l = encode(input, enc);
    DiffusionSchedule sched = make_schedule(cfg.diffusion_t, cfg.diffusion_beta1,
                                            cfg.diffusion_beta_t, cfg.diffusion_tau_max);
    Rng rng(cfg.seed);
    Rng infer_rng = rng.child(0xD1FF);
    return infer(f_l, params, sched, ddim_steps, enc, infer_rng);
}

TrainSample make_train_sample(const Image& input, const RunConfig& cfg) {
    HierarchyRun run = run_hierarchy(input, cfg);
    const EncoderConfig enc{cfg.encoder_k, 3};

    TrainSample sample;
    sample.f_l = encode(input, enc);
    sample.guides.reserve(run.stack.levels.size());
    for (const Image& level : run.stack.levels) sample.guides.push_back(encode(level, enc));
    sample.x0 = sample.guides.back();
    return sample;
}

}  // namespace lasq
