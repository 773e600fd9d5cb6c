#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>

#include "lasq/imageio.hpp"
#include "lasq/lv_analysis.hpp"
#include "lasq/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

struct CommonOpts {
    std::string config_path;
    std::int64_t seed_flag = -1;  // -1: not given
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "flat key = value config file");
    cmd->add_option("--seed", opts.seed_flag, "seed override (beats config and LASQ_SEED)");
}

lasq::RunConfig resolve_config(const CommonOpts& opts) {
    lasq::RunConfig cfg;
    if (!opts.config_path.empty()) cfg = lasq::parse_config_file(opts.config_path);
    lasq::apply_env_seed(cfg);
    if (opts.seed_flag >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed_flag);
    return cfg;
}

json gamma_sets_json(const std::vector<lasq::LaoSet>& sets) {
    json arr = json::array();
    for (const auto& s : sets) arr.push_back(s.values);
    return arr;
}

json config_json(const lasq::RunConfig& cfg) {
    return json{{"seed", cfg.seed},
                {"lao.alpha", cfg.lao_alpha},
                {"lao.eta", cfg.lao_eta},
                {"lao.delta", cfg.lao_delta},
                {"lao.y_only", cfg.lao_y_only},
                {"gf.radius", cfg.gf_radius},
                {"gf.eps", cfg.gf_eps},
                {"sampler.sigma", cfg.sampler_sigma},
                {"sampler.lambda", cfg.sampler_lambda},
                {"sampler.levels", cfg.sampler_levels},
                {"diffusion.T", cfg.diffusion_t},
                {"encoder.k", cfg.encoder_k}};
}

void append_provenance(const std::string& path, const json& record) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw lasq::IoError(lasq::IoError::Kind::WriteFailure, path + ": cannot write");
    out << record.dump() << "\n";
}

int cmd_enhance(const CommonOpts& common, const lasq::RunConfig& base, const std::string& input,
                const std::string& output, const std::string& checkpoint, int ddim_steps) {
    (void)common;
    lasq::RunConfig cfg = base;
    const lasq::Image img = lasq::load_image(input);
    lasq::HierarchyRun run = lasq::run_hierarchy(img, cfg);

    lasq::Image result;
    if (!checkpoint.empty()) {
        lasq::DenoiserParams params = lasq::load_checkpoint(checkpoint);
        result = lasq::enhance_with_denoiser(img, cfg, params, ddim_steps);
    } else {
        result = run.stack.levels.front();
    }
    lasq::save_image(result, output);

    json record{{"subcommand", "enhance"},
                {"used_checkpoint", !checkpoint.empty()},
                {"params", config_json(cfg)},
                {"chain_init", run.chain_init},
                {"gamma", gamma_sets_json(run.gamma_sets)}};
    append_provenance(output + ".prov.jsonl", record);
    return kExitOk;
}

int cmd_hierarchy(const lasq::RunConfig& cfg, const std::string& input,
                  const std::string& out_dir) {
    const lasq::Image img = lasq::load_image(input);
    lasq::HierarchyRun run = lasq::run_hierarchy(img, cfg);

    fs::create_directories(out_dir);
    std::ofstream manifest(fs::path(out_dir) / "manifest.txt");
    if (!manifest)
        throw lasq::IoError(lasq::IoError::Kind::WriteFailure, out_dir + ": cannot write manifest");
    manifest << std::setprecision(17);
    for (size_t n = 0; n < run.stack.levels.size(); ++n) {
        const int level = static_cast<int>(n) + 1;
        std::ostringstream name;
        name << "level_" << std::setw(2) << std::setfill('0') << level << ".ppm";
        lasq::save_image(run.stack.levels[n], (fs::path(out_dir) / name.str()).string());

        lasq::GridPartition part = lasq::grid_partition(img.rows(), img.cols(), level);
        manifest << "level " << level << " grid " << part.patch_rows << "x" << part.patch_cols
                 << " gamma";
        for (double g : run.gamma_sets[n].values) manifest << " " << g;
        manifest << "\n";
    }

    json record{{"subcommand", "hierarchy"},
                {"params", config_json(cfg)},
                {"chain_init", run.chain_init},
                {"gamma", gamma_sets_json(run.gamma_sets)}};
    append_provenance((fs::path(out_dir) / "provenance.jsonl").string(), record);
    return kExitOk;
}

int cmd_lv_scan(const std::string& low, const std::string& normal, const std::string& out_dir,
                int bins, double clip_eps) {
    const lasq::Image img_low = lasq::load_image(low);
    const lasq::Image img_norm = lasq::load_image(normal);
    const auto points = lasq::lv_points(img_low, img_norm);
    const std::vector<double> quantiles{0.05, 0.25, 0.5, 0.75, 0.95};
    const lasq::KappaSummary summary = lasq::kappa_summary(points, bins, quantiles, clip_eps);

    fs::create_directories(out_dir);
    {
        std::ofstream out(fs::path(out_dir) / "points.csv");
        out << std::setprecision(17) << "x,y\n";
        for (const auto& p : points) out << p.x << "," << p.y << "\n";
    }
    {
        std::ofstream out(fs::path(out_dir) / "kappa_hist.csv");
        out << std::setprecision(17) << "edge,count\n";
        for (size_t b = 0; b < summary.counts.size(); ++b)
            out << summary.bin_edges[b] << "," << summary.counts[b] << "\n";
        out << summary.bin_edges.back() << ",0\n";
    }
    {
        std::ofstream out(fs::path(out_dir) / "quantiles.csv");
        out << std::setprecision(17) << "q,kappa\n";
        for (const auto& [q, k] : summary.quantile_curves) out << q << "," << k << "\n";
    }
    return kExitOk;
}

int cmd_diffuse_sim(const lasq::RunConfig& cfg, const std::string& out_csv, double tau_const,
                    int runs) {
    using lasq::Grid2D;
    using lasq::Latent;

    const int t_steps = cfg.diffusion_t;
    const int n_levels = std::min(cfg.sampler_levels, t_steps);
    lasq::DiffusionSchedule sched =
        tau_const >= 0.0
            ? lasq::make_schedule_const_tau(t_steps, cfg.diffusion_beta1, cfg.diffusion_beta_t,
                                            tau_const)
            : lasq::make_schedule(t_steps, cfg.diffusion_beta1, cfg.diffusion_beta_t,
                                  cfg.diffusion_tau_max);

    // Fixed synthetic latent and guides with a constant per-level offset.
    const Eigen::Index side = 4;
    Latent x0(1, side, side);
    for (Eigen::Index i = 0; i < side; ++i)
        for (Eigen::Index j = 0; j < side; ++j)
            x0.ch[0](i, j) = 0.1 + 0.05 * static_cast<double>(i) + 0.02 * static_cast<double>(j);
    std::vector<Latent> guides;
    for (int n = 1; n <= n_levels; ++n) {
        Latent g = x0;
        g.ch[0] += 0.3 + 0.05 * n;
        guides.push_back(g);
    }
    const auto rounding =
        cfg.diffusion_psi_ceil ? lasq::PsiRounding::Ceil : lasq::PsiRounding::Floor;

    // Monte-Carlo moments of the iterated forward step, accumulated per t.
    std::vector<Grid2D> mc_sum(static_cast<size_t>(t_steps), Grid2D::Zero(side, side));
    std::vector<Grid2D> mc_sum2(static_cast<size_t>(t_steps), Grid2D::Zero(side, side));
    lasq::Rng rng(cfg.seed);
    for (int r = 0; r < runs; ++r) {
        lasq::Rng run_rng = rng.child(static_cast<std::uint64_t>(r));
        Latent x = x0;
        for (int t = 1; t <= t_steps; ++t) {
            const int level = lasq::psi(t, t_steps, n_levels, rounding);
            x = lasq::forward_step(x, guides[static_cast<size_t>(level - 1)], t, sched, run_rng);
            mc_sum[static_cast<size_t>(t - 1)] += x.ch[0];
            mc_sum2[static_cast<size_t>(t - 1)] += x.ch[0].square();
        }
    }

    std::ofstream out(out_csv);
    if (!out) throw lasq::IoError(lasq::IoError::Kind::WriteFailure, out_csv + ": cannot write");
    out << std::setprecision(17);
    out << "t,exact_mean,closed_mean,mc_mean,mc_se_mean,exact_var,closed_var,mc_var,"
           "closed_minus_exact_maxabs\n";
    for (int t = 1; t <= t_steps; ++t) {
        const auto exact = lasq::forward_marginal_exact(x0, guides, t, sched, rounding);
        const auto closed = lasq::forward_marginal_closed(x0, guides, t, sched, rounding);
        const Grid2D mc_mean = mc_sum[static_cast<size_t>(t - 1)] / runs;
        const Grid2D mc_var_g =
            (mc_sum2[static_cast<size_t>(t - 1)] / runs - mc_mean.square()).max(0.0);
        const double mc_var = mc_var_g.mean();
        const double se_mean = std::sqrt(mc_var / runs);
        out << t << "," << exact.mean.ch[0].mean() << "," << closed.mean.ch[0].mean() << ","
            << mc_mean.mean() << "," << se_mean << "," << exact.var << "," << closed.var << ","
            << mc_var << "," << (closed.mean.ch[0] - exact.mean.ch[0]).abs().maxCoeff() << "\n";
    }
    return kExitOk;
}

int cmd_train_toy(const lasq::RunConfig& cfg, const std::string& data_dir,
                  const std::string& out_ckpt) {
    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(data_dir)) {
        const std::string ext = entry.path().extension().string();
        if (ext == ".ppm" || ext == ".png") paths.push_back(entry.path().string());
    }
    if (paths.empty())
        throw lasq::IoError(lasq::IoError::Kind::MissingFile, data_dir + ": no .ppm/.png images");
    std::sort(paths.begin(), paths.end());

    std::vector<lasq::TrainSample> batch;
    batch.reserve(paths.size());
    for (const auto& p : paths) batch.push_back(lasq::make_train_sample(lasq::load_image(p), cfg));

    lasq::DiffusionSchedule sched = lasq::make_schedule(
        cfg.diffusion_t, cfg.diffusion_beta1, cfg.diffusion_beta_t, cfg.diffusion_tau_max);
    const lasq::EncoderConfig enc{cfg.encoder_k, 3};

    lasq::Rng rng(cfg.seed);
    lasq::Rng init_rng = rng.child(1);
    lasq::Rng train_rng = rng.child(2);
    lasq::DenoiserParams params = lasq::init_params(3, init_rng);
    lasq::AdamState adam = lasq::init_adam(params, cfg.train_lr);

    for (int step = 0; step < cfg.train_steps; ++step) {
        const auto losses = lasq::train_step(batch, params, sched, enc, adam,
                                             cfg.diffusion_lambda_d, cfg.diffusion_lambda_g,
                                             train_rng);
        if (step % 20 == 0 || step == cfg.train_steps - 1)
            std::cout << "step " << step << " loss_d " << losses.d << " loss_g " << losses.g
                      << "\n";
    }
    lasq::save_checkpoint(params, out_ckpt);
    return kExitOk;
}

int cmd_eval(const std::string& a_path, const std::string& b_path) {
    const lasq::Image a = lasq::load_image(a_path);
    const lasq::Image b = lasq::load_image(b_path);
    const double p = lasq::psnr(a, b);
    const double s = lasq::ssim(a, b);
    std::cout << std::setprecision(12);
    if (std::isinf(p))
        std::cout << "inf," << s << "\n";
    else
        std::cout << p << "," << s << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LASQ statistical low-light enhancement pipeline"};
    app.require_subcommand(1);

    // enhance
    auto* enhance = app.add_subcommand("enhance", "hierarchy-guided enhancement of one image");
    CommonOpts enhance_common;
    add_common(enhance, enhance_common);
    std::string in_path, out_path, ckpt_path;
    int ddim_steps = 8;
    enhance->add_option("--input", in_path, "low-light image (PPM/PNG)")->required();
    enhance->add_option("--output", out_path, "enhanced image path")->required();
    enhance->add_option("--checkpoint", ckpt_path, "trained denoiser checkpoint (optional)");
    enhance->add_option("--ddim-steps", ddim_steps, "implicit sampling steps");
    double alpha_flag = -1, eta_flag = -1, sigma_flag = -1;
    int levels_flag = -1;
    bool y_only = false;
    enhance->add_option("--alpha", alpha_flag, "LAO base offset");
    enhance->add_option("--eta", eta_flag, "LAO contrast gain");
    enhance->add_option("--sigma", sigma_flag, "target distribution sigma override");
    enhance->add_option("--levels", levels_flag, "hierarchy depth N");
    enhance->add_flag("--y-only", y_only, "apply gamma on the Y channel only");

    // hierarchy
    auto* hierarchy = app.add_subcommand("hierarchy", "write the enhanced stack plus manifest");
    CommonOpts hier_common;
    add_common(hierarchy, hier_common);
    std::string hier_in, hier_out;
    int hier_levels = -1;
    hierarchy->add_option("--input", hier_in)->required();
    hierarchy->add_option("--out-dir", hier_out)->required();
    hierarchy->add_option("--levels", hier_levels, "hierarchy depth N");

    // lv-scan
    auto* lv = app.add_subcommand("lv-scan", "luminance-variation scatter and power-law summary");
    CommonOpts lv_common;
    add_common(lv, lv_common);
    std::string lv_low, lv_normal, lv_out;
    int lv_bins = 50;
    double lv_clip = 0.004;
    lv->add_option("--low", lv_low)->required();
    lv->add_option("--normal", lv_normal)->required();
    lv->add_option("--out", lv_out)->required();
    lv->add_option("--bins", lv_bins);
    lv->add_option("--clip-eps", lv_clip);

    // diffuse-sim
    auto* sim = app.add_subcommand("diffuse-sim",
                                   "compare closed-form, exact and Monte-Carlo forward moments");
    CommonOpts sim_common;
    add_common(sim, sim_common);
    std::string sim_out = "diffuse_sim.csv";
    double sim_tau = -1.0;
    int sim_runs = 20000, sim_t = -1, sim_levels = -1;
    sim->add_option("--out", sim_out);
    sim->add_option("--T", sim_t, "diffusion steps");
    sim->add_option("--levels", sim_levels, "guidance levels N");
    sim->add_option("--tau", sim_tau, "constant tau (default: ramp schedule)");
    sim->add_option("--runs", sim_runs, "Monte-Carlo trajectory count");

    // train-toy
    auto* train = app.add_subcommand("train-toy", "train the toy denoiser on a directory");
    CommonOpts train_common;
    add_common(train, train_common);
    std::string train_data, train_out = "lasq.ckpt";
    int train_t = -1, train_levels = -1, train_steps_flag = -1;
    double train_lr_flag = -1.0;
    train->add_option("--data", train_data)->required();
    train->add_option("--out", train_out);
    train->add_option("--T", train_t);
    train->add_option("--levels", train_levels);
    train->add_option("--steps", train_steps_flag);
    train->add_option("--lr", train_lr_flag);

    // eval
    auto* eval = app.add_subcommand("eval", "print psnr_db,ssim for an image pair");
    CommonOpts eval_common;
    add_common(eval, eval_common);
    std::string eval_a, eval_b;
    eval->add_option("--a", eval_a)->required();
    eval->add_option("--b", eval_b)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (enhance->parsed()) {
            lasq::RunConfig cfg = resolve_config(enhance_common);
            if (alpha_flag >= 0) cfg.lao_alpha = alpha_flag;
            if (eta_flag >= 0) cfg.lao_eta = eta_flag;
            if (sigma_flag >= 0) cfg.sampler_sigma = sigma_flag;
            if (levels_flag >= 1) cfg.sampler_levels = levels_flag;
            if (y_only) cfg.lao_y_only = true;
            lasq::validate_config(cfg);
            return cmd_enhance(enhance_common, cfg, in_path, out_path, ckpt_path, ddim_steps);
        }
        if (hierarchy->parsed()) {
            lasq::RunConfig cfg = resolve_config(hier_common);
            if (hier_levels >= 1) cfg.sampler_levels = hier_levels;
            lasq::validate_config(cfg);
            return cmd_hierarchy(cfg, hier_in, hier_out);
        }
        if (lv->parsed()) {
            return cmd_lv_scan(lv_low, lv_normal, lv_out, lv_bins, lv_clip);
        }
        if (sim->parsed()) {
            lasq::RunConfig cfg = resolve_config(sim_common);
            if (sim_t >= 1) cfg.diffusion_t = sim_t;
            if (sim_levels >= 1) cfg.sampler_levels = sim_levels;
            lasq::validate_config(cfg);
            return cmd_diffuse_sim(cfg, sim_out, sim_tau, sim_runs);
        }
        if (train->parsed()) {
            lasq::RunConfig cfg = resolve_config(train_common);
            if (train_t >= 1) cfg.diffusion_t = train_t;
            if (train_levels >= 1) cfg.sampler_levels = train_levels;
            if (train_steps_flag >= 0) cfg.train_steps = train_steps_flag;
            if (train_lr_flag >= 0) cfg.train_lr = train_lr_flag;
            lasq::validate_config(cfg);
            return cmd_train_toy(cfg, train_data, train_out);
        }
        if (eval->parsed()) {
            lasq::RunConfig cfg = resolve_config(eval_common);
            lasq::validate_config(cfg);
            return cmd_eval(eval_a, eval_b);
        }
    } catch (const lasq::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const lasq::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitConfig;
}
