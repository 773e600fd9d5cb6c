#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lasq {

/// Flat `key = value` run configuration; keys are namespaced (lao.alpha,
/// diffusion.T, ...). LASQ_SEED in the environment overrides the seed.
struct RunConfig {
    std::uint64_t seed = 0;

    // lao.*
    double lao_alpha = 0.15;
    double lao_eta = 1.0;
    double lao_delta = 0.01;
    bool lao_y_only = false;

    // gf.*
    int gf_radius = 8;
    double gf_eps = 0.01;

    // sampler.*
    double sampler_sigma = 0.0;  // <= 0 means data-driven
    double sampler_lambda = 0.2;
    int sampler_levels = 4;

    // diffusion.*
    int diffusion_t = 16;
    double diffusion_beta1 = 1e-4;
    double diffusion_beta_t = 0.02;
    double diffusion_tau_max = 0.05;
    double diffusion_lambda_d = 0.9;
    double diffusion_lambda_g = 0.005;
    bool diffusion_psi_ceil = false;

    // encoder.*
    int encoder_k = 3;

    // training.*
    double train_lr = 2e-5;
    int train_steps = 200;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parses a config file; unknown keys and malformed lines are rejected with
/// line-numbered messages. Invariant violations are rejected too.
RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text);

/// Serializes every key; parse(serialize(cfg)) == cfg.
std::string serialize_config(const RunConfig& cfg);

/// Applies the LASQ_SEED environment override, if set.
void apply_env_seed(RunConfig& cfg);

void validate_config(const RunConfig& cfg);

}  // namespace lasq
