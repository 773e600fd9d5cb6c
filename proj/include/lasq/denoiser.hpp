#pragma once

#include <string>
#include <vector>

#include "lasq/diffusion.hpp"

namespace lasq {

struct EncoderConfig {
    int k = 1;         // downsampling stages; image dims must divide by 2^k
    int channels = 3;  // pass-through channel count
};

/// k applications of 2x2 average pooling per channel.
Latent encode(const Image& img, const EncoderConfig& cfg);

/// k bilinear upsamplings; clamps into [0,1] unless clamp is false (the
/// linear form is what the guidance loss differentiates through).
Image decode(const Latent& lat, const EncoderConfig& cfg, bool clamp = true);

/// One conv3x3 layer: kernels[out][in], zero padding, same-size output.
struct ConvLayer {
    std::vector<std::vector<Grid2D>> w;  // [out_ch][in_ch], each 3x3
    Eigen::VectorXd b;

    int out_channels() const { return static_cast<int>(w.size()); }
    int in_channels() const { return w.empty() ? 0 : static_cast<int>(w[0].size()); }
};

/// conv3x3(2C+1 -> 16) -> ReLU -> conv3x3(16 -> 16) -> ReLU -> conv3x3(16 -> C)
struct DenoiserParams {
    static constexpr int kHidden = 16;
    ConvLayer l1, l2, l3;
};

/// Glorot-uniform kernels, zero biases.
DenoiserParams init_params(int channels, Rng& rng);

/// eps_hat = net([x_t, f_l, broadcast t_frac]).
Latent denoiser_forward(const Latent& x_t, double t_frac, const Latent& f_l,
                        const DenoiserParams& params);

struct DenoiserGrads {
    ConvLayer l1, l2, l3;  // same shapes as the parameters
};

struct TrainSample {
    Latent x0;                  // encoded target (F_H^(N) in the toy setup)
    std::vector<Latent> guides; // encoded hierarchy stack, level 1..N
    Latent f_l;                 // encoded low-light input
};

struct AdamState {
    double lr = 2e-5;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long step = 0;
    DenoiserGrads m, v;  // first/second moment accumulators
};

AdamState init_adam(const DenoiserParams& params, double lr);

struct TrainLosses {
    double total = 0.0;
    double d = 0.0;  // noise prediction MSE
    double g = 0.0;  // decoded guidance L1
};

/// One full-batch training step: per sample draws t uniformly, forms x_t from
/// the exact forward moments plus matched noise, backpropagates
/// lambda_d * L_d + lambda_g * L_g analytically and applies one Adam update.
TrainLosses train_step(const std::vector<TrainSample>& batch, DenoiserParams& params,
                       const DiffusionSchedule& sched, const EncoderConfig& cfg,
                       AdamState& adam, double lambda_d, double lambda_g, Rng& rng);

/// Analytic gradients of lambda_d * L_d + lambda_g * L_g for one sample with
/// everything held fixed; used by the finite-difference check.
DenoiserGrads sample_gradients(const TrainSample& sample, const Latent& x_t,
                               const Latent& eps_true, int t, const DenoiserParams& params,
                               const DiffusionSchedule& sched, const EncoderConfig& cfg,
                               double lambda_d, double lambda_g, TrainLosses* losses = nullptr);

/// The loss the gradients above differentiate, for finite differencing.
double sample_loss(const TrainSample& sample, const Latent& x_t, const Latent& eps_true, int t,
                   const DenoiserParams& params, const DiffusionSchedule& sched,
                   const EncoderConfig& cfg, double lambda_d, double lambda_g);

/// DDIM inference from pure noise down a strided schedule, decoded to an image.
Image infer(const Latent& f_l, const DenoiserParams& params, const DiffusionSchedule& sched,
            int steps, const EncoderConfig& cfg, Rng& rng);

/// Flat binary checkpoint: magic "LASQ", u32 version, shape-prefixed float64
/// tensors in declaration order (l1.w, l1.b, l2.w, l2.b, l3.w, l3.b).
void save_checkpoint(const DenoiserParams& params, const std::string& path);
DenoiserParams load_checkpoint(const std::string& path);

}  // namespace lasq
