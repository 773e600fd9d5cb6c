#pragma once

#include <vector>

#include "lasq/image.hpp"
#include "lasq/rng.hpp"

namespace lasq {

/// Multi-channel latent feature map (C planes of equal shape).
struct Latent {
    std::vector<Grid2D> ch;

    Latent() = default;
    Latent(int channels, Eigen::Index rows, Eigen::Index cols)
        : ch(static_cast<size_t>(channels), Grid2D::Zero(rows, cols)) {}

    int channels() const { return static_cast<int>(ch.size()); }
    Eigen::Index rows() const { return ch.empty() ? 0 : ch[0].rows(); }
    Eigen::Index cols() const { return ch.empty() ? 0 : ch[0].cols(); }
    bool same_shape(const Latent& o) const {
        return channels() == o.channels() && rows() == o.rows() && cols() == o.cols();
    }
};

enum class PsiRounding { Floor, Ceil };
enum class SigmaMode { Ancestral, Deterministic };

/// Per-step coefficients; index 0 holds step t = 1.
struct DiffusionSchedule {
    Eigen::ArrayXd beta;
    Eigen::ArrayXd alpha_bar;  // cumulative products of (1 - beta)
    Eigen::ArrayXd tau;        // guidance weights, 0 <= tau_t <= sqrt(1 - beta_t)

    int t_steps() const { return static_cast<int>(beta.size()); }
    /// alpha_bar with the convention alpha_bar(0) = 1; t in 0..T.
    double alpha_bar_at(int t) const { return t == 0 ? 1.0 : alpha_bar(t - 1); }
    double beta_at(int t) const { return beta(t - 1); }
    double tau_at(int t) const { return tau(t - 1); }
};

/// Linear beta schedule with tau_t = tau_max * (1 - t/T).
DiffusionSchedule make_schedule(int t_steps, double beta_1 = 1e-4, double beta_t = 0.02,
                                double tau_max = 0.05);
/// Same betas with a constant tau.
DiffusionSchedule make_schedule_const_tau(int t_steps, double beta_1, double beta_t, double tau);

/// Temporal mapping of diffusion step t to hierarchy level, clamped into [1, N].
int psi(int t, int t_total, int n_levels, PsiRounding rounding = PsiRounding::Floor);

/// One guided forward step:
/// x_t = (sqrt(1-beta_t) - tau_t) x_{t-1} + tau_t f_guide + sqrt(beta_t) eps.
Latent forward_step(const Latent& x_prev, const Latent& f_guide, int t,
                    const DiffusionSchedule& sched, Rng& rng);

struct Moments {
    Latent mean;
    double var = 0.0;
};

/// Closed-form marginal with weights
/// w_{t,s} = sqrt(ab_t) * tau_s * sqrt(1 - ab_{s-1}) / sqrt(ab_s), var = 1 - ab_t.
/// guides[n-1] is the level-n guide.
Moments forward_marginal_closed(const Latent& x0, const std::vector<Latent>& guides, int t,
                                const DiffusionSchedule& sched,
                                PsiRounding rounding = PsiRounding::Floor);

/// Exact first/second moments of the forward_step recursion:
/// m_t = c_t m_{t-1} + tau_t f, v_t = c_t^2 v_{t-1} + beta_t, c_t = sqrt(1-beta_t) - tau_t.
Moments forward_marginal_exact(const Latent& x0, const std::vector<Latent>& guides, int t,
                               const DiffusionSchedule& sched,
                               PsiRounding rounding = PsiRounding::Floor);

/// x_{t-1} = (x_t - beta_t eps_hat) / sqrt(1-beta_t) + sigma_t b,
/// sigma_t = sqrt(beta_t) in ancestral mode, 0 in deterministic mode.
Latent reverse_step(const Latent& x_t, const Latent& eps_hat, int t,
                    const DiffusionSchedule& sched, SigmaMode sigma_mode, Rng& rng);

/// Deterministic implicit update from t down to t_prev (t_prev = 0 returns x0_hat).
Latent ddim_step(const Latent& x_t, const Latent& eps_hat, int t, int t_prev,
                 const DiffusionSchedule& sched);

/// Mean squared error over all elements.
double loss_d(const Latent& eps_true, const Latent& eps_hat);
/// Mean absolute error over all elements.
double loss_g(const Image& decoded_a, const Image& decoded_b);

}  // namespace lasq
