#include "lasq/diffusion.hpp"

#include <stdexcept>

namespace lasq {

namespace {

void validate(const DiffusionSchedule& s) {
    const int t_steps = s.t_steps();
    if (t_steps < 1 || s.alpha_bar.size() != t_steps || s.tau.size() != t_steps)
        throw std::invalid_argument("DiffusionSchedule: inconsistent lengths");
    double prod = 1.0;
    for (int t = 1; t <= t_steps; ++t) {
        const double b = s.beta_at(t);
        if (!(b > 0.0 && b < 1.0)) throw std::invalid_argument("DiffusionSchedule: beta outside (0,1)");
        prod *= 1.0 - b;
        if (std::abs(s.alpha_bar_at(t) - prod) > 1e-12)
            throw std::invalid_argument("DiffusionSchedule: alpha_bar inconsistent");
        const double tau = s.tau_at(t);
        if (tau < 0.0 || tau > std::sqrt(1.0 - b))
            throw std::invalid_argument("DiffusionSchedule: tau outside [0, sqrt(1-beta)]");
    }
}

DiffusionSchedule linear_betas(int t_steps, double beta_1, double beta_t) {
    if (t_steps < 1) throw std::invalid_argument("make_schedule: t_steps must be >= 1");
    DiffusionSchedule s;
    s.beta.resize(t_steps);
    s.alpha_bar.resize(t_steps);
    s.tau = Eigen::ArrayXd::Zero(t_steps);
    double prod = 1.0;
    for (int i = 0; i < t_steps; ++i) {
        s.beta(i) = t_steps == 1 ? beta_1 : beta_1 + (beta_t - beta_1) * i / (t_steps - 1);
        prod *= 1.0 - s.beta(i);
        s.alpha_bar(i) = prod;
    }
    return s;
}

void check_shapes(const Latent& a, const Latent& b, const char* what) {
    if (!a.same_shape(b)) throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

}  // namespace

DiffusionSchedule make_schedule(int t_steps, double beta_1, double beta_t, double tau_max) {
    DiffusionSchedule s = linear_betas(t_steps, beta_1, beta_t);
    for (int i = 0; i < t_steps; ++i) {
        const double t = static_cast<double>(i + 1);
        s.tau(i) = std::min(tau_max * (1.0 - t / t_steps), std::sqrt(1.0 - s.beta(i)));
    }
    validate(s);
    return s;
}

DiffusionSchedule make_schedule_const_tau(int t_steps, double beta_1, double beta_t, double tau) {
    DiffusionSchedule s = linear_betas(t_steps, beta_1, beta_t);
    s.tau.setConstant(tau);
    validate(s);
    return s;
}

int psi(int t, int t_total, int n_levels, PsiRounding rounding) {
    if (n_levels > t_total) throw std::invalid_argument("psi: N must be <= T");
    if (t < 1 || t > t_total) throw std::invalid_argument("psi: t outside [1, T]");
    const double x = static_cast<double>(t) * n_levels / t_total;
    long level = rounding == PsiRounding::Floor ? static_cast<long>(std::floor(x))
                                                : static_cast<long>(std::ceil(x));
    if (level < 1) level = 1;
    if (level > n_levels) level = n_levels;
    return static_cast<int>(level);
}

Latent forward_step(const Latent& x_prev, const Latent& f_guide, int t,
                    const DiffusionSchedule& sched, Rng& rng) {
    check_shapes(x_prev, f_guide, "forward_step");
    const double beta = sched.beta_at(t);
    const double tau = sched.tau_at(t);
    const double c = std::sqrt(1.0 - beta) - tau;
    const double noise_scale = std::sqrt(beta);

    Latent out = x_prev;
    for (int k = 0; k < out.channels(); ++k) {
        Grid2D& g = out.ch[static_cast<size_t>(k)];
        g = c * x_prev.ch[static_cast<size_t>(k)] + tau * f_guide.ch[static_cast<size_t>(k)];
        for (Eigen::Index i = 0; i < g.rows(); ++i)
            for (Eigen::Index j = 0; j < g.cols(); ++j)
                g(i, j) += noise_scale * rng.normal();
    }
    return out;
}

Moments forward_marginal_closed(const Latent& x0, const std::vector<Latent>& guides, int t,
                                const DiffusionSchedule& sched, PsiRounding rounding) {
    if (t < 1 || t > sched.t_steps()) throw std::invalid_argument("forward_marginal_closed: bad t");
    const int n_levels = static_cast<int>(guides.size());
    if (n_levels < 1) throw std::invalid_argument("forward_marginal_closed: no guides");

    const double ab_t = sched.alpha_bar_at(t);
    Moments m;
    m.mean = x0;
    for (auto& g : m.mean.ch) g *= std::sqrt(ab_t);

    for (int s = 1; s <= t; ++s) {
        const int level = psi(s, sched.t_steps(), n_levels, rounding);
        const Latent& guide = guides[static_cast<size_t>(level - 1)];
        check_shapes(x0, guide, "forward_marginal_closed");
        const double w = std::sqrt(ab_t) * sched.tau_at(s) *
                         std::sqrt(1.0 - sched.alpha_bar_at(s - 1)) /
                         std::sqrt(sched.alpha_bar_at(s));
        for (int k = 0; k < x0.channels(); ++k)
            m.mean.ch[static_cast<size_t>(k)] +=
                w * (guide.ch[static_cast<size_t>(k)] - x0.ch[static_cast<size_t>(k)]);
    }
    m.var = 1.0 - ab_t;
    return m;
}

Moments forward_marginal_exact(const Latent& x0, const std::vector<Latent>& guides, int t,
                               const DiffusionSchedule& sched, PsiRounding rounding) {
    if (t < 1 || t > sched.t_steps()) throw std::invalid_argument("forward_marginal_exact: bad t");
    const int n_levels = static_cast<int>(guides.size());
    if (n_levels < 1) throw std::invalid_argument("forward_marginal_exact: no guides");

    Moments m;
    m.mean = x0;
    m.var = 0.0;
    for (int s = 1; s <= t; ++s) {
        const int level = psi(s, sched.t_steps(), n_levels, rounding);
        const Latent& guide = guides[static_cast<size_t>(level - 1)];
        check_shapes(x0, guide, "forward_marginal_exact");
        const double beta = sched.beta_at(s);
        const double tau = sched.tau_at(s);
        const double c = std::sqrt(1.0 - beta) - tau;
        for (int k = 0; k < x0.channels(); ++k)
            m.mean.ch[static_cast<size_t>(k)] =
                c * m.mean.ch[static_cast<size_t>(k)] + tau * guide.ch[static_cast<size_t>(k)];
        m.var = c * c * m.var + beta;
    }
    return m;
}

Latent reverse_step(const Latent& x_t, const Latent& eps_hat, int t,
                    const DiffusionSchedule& sched, SigmaMode sigma_mode, Rng& rng) {
    check_shapes(x_t, eps_hat, "reverse_step");
    const double beta = sched.beta_at(t);
    const double inv = 1.0 / std::sqrt(1.0 - beta);
    const double sigma = sigma_mode == SigmaMode::Ancestral ? std::sqrt(beta) : 0.0;

    Latent out = x_t;
    for (int k = 0; k < out.channels(); ++k) {
        Grid2D& g = out.ch[static_cast<size_t>(k)];
        g = inv * (x_t.ch[static_cast<size_t>(k)] - beta * eps_hat.ch[static_cast<size_t>(k)]);
        if (sigma > 0.0)
            for (Eigen::Index i = 0; i < g.rows(); ++i)
                for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) += sigma * rng.normal();
    }
    return out;
}

Latent ddim_step(const Latent& x_t, const Latent& eps_hat, int t, int t_prev,
                 const DiffusionSchedule& sched) {
    check_shapes(x_t, eps_hat, "ddim_step");
    if (t_prev >= t || t_prev < 0) throw std::invalid_argument("ddim_step: need 0 <= t_prev < t");
    const double ab_t = sched.alpha_bar_at(t);
    const double ab_p = sched.alpha_bar_at(t_prev);

    Latent out = x_t;
    for (int k = 0; k < out.channels(); ++k) {
        const Grid2D& xt = x_t.ch[static_cast<size_t>(k)];
        const Grid2D& eh = eps_hat.ch[static_cast<size_t>(k)];
        Grid2D x0_hat = (xt - std::sqrt(1.0 - ab_t) * eh) / std::sqrt(ab_t);
        out.ch[static_cast<size_t>(k)] =
            std::sqrt(ab_p) * x0_hat + std::sqrt(1.0 - ab_p) * eh;
    }
    return out;
}

double loss_d(const Latent& eps_true, const Latent& eps_hat) {
    check_shapes(eps_true, eps_hat, "loss_d");
    double acc = 0.0;
    long n = 0;
    for (int k = 0; k < eps_true.channels(); ++k) {
        acc += (eps_true.ch[static_cast<size_t>(k)] - eps_hat.ch[static_cast<size_t>(k)])
                   .square()
                   .sum();
        n += eps_true.ch[static_cast<size_t>(k)].size();
    }
    return acc / static_cast<double>(n);
}

double loss_g(const Image& decoded_a, const Image& decoded_b) {
    if (decoded_a.rows() != decoded_b.rows() || decoded_a.cols() != decoded_b.cols())
        throw std::invalid_argument("loss_g: shape mismatch");
    double acc = 0.0;
    long n = 0;
    for (int c = 0; c < 3; ++c) {
        acc += (decoded_a.ch[static_cast<size_t>(c)] - decoded_b.ch[static_cast<size_t>(c)])
                   .abs()
                   .sum();
        n += decoded_a.ch[static_cast<size_t>(c)].size();
    }
    return acc / static_cast<double>(n);
}

}  // namespace lasq
