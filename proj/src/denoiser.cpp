#include "lasq/denoiser.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace lasq {

namespace {

void check_divisible(Eigen::Index rows, Eigen::Index cols, int k) {
    const Eigen::Index f = Eigen::Index{1} << k;
    if (k < 0 || rows % f != 0 || cols % f != 0)
        throw std::invalid_argument("encoder: image dimensions must divide by 2^k");
}

std::vector<Grid2D> conv_layer_forward(const std::vector<Grid2D>& in, const ConvLayer& layer) {
    if (static_cast<int>(in.size()) != layer.in_channels())
        throw std::invalid_argument("denoiser: channel mismatch");
    std::vector<Grid2D> out(static_cast<size_t>(layer.out_channels()));
    for (int o = 0; o < layer.out_channels(); ++o) {
        Grid2D acc = Grid2D::Constant(in[0].rows(), in[0].cols(), layer.b(o));
        for (int i = 0; i < layer.in_channels(); ++i)
            acc += conv2d(in[static_cast<size_t>(i)], layer.w[static_cast<size_t>(o)][static_cast<size_t>(i)]);
        out[static_cast<size_t>(o)] = std::move(acc);
    }
    return out;
}

std::vector<Grid2D> relu(const std::vector<Grid2D>& z) {
    std::vector<Grid2D> a(z.size());
    for (size_t i = 0; i < z.size(); ++i) a[i] = z[i].max(0.0);
    return a;
}

Grid2D rot180(const Grid2D& k) { return k.reverse(); }

/// dK(a,b) = sum_{p,q} in(p+a-1, q+b-1) * dout(p,q), zero outside the image.
Grid2D kernel_grad(const Grid2D& in, const Grid2D& dout) {
    Grid2D dk = Grid2D::Zero(3, 3);
    for (Eigen::Index a = -1; a <= 1; ++a) {
        for (Eigen::Index b = -1; b <= 1; ++b) {
            double acc = 0.0;
            for (Eigen::Index p = 0; p < dout.rows(); ++p) {
                const Eigen::Index ip = p + a;
                if (ip < 0 || ip >= in.rows()) continue;
                for (Eigen::Index q = 0; q < dout.cols(); ++q) {
                    const Eigen::Index iq = q + b;
                    if (iq < 0 || iq >= in.cols()) continue;
                    acc += in(ip, iq) * dout(p, q);
                }
            }
            dk(a + 1, b + 1) = acc;
        }
    }
    return dk;
}

/// Gradients for one layer; returns the gradient wrt the layer input.
std::vector<Grid2D> conv_layer_backward(const std::vector<Grid2D>& in, const ConvLayer& layer,
                                        const std::vector<Grid2D>& dout, ConvLayer& grads) {
    for (int o = 0; o < layer.out_channels(); ++o) {
        grads.b(o) += dout[static_cast<size_t>(o)].sum();
        for (int i = 0; i < layer.in_channels(); ++i)
            grads.w[static_cast<size_t>(o)][static_cast<size_t>(i)] +=
                kernel_grad(in[static_cast<size_t>(i)], dout[static_cast<size_t>(o)]);
    }
    std::vector<Grid2D> din(static_cast<size_t>(layer.in_channels()));
    for (int i = 0; i < layer.in_channels(); ++i) {
        Grid2D acc = Grid2D::Zero(in[0].rows(), in[0].cols());
        for (int o = 0; o < layer.out_channels(); ++o)
            acc += conv2d(dout[static_cast<size_t>(o)],
                          rot180(layer.w[static_cast<size_t>(o)][static_cast<size_t>(i)]));
        din[static_cast<size_t>(i)] = std::move(acc);
    }
    return din;
}

ConvLayer zero_like(const ConvLayer& l) {
    ConvLayer z;
    z.w.assign(l.w.size(), std::vector<Grid2D>(l.w[0].size(), Grid2D::Zero(3, 3)));
    z.b = Eigen::VectorXd::Zero(l.b.size());
    return z;
}

struct Activations {
    std::vector<Grid2D> a0, z1, a1, z2, a2, z3;
};

Activations forward_acts(const Latent& x_t, double t_frac, const Latent& f_l,
                         const DenoiserParams& params) {
    if (!x_t.same_shape(f_l)) throw std::invalid_argument("denoiser_forward: shape mismatch");
    Activations acts;
    acts.a0.reserve(static_cast<size_t>(x_t.channels() + f_l.channels() + 1));
    for (const auto& c : x_t.ch) acts.a0.push_back(c);
    for (const auto& c : f_l.ch) acts.a0.push_back(c);
    acts.a0.push_back(Grid2D::Constant(x_t.rows(), x_t.cols(), t_frac));

    acts.z1 = conv_layer_forward(acts.a0, params.l1);
    acts.a1 = relu(acts.z1);
    acts.z2 = conv_layer_forward(acts.a1, params.l2);
    acts.a2 = relu(acts.z2);
    acts.z3 = conv_layer_forward(acts.a2, params.l3);
    return acts;
}

/// Linear decode chain used inside the guidance loss (no clamp).
std::vector<Grid2D> decode_linear(const std::vector<Grid2D>& lat, int k) {
    std::vector<Grid2D> out = lat;
    for (int s = 0; s < k; ++s)
        for (auto& c : out) c = bilinear_resize(c, c.rows() * 2, c.cols() * 2);
    return out;
}

std::vector<Grid2D> decode_linear_adjoint(const std::vector<Grid2D>& grad, int k,
                                          Eigen::Index lat_rows, Eigen::Index lat_cols) {
    std::vector<Grid2D> out = grad;
    for (int s = k - 1; s >= 0; --s) {
        const Eigen::Index r = lat_rows << s, c = lat_cols << s;
        for (auto& g : out) g = bilinear_resize_adjoint(g, r, c);
    }
    return out;
}

void adam_update_array(Grid2D& p, const Grid2D& g, Grid2D& m, Grid2D& v, const AdamState& st,
                       double corr1, double corr2) {
    m = st.beta1 * m + (1.0 - st.beta1) * g;
    v = st.beta2 * v + (1.0 - st.beta2) * g.square();
    p -= st.lr * (m / corr1) / ((v / corr2).sqrt() + st.eps);
}

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw std::runtime_error("checkpoint: truncated");
    return v;
}

void write_conv(std::ostream& out, const ConvLayer& l) {
    // kernel tensor [out, in, 3, 3]
    write_u32(out, 4);
    write_u32(out, static_cast<std::uint32_t>(l.out_channels()));
    write_u32(out, static_cast<std::uint32_t>(l.in_channels()));
    write_u32(out, 3);
    write_u32(out, 3);
    for (const auto& row : l.w)
        for (const auto& k : row)
            for (Eigen::Index a = 0; a < 3; ++a)
                for (Eigen::Index b = 0; b < 3; ++b) {
                    const double v = k(a, b);
                    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
                }
    // bias [out]
    write_u32(out, 1);
    write_u32(out, static_cast<std::uint32_t>(l.b.size()));
    for (Eigen::Index i = 0; i < l.b.size(); ++i) {
        const double v = l.b(i);
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
}

ConvLayer read_conv(std::istream& in) {
    if (read_u32(in) != 4) throw std::runtime_error("checkpoint: expected rank-4 kernel tensor");
    const std::uint32_t oc = read_u32(in), ic = read_u32(in);
    if (read_u32(in) != 3 || read_u32(in) != 3)
        throw std::runtime_error("checkpoint: kernels must be 3x3");
    ConvLayer l;
    l.w.assign(oc, std::vector<Grid2D>(ic, Grid2D::Zero(3, 3)));
    for (auto& row : l.w)
        for (auto& k : row)
            for (Eigen::Index a = 0; a < 3; ++a)
                for (Eigen::Index b = 0; b < 3; ++b) {
                    double v;
                    in.read(reinterpret_cast<char*>(&v), sizeof(v));
                    if (!in) throw std::runtime_error("checkpoint: truncated");
                    k(a, b) = v;
                }
    if (read_u32(in) != 1) throw std::runtime_error("checkpoint: expected rank-1 bias tensor");
    const std::uint32_t bn = read_u32(in);
    if (bn != oc) throw std::runtime_error("checkpoint: bias length mismatch");
    l.b.resize(bn);
    for (std::uint32_t i = 0; i < bn; ++i) {
        double v;
        in.read(reinterpret_cast<char*>(&v), sizeof(v));
        if (!in) throw std::runtime_error("checkpoint: truncated");
        l.b(i) = v;
    }
    return l;
}

}  // namespace

Latent encode(const Image& img, const EncoderConfig& cfg) {
    check_divisible(img.rows(), img.cols(), cfg.k);
    Latent lat;
    lat.ch.assign(img.ch.begin(), img.ch.end());
    for (int s = 0; s < cfg.k; ++s)
        for (auto& c : lat.ch) c = avg_pool2(c);
    return lat;
}

Image decode(const Latent& lat, const EncoderConfig& cfg, bool clamp) {
    if (lat.channels() != 3) throw std::invalid_argument("decode: expected 3 channels");
    std::vector<Grid2D> planes = decode_linear(lat.ch, cfg.k);
    Image img;
    for (int c = 0; c < 3; ++c) {
        img.ch[static_cast<size_t>(c)] =
            clamp ? planes[static_cast<size_t>(c)].min(1.0).max(0.0) : planes[static_cast<size_t>(c)];
    }
    return img;
}

DenoiserParams init_params(int channels, Rng& rng) {
    auto make_layer = [&rng](int in_ch, int out_ch) {
        ConvLayer l;
        const double limit = std::sqrt(6.0 / (in_ch * 9 + out_ch * 9));
        l.w.assign(static_cast<size_t>(out_ch),
                   std::vector<Grid2D>(static_cast<size_t>(in_ch), Grid2D::Zero(3, 3)));
        for (auto& row : l.w)
            for (auto& k : row)
                for (Eigen::Index a = 0; a < 3; ++a)
                    for (Eigen::Index b = 0; b < 3; ++b)
                        k(a, b) = limit * (2.0 * rng.uniform() - 1.0);
        l.b = Eigen::VectorXd::Zero(out_ch);
        return l;
    };
    DenoiserParams p;
    p.l1 = make_layer(2 * channels + 1, DenoiserParams::kHidden);
    p.l2 = make_layer(DenoiserParams::kHidden, DenoiserParams::kHidden);
    p.l3 = make_layer(DenoiserParams::kHidden, channels);
    return p;
}

Latent denoiser_forward(const Latent& x_t, double t_frac, const Latent& f_l,
                        const DenoiserParams& params) {
    Activations acts = forward_acts(x_t, t_frac, f_l, params);
    Latent out;
    out.ch = std::move(acts.z3);
    return out;
}

AdamState init_adam(const DenoiserParams& params, double lr) {
    AdamState st;
    st.lr = lr;
    st.m = DenoiserGrads{zero_like(params.l1), zero_like(params.l2), zero_like(params.l3)};
    st.v = DenoiserGrads{zero_like(params.l1), zero_like(params.l2), zero_like(params.l3)};
    return st;
}

DenoiserGrads sample_gradients(const TrainSample& sample, const Latent& x_t,
                               const Latent& eps_true, int t, const DenoiserParams& params,
                               const DiffusionSchedule& sched, const EncoderConfig& cfg,
                               double lambda_d, double lambda_g, TrainLosses* losses) {
    const double t_frac = static_cast<double>(t) / sched.t_steps();
    Activations acts = forward_acts(x_t, t_frac, sample.f_l, params);
    const std::vector<Grid2D>& eps_hat = acts.z3;
    const int c_out = static_cast<int>(eps_hat.size());
    const double n_d = static_cast<double>(c_out) * x_t.rows() * x_t.cols();

    double l_d = 0.0;
    std::vector<Grid2D> dz3(eps_hat.size());
    for (int k = 0; k < c_out; ++k) {
        const Grid2D diff = eps_hat[static_cast<size_t>(k)] - eps_true.ch[static_cast<size_t>(k)];
        l_d += diff.square().sum();
        dz3[static_cast<size_t>(k)] = lambda_d * 2.0 / n_d * diff;
    }
    l_d /= n_d;

    // Guidance term through x0_hat and the linear decoder.
    const double ab = sched.alpha_bar_at(t);
    const double s = std::sqrt(1.0 - ab);
    const Latent& g1 = sample.guides.front();  // coarsest guide
    std::vector<Grid2D> x0_hat(eps_hat.size());
    for (int k = 0; k < c_out; ++k)
        x0_hat[static_cast<size_t>(k)] =
            (x_t.ch[static_cast<size_t>(k)] - s * eps_hat[static_cast<size_t>(k)]) / std::sqrt(ab);

    std::vector<Grid2D> dec_a = decode_linear(x0_hat, cfg.k);
    std::vector<Grid2D> dec_b = decode_linear(g1.ch, cfg.k);
    const double n_g = static_cast<double>(c_out) * dec_a[0].rows() * dec_a[0].cols();
    double l_g = 0.0;
    std::vector<Grid2D> dsign(dec_a.size());
    for (size_t k = 0; k < dec_a.size(); ++k) {
        const Grid2D diff = dec_a[k] - dec_b[k];
        l_g += diff.abs().sum();
        dsign[k] = diff.sign() / n_g;
    }
    l_g /= n_g;

    std::vector<Grid2D> dx0 = decode_linear_adjoint(dsign, cfg.k, x_t.rows(), x_t.cols());
    const double chain = -s / std::sqrt(ab);
    for (int k = 0; k < c_out; ++k)
        dz3[static_cast<size_t>(k)] += lambda_g * chain * dx0[static_cast<size_t>(k)];

    DenoiserGrads grads{zero_like(params.l1), zero_like(params.l2), zero_like(params.l3)};
    std::vector<Grid2D> da2 = conv_layer_backward(acts.a2, params.l3, dz3, grads.l3);
    for (size_t k = 0; k < da2.size(); ++k)
        da2[k] *= (acts.z2[k] > 0.0).cast<double>();
    std::vector<Grid2D> da1 = conv_layer_backward(acts.a1, params.l2, da2, grads.l2);
    for (size_t k = 0; k < da1.size(); ++k)
        da1[k] *= (acts.z1[k] > 0.0).cast<double>();
    conv_layer_backward(acts.a0, params.l1, da1, grads.l1);

    if (losses) {
        losses->d = l_d;
        losses->g = l_g;
        losses->total = lambda_d * l_d + lambda_g * l_g;
    }
    return grads;
}

double sample_loss(const TrainSample& sample, const Latent& x_t, const Latent& eps_true, int t,
                   const DenoiserParams& params, const DiffusionSchedule& sched,
                   const EncoderConfig& cfg, double lambda_d, double lambda_g) {
    const double t_frac = static_cast<double>(t) / sched.t_steps();
    Latent eps_hat = denoiser_forward(x_t, t_frac, sample.f_l, params);
    const double l_d = loss_d(eps_true, eps_hat);

    const double ab = sched.alpha_bar_at(t);
    const double s = std::sqrt(1.0 - ab);
    std::vector<Grid2D> x0_hat(eps_hat.ch.size());
    for (size_t k = 0; k < eps_hat.ch.size(); ++k)
        x0_hat[k] = (x_t.ch[k] - s * eps_hat.ch[k]) / std::sqrt(ab);

    std::vector<Grid2D> dec_a = decode_linear(x0_hat, cfg.k);
    std::vector<Grid2D> dec_b = decode_linear(sample.guides.front().ch, cfg.k);
    double l_g = 0.0;
    double n_g = 0.0;
    for (size_t k = 0; k < dec_a.size(); ++k) {
        l_g += (dec_a[k] - dec_b[k]).abs().sum();
        n_g += static_cast<double>(dec_a[k].size());
    }
    l_g /= n_g;
    return lambda_d * l_d + lambda_g * l_g;
}

namespace {

void accumulate(DenoiserGrads& into, const DenoiserGrads& from, double scale) {
    auto add_layer = [scale](ConvLayer& a, const ConvLayer& b) {
        for (size_t o = 0; o < a.w.size(); ++o)
            for (size_t i = 0; i < a.w[o].size(); ++i) a.w[o][i] += scale * b.w[o][i];
        a.b += scale * b.b;
    };
    add_layer(into.l1, from.l1);
    add_layer(into.l2, from.l2);
    add_layer(into.l3, from.l3);
}

void adam_apply(ConvLayer& p, const ConvLayer& g, ConvLayer& m, ConvLayer& v,
                const AdamState& st, double corr1, double corr2) {
    for (size_t o = 0; o < p.w.size(); ++o)
        for (size_t i = 0; i < p.w[o].size(); ++i)
            adam_update_array(p.w[o][i], g.w[o][i], m.w[o][i], v.w[o][i], st, corr1, corr2);
    Eigen::ArrayXd mb = m.b.array(), vb = v.b.array(), gb = g.b.array();
    mb = st.beta1 * mb + (1.0 - st.beta1) * gb;
    vb = st.beta2 * vb + (1.0 - st.beta2) * gb.square();
    p.b.array() -= st.lr * (mb / corr1) / ((vb / corr2).sqrt() + st.eps);
    m.b = mb.matrix();
    v.b = vb.matrix();
}

bool grads_finite(const DenoiserGrads& g) {
    auto layer_ok = [](const ConvLayer& l) {
        for (const auto& row : l.w)
            for (const auto& k : row)
                if (!k.allFinite()) return false;
        return l.b.allFinite();
    };
    return layer_ok(g.l1) && layer_ok(g.l2) && layer_ok(g.l3);
}

}  // namespace

TrainLosses train_step(const std::vector<TrainSample>& batch, DenoiserParams& params,
                       const DiffusionSchedule& sched, const EncoderConfig& cfg,
                       AdamState& adam, double lambda_d, double lambda_g, Rng& rng) {
    if (batch.empty()) throw std::invalid_argument("train_step: empty batch");

    DenoiserGrads total{zero_like(params.l1), zero_like(params.l2), zero_like(params.l3)};
    TrainLosses avg;
    const double inv_n = 1.0 / static_cast<double>(batch.size());

    for (const TrainSample& sample : batch) {
        const int t = 1 + static_cast<int>(rng.uniform() * sched.t_steps()) % sched.t_steps();
        Moments mo = forward_marginal_exact(sample.x0, sample.guides, t, sched);
        const double sd = std::sqrt(mo.var);

        Latent eps(sample.x0.channels(), sample.x0.rows(), sample.x0.cols());
        Latent x_t = mo.mean;
        for (int k = 0; k < eps.channels(); ++k)
            for (Eigen::Index i = 0; i < eps.rows(); ++i)
                for (Eigen::Index j = 0; j < eps.cols(); ++j) {
                    const double e = rng.normal();
                    eps.ch[static_cast<size_t>(k)](i, j) = e;
                    x_t.ch[static_cast<size_t>(k)](i, j) += sd * e;
                }

        TrainLosses losses;
        DenoiserGrads g = sample_gradients(sample, x_t, eps, t, params, sched, cfg, lambda_d,
                                           lambda_g, &losses);
        accumulate(total, g, inv_n);
        avg.total += inv_n * losses.total;
        avg.d += inv_n * losses.d;
        avg.g += inv_n * losses.g;
    }

    if (!std::isfinite(avg.total) || !grads_finite(total))
        throw std::runtime_error("train_step: non-finite loss or gradient");

    ++adam.step;
    const double corr1 = 1.0 - std::pow(adam.beta1, static_cast<double>(adam.step));
    const double corr2 = 1.0 - std::pow(adam.beta2, static_cast<double>(adam.step));
    adam_apply(params.l1, total.l1, adam.m.l1, adam.v.l1, adam, corr1, corr2);
    adam_apply(params.l2, total.l2, adam.m.l2, adam.v.l2, adam, corr1, corr2);
    adam_apply(params.l3, total.l3, adam.m.l3, adam.v.l3, adam, corr1, corr2);
    return avg;
}

Image infer(const Latent& f_l, const DenoiserParams& params, const DiffusionSchedule& sched,
            int steps, const EncoderConfig& cfg, Rng& rng) {
    const int t_steps = sched.t_steps();
    if (steps < 1) throw std::invalid_argument("infer: steps must be >= 1");
    if (steps > t_steps) steps = t_steps;

    Latent x(f_l.channels(), f_l.rows(), f_l.cols());
    for (auto& c : x.ch)
        for (Eigen::Index i = 0; i < c.rows(); ++i)
            for (Eigen::Index j = 0; j < c.cols(); ++j) c(i, j) = rng.normal();

    for (int i = steps; i >= 1; --i) {
        const int t = (i * t_steps) / steps;
        const int t_prev = ((i - 1) * t_steps) / steps;
        Latent eps_hat = denoiser_forward(x, static_cast<double>(t) / t_steps, f_l, params);
        x = ddim_step(x, eps_hat, t, t_prev, sched);
    }
    return decode(x, cfg, /*clamp=*/true);
}

void save_checkpoint(const DenoiserParams& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
    out.write("LASQ", 4);
    write_u32(out, 1);  // format version
    write_conv(out, params.l1);
    write_conv(out, params.l2);
    write_conv(out, params.l3);
    if (!out) throw std::runtime_error("checkpoint: write failed");
}

DenoiserParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "LASQ")
        throw std::runtime_error("checkpoint: bad magic");
    if (read_u32(in) != 1) throw std::runtime_error("checkpoint: unsupported version");
    DenoiserParams p;
    p.l1 = read_conv(in);
    p.l2 = read_conv(in);
    p.l3 = read_conv(in);
    return p;
}

}  // namespace lasq
