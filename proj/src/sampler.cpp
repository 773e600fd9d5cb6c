#include "lasq/sampler.hpp"

#include <cmath>
#include <stdexcept>

namespace lasq {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

void check(const TruncGaussian& d) {
    if (d.degenerate) return;
    if (!(d.lo < d.hi) || !(d.sigma > 0.0))
        throw std::invalid_argument("TruncGaussian: need lo < hi and sigma > 0");
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -HUGE_VAL;
        if (p == 1.0) return HUGE_VAL;
        throw std::invalid_argument("normal_quantile: p outside [0,1]");
    }
    // Acklam's rational approximation.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // One Halley step against the exact CDF.
    double e = normal_cdf(x) - p;
    double u = e / normal_pdf(x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

double truncnorm_pdf(const TruncGaussian& d, double x) {
    check(d);
    if (d.degenerate) return x == d.mu ? HUGE_VAL : 0.0;
    if (x < d.lo || x > d.hi) return 0.0;
    const double z = normal_cdf((d.hi - d.mu) / d.sigma) - normal_cdf((d.lo - d.mu) / d.sigma);
    return normal_pdf((x - d.mu) / d.sigma) / (d.sigma * z);
}

double truncnorm_cdf(const TruncGaussian& d, double x) {
    check(d);
    if (d.degenerate) return x >= d.mu ? 1.0 : 0.0;
    if (x <= d.lo) return 0.0;
    if (x >= d.hi) return 1.0;
    const double pa = normal_cdf((d.lo - d.mu) / d.sigma);
    const double pb = normal_cdf((d.hi - d.mu) / d.sigma);
    const double p = (normal_cdf((x - d.mu) / d.sigma) - pa) / (pb - pa);
    return std::min(1.0, std::max(0.0, p));
}

double truncnorm_sample(const TruncGaussian& d, Rng& rng) {
    check(d);
    if (d.degenerate) {
        rng.uniform();  // keep draw counts aligned across branches
        return d.mu;
    }
    const double pa = normal_cdf((d.lo - d.mu) / d.sigma);
    const double pb = normal_cdf((d.hi - d.mu) / d.sigma);
    const double u = rng.uniform();
    const double p = pa + u * (pb - pa);
    double x = d.mu + d.sigma * normal_quantile(p);
    return std::min(d.hi, std::max(d.lo, x));
}

double mh_step(double current, const TruncGaussian& target, double step_lambda, Rng& rng) {
    check(target);
    if (target.degenerate) {
        rng.uniform();
        rng.uniform();
        return target.mu;
    }
    if (!(step_lambda > 0.0)) throw std::invalid_argument("mh_step: step_lambda must be > 0");

    TruncGaussian fwd{current, step_lambda, target.lo, target.hi, false};
    const double proposal = truncnorm_sample(fwd, rng);
    TruncGaussian bwd{proposal, step_lambda, target.lo, target.hi, false};

    const double num = truncnorm_pdf(target, proposal) * truncnorm_pdf(bwd, current);
    const double den = truncnorm_pdf(target, current) * truncnorm_pdf(fwd, proposal);
    const double ratio = den > 0.0 ? num / den : 1.0;
    return rng.uniform() < ratio ? proposal : current;
}

TruncGaussian build_distribution(const GammaMap& gm, std::optional<double> sigma_override) {
    TruncGaussian d;
    d.mu = gm.gamma_0;
    d.lo = gm.gamma_min;
    d.hi = gm.gamma_max;
    if (!(gm.gamma_min < gm.gamma_max)) {
        d.degenerate = true;
        d.sigma = 1.0;
        return d;
    }
    double sigma;
    if (sigma_override) {
        sigma = *sigma_override;
    } else {
        sigma = std::sqrt(std::max(0.0, gm.grid.square().mean() - gm.gamma_0 * gm.gamma_0));
    }
    if (!(sigma > 0.0)) {
        d.degenerate = true;
        d.sigma = 1.0;
        return d;
    }
    d.sigma = sigma;
    return d;
}

std::vector<LaoSet> sample_lao_hierarchy(const TruncGaussian& dist, const ChainConfig& cfg,
                                         double init, Rng& rng) {
    check(dist);
    if (cfg.levels < 1) throw std::invalid_argument("sample_lao_hierarchy: levels must be >= 1");
    if (!dist.degenerate && (init < dist.lo || init > dist.hi))
        throw std::invalid_argument("sample_lao_hierarchy: init outside support");

    std::vector<LaoSet> hierarchy;
    hierarchy.reserve(static_cast<size_t>(cfg.levels));
    for (int n = 1; n <= cfg.levels; ++n) {
        Rng chain_rng = rng.child(static_cast<std::uint64_t>(n));
        LaoSet set;
        set.level = n;
        const std::size_t count = std::size_t{1} << (n - 1);
        set.values.reserve(count);
        double state = init;
        for (std::size_t z = 0; z < count; ++z) {
            state = mh_step(state, dist, cfg.step_lambda, chain_rng);
            set.values.push_back(state);
        }
        hierarchy.push_back(std::move(set));
    }
    return hierarchy;
}

}  // namespace lasq
