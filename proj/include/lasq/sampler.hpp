#pragma once

#include <optional>
#include <vector>

#include "lasq/lao.hpp"
#include "lasq/rng.hpp"

namespace lasq {

/// Gaussian restricted and renormalized to [lo, hi]. A degenerate instance
/// (lo == hi) concentrates all mass at mu.
struct TruncGaussian {
    double mu = 0.0;
    double sigma = 1.0;
    double lo = -1.0;
    double hi = 1.0;
    bool degenerate = false;
};

/// One hierarchy level's sampled gamma exponents; level n holds 2^(n-1) values.
struct LaoSet {
    int level = 1;
    std::vector<double> values;
};

struct ChainConfig {
    double step_lambda = 0.2;
    int levels = 4;
};

double normal_cdf(double x);
/// Inverse standard normal CDF (rational approximation plus one refinement).
double normal_quantile(double p);

double truncnorm_pdf(const TruncGaussian& d, double x);
double truncnorm_cdf(const TruncGaussian& d, double x);

/// Inverse-CDF sampling; always lands in [lo, hi].
double truncnorm_sample(const TruncGaussian& d, Rng& rng);

/// One Metropolis-Hastings step with a truncated-Gaussian random-walk
/// proposal of scale step_lambda and the asymmetric Hastings correction.
double mh_step(double current, const TruncGaussian& target, double step_lambda, Rng& rng);

/// Target distribution over gamma: mu = gamma_0, support [gamma_min, gamma_max],
/// sigma from the per-pixel spread unless overridden.
TruncGaussian build_distribution(const GammaMap& gm,
                                 std::optional<double> sigma_override = std::nullopt);

/// For each level n in 1..N runs a fresh chain from init, one mh_step per
/// element, collecting the 2^(n-1) chain states.
std::vector<LaoSet> sample_lao_hierarchy(const TruncGaussian& dist, const ChainConfig& cfg,
                                         double init, Rng& rng);

}  // namespace lasq
