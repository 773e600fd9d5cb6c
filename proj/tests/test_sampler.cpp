#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <vector>

#include "lasq/sampler.hpp"

using lasq::ChainConfig;
using lasq::Rng;
using lasq::TruncGaussian;

namespace {

double ks_statistic(std::vector<double> samples, const TruncGaussian& d) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double worst = 0.0;
    for (size_t i = 0; i < samples.size(); ++i) {
        const double f = lasq::truncnorm_cdf(d, samples[i]);
        worst = std::max(worst, std::abs(f - (i + 1) / n));
        worst = std::max(worst, std::abs(f - i / n));
    }
    return worst;
}

}  // namespace

TEST_CASE("normal_cdf and normal_quantile are mutual inverses") {
    CHECK(lasq::normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(lasq::normal_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-12));
    for (double p : {0.001, 0.05, 0.3, 0.5, 0.77, 0.999}) {
        CHECK(lasq::normal_cdf(lasq::normal_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
    }
}

TEST_CASE("truncnorm pdf and cdf on the unit-interval example") {
    TruncGaussian d{0.0, 1.0, -1.0, 1.0};
    CHECK(lasq::truncnorm_cdf(d, d.lo) == 0.0);
    CHECK(lasq::truncnorm_cdf(d, d.hi) == 1.0);
    CHECK(lasq::truncnorm_cdf(d, -2.0) == 0.0);
    CHECK(lasq::truncnorm_cdf(d, 2.0) == 1.0);
    CHECK(lasq::truncnorm_cdf(d, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
    // phi(0)/Z with Z = Phi(1) - Phi(-1)
    CHECK(lasq::truncnorm_pdf(d, 0.0) == doctest::Approx(0.584369).epsilon(1e-5));
    CHECK(lasq::truncnorm_pdf(d, 1.5) == 0.0);

    TruncGaussian off{0.3, 0.5, 0.1, 0.9};
    CHECK(lasq::truncnorm_cdf(off, 0.5 * (off.lo + off.hi) + (off.mu - 0.5)) > 0.0);
    // pdf integrates to about 1 (trapezoid over the support)
    const int steps = 20000;
    double integral = 0.0;
    for (int i = 0; i < steps; ++i) {
        const double a = off.lo + (off.hi - off.lo) * i / steps;
        const double b = off.lo + (off.hi - off.lo) * (i + 1) / steps;
        integral += 0.5 * (lasq::truncnorm_pdf(off, a) + lasq::truncnorm_pdf(off, b)) * (b - a);
    }
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("truncnorm_sample support, mean and variance") {
    TruncGaussian d{0.0, 1.0, -1.0, 1.0};
    Rng rng(50);
    const int n = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = lasq::truncnorm_sample(d, rng);
        REQUIRE(x >= d.lo);
        REQUIRE(x <= d.hi);
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    // closed-form variance of N(0,1) truncated to [-1,1]
    CHECK(std::abs(var - 0.29113) < 0.01);
}

TEST_CASE("sampled distribution matches the analytic cdf (KS)") {
    TruncGaussian d{0.4, 0.8, -0.5, 1.5};
    Rng rng(51);
    std::vector<double> samples(50000);
    for (auto& s : samples) s = lasq::truncnorm_sample(d, rng);
    const double crit = 1.63 / std::sqrt(static_cast<double>(samples.size()));
    CHECK(ks_statistic(samples, d) < crit);
}

TEST_CASE("mh_step stays in tiny supports and the chain is stationary") {
    TruncGaussian tiny{0.5, 1.0, 0.5, 0.5 + 1e-9};
    Rng rng(52);
    double x = 0.5;
    for (int i = 0; i < 100; ++i) {
        x = lasq::mh_step(x, tiny, 0.2, rng);
        CHECK(x >= tiny.lo);
        CHECK(x <= tiny.hi);
    }

    // 10^5 steps thinned by 10, KS at the 1% level against the target.
    TruncGaussian d{0.0, 1.0, -1.0, 1.0};
    Rng chain_rng(53);
    std::vector<double> thinned;
    thinned.reserve(10000);
    double state = 0.0;
    for (int i = 1; i <= 100000; ++i) {
        state = lasq::mh_step(state, d, 0.2, chain_rng);
        if (i % 10 == 0) thinned.push_back(state);
    }
    const double crit = 1.63 / std::sqrt(static_cast<double>(thinned.size()));
    CHECK(ks_statistic(thinned, d) < crit);
}

TEST_CASE("build_distribution from a two-value gamma map") {
    lasq::GammaMap gm;
    gm.grid.resize(1, 2);
    const double hi = std::pow(0.25, -0.8);
    gm.grid << hi, 1.0;
    gm.gamma_min = 1.0;
    gm.gamma_max = hi;
    gm.gamma_0 = 0.5 * (1.0 + hi);

    TruncGaussian d = lasq::build_distribution(gm);
    CHECK_FALSE(d.degenerate);
    CHECK(d.mu == doctest::Approx(gm.gamma_0).epsilon(1e-12));
    CHECK(d.lo == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.hi == doctest::Approx(hi).epsilon(1e-12));
    CHECK(d.sigma == doctest::Approx(0.5 * (hi - 1.0)).epsilon(1e-12));  // two-point std
    CHECK(d.sigma == doctest::Approx(1.01571).epsilon(1e-4));
    CHECK(d.lo <= d.mu);
    CHECK(d.mu <= d.hi);

    TruncGaussian forced = lasq::build_distribution(gm, 0.37);
    CHECK(forced.sigma == 0.37);
}

TEST_CASE("degenerate distribution returns the constant") {
    lasq::GammaMap gm;
    gm.grid = lasq::Grid2D::Constant(3, 3, 2.0);
    gm.gamma_min = gm.gamma_max = gm.gamma_0 = 2.0;
    TruncGaussian d = lasq::build_distribution(gm);
    CHECK(d.degenerate);
    Rng rng(54);
    for (int i = 0; i < 10; ++i) CHECK(lasq::truncnorm_sample(d, rng) == 2.0);

    auto sets = lasq::sample_lao_hierarchy(d, ChainConfig{0.2, 3}, 2.0, rng);
    for (const auto& s : sets)
        for (double v : s.values) CHECK(v == 2.0);
}

TEST_CASE("hierarchy cardinalities and determinism") {
    TruncGaussian d{2.0, 0.7, 1.0, 3.0};
    Rng rng_a(55), rng_b(55);
    auto a = lasq::sample_lao_hierarchy(d, ChainConfig{0.2, 5}, 2.0, rng_a);
    auto b = lasq::sample_lao_hierarchy(d, ChainConfig{0.2, 5}, 2.0, rng_b);

    REQUIRE(a.size() == 5);
    for (int n = 1; n <= 5; ++n) {
        CHECK(a[n - 1].level == n);
        CHECK(a[n - 1].values.size() == static_cast<size_t>(1) << (n - 1));
        for (double v : a[n - 1].values) {
            CHECK(v >= d.lo);
            CHECK(v <= d.hi);
        }
        CHECK(a[n - 1].values == b[n - 1].values);
    }

    auto single = lasq::sample_lao_hierarchy(d, ChainConfig{0.2, 1}, 2.0, rng_a);
    REQUIRE(single.size() == 1);
    CHECK(single[0].values.size() == 1);
}
