#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lasq/lao.hpp"

using lasq::Grid2D;
using lasq::Image;
using lasq::LaoParams;
using lasq::Region;
using lasq::Rng;

TEST_CASE("compute_beta closed forms") {
    CHECK(lasq::compute_beta(0.5, 0.2, LaoParams{0.15, 0.0, 0.01}) == doctest::Approx(0.0));
    CHECK(lasq::compute_beta(0.1, 0.0, LaoParams{0.15, 3.7, 0.01}) ==
          doctest::Approx(-0.8).epsilon(1e-14));
    CHECK(lasq::compute_beta(0.3, 0.01, LaoParams{0.15, 1.0, 0.01}) ==
          doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("compute_gamma closed forms") {
    CHECK(lasq::compute_gamma(0.5, 0.0, LaoParams{0.5, 0.0, 0.01}) == doctest::Approx(1.0));
    CHECK(lasq::compute_gamma(0.1, 0.0, LaoParams{0.15, 0.0, 0.01}) ==
          doctest::Approx(std::pow(0.25, -0.8)).epsilon(1e-14));
    CHECK(std::pow(0.25, -0.8) == doctest::Approx(3.03143).epsilon(1e-5));
    CHECK(lasq::compute_gamma(0.85, 0.0, LaoParams{0.15, 0.0, 0.01}) == doctest::Approx(1.0));
}

TEST_CASE("compute_gamma is continuous in g_p at defaults") {
    // the slope of (alpha+g)^(2g-1) blows up as g -> 0, so the tight bound
    // only holds away from the dark end
    const LaoParams params;
    double prev = lasq::compute_gamma(0.0, 0.0, params);
    for (int i = 1; i <= 1000; ++i) {
        const double g = i / 1000.0;
        const double cur = lasq::compute_gamma(g, 0.0, params);
        CHECK(std::abs(cur - prev) < 0.08);
        if (g > 0.05) CHECK(std::abs(cur - prev) < 0.05);
        prev = cur;
    }
}

TEST_CASE("pixel_gamma_map on a constant map is degenerate") {
    Grid2D g = Grid2D::Constant(4, 4, 0.2);
    lasq::GammaMap gm = lasq::pixel_gamma_map(g, LaoParams{});
    CHECK(gm.gamma_min == gm.gamma_max);
    CHECK(gm.gamma_0 == doctest::Approx(gm.gamma_min).epsilon(1e-14));
}

TEST_CASE("pixel_gamma_map two-value example") {
    Grid2D g(1, 2);
    g << 0.1, 0.85;
    lasq::GammaMap gm = lasq::pixel_gamma_map(g, LaoParams{0.15, 0.0, 0.01});
    const double lo = 1.0;
    const double hi = std::pow(0.25, -0.8);
    CHECK(gm.gamma_min == doctest::Approx(lo).epsilon(1e-12));
    CHECK(gm.gamma_max == doctest::Approx(hi).epsilon(1e-12));
    CHECK(gm.gamma_0 == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-12));
    CHECK(gm.gamma_0 == doctest::Approx(2.01571).epsilon(1e-5));
}

TEST_CASE("gamma map invariants hold on random maps") {
    Rng rng(40);
    for (int trial = 0; trial < 20; ++trial) {
        Grid2D g(6, 6);
        for (Eigen::Index i = 0; i < 6; ++i)
            for (Eigen::Index j = 0; j < 6; ++j) g(i, j) = rng.uniform();
        lasq::GammaMap gm = lasq::pixel_gamma_map(g, LaoParams{});
        CHECK(gm.gamma_min <= gm.gamma_0);
        CHECK(gm.gamma_0 <= gm.gamma_max);
        CHECK(gm.grid.minCoeff() >= gm.gamma_min);
        CHECK(gm.grid.maxCoeff() <= gm.gamma_max);
        CHECK(gm.grid.minCoeff() > 0.0);
    }
}

TEST_CASE("apply_lao identity and point values") {
    Image img(2, 2);
    for (auto& c : img.ch) c.setConstant(0.25);
    const Region full{0, 2, 0, 2};

    Image same = lasq::apply_lao(img, full, 1.0);
    for (int c = 0; c < 3; ++c) CHECK((same.ch[c] == img.ch[c]).all());

    Image bright = lasq::apply_lao(img, full, 2.0);
    CHECK(bright.ch[0](0, 0) == doctest::Approx(0.5).epsilon(1e-14));

    for (auto& c : img.ch) c.setConstant(0.5);
    const double gamma = std::pow(0.25, -0.8);
    Image dark_fix = lasq::apply_lao(img, full, gamma);
    CHECK(dark_fix.ch[0](0, 0) == doctest::Approx(std::pow(0.5, 1.0 / gamma)).epsilon(1e-14));
    CHECK(dark_fix.ch[0](0, 0) == doctest::Approx(0.79554).epsilon(1e-4));

    CHECK_THROWS(lasq::apply_lao(img, full, 0.0));
    CHECK_THROWS(lasq::apply_lao(img, full, -1.0));
}

TEST_CASE("apply_lao only touches the region and respects monotonicity") {
    Rng rng(41);
    Image img(4, 4);
    for (auto& c : img.ch)
        for (Eigen::Index i = 0; i < 4; ++i)
            for (Eigen::Index j = 0; j < 4; ++j) c(i, j) = rng.uniform();

    const Region top{0, 2, 0, 4};
    Image out = lasq::apply_lao(img, top, 2.5);
    for (int c = 0; c < 3; ++c) {
        // outside untouched
        CHECK((out.ch[c].bottomRows(2) == img.ch[c].bottomRows(2)).all());
        // gamma > 1 brightens
        CHECK(((out.ch[c].topRows(2) - img.ch[c].topRows(2)) >= -1e-15).all());
        CHECK(out.ch[c].maxCoeff() <= 1.0);
        CHECK(out.ch[c].minCoeff() >= 0.0);
    }
    Image darker = lasq::apply_lao(img, top, 0.5);
    for (int c = 0; c < 3; ++c)
        CHECK(((darker.ch[c].topRows(2) - img.ch[c].topRows(2)) <= 1e-15).all());
}
