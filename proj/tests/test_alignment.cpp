#include <doctest.h>

#include "mirage/alignment.hpp"
#include "mirage/rng.hpp"

using namespace mirage;

static DepthMap random_depth(int w, int h, std::uint64_t seed) {
    DepthMap d(w, h);
    CounterRng rng(seed);
    for (double& v : d.values) v = rng.next_real(0.0, 4.0);
    return d;
}

TEST_CASE("exact affine relation recovers a=2 b=1 r2=1") {
    DepthMap s = random_depth(16, 16, 5);
    DepthMap t = s;
    for (double& v : t.values) v = 2.0 * v + 1.0;
    AffineFit f = fit_affine_background(s, t, MaskRaster(16, 16, true));
    CHECK(f.a == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(f.b == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.n == 256);
}

TEST_CASE("identity fit is exact") {
    DepthMap s = random_depth(8, 8, 6);
    AffineFit f = fit_affine_background(s, s, MaskRaster(8, 8, true));
    CHECK(f.a == 1.0);
    CHECK(f.b == 0.0);
    CHECK(f.r2 == 1.0);
}

TEST_CASE("constant student is a degenerate fit") {
    DepthMap s(8, 8, 3.0);
    DepthMap t = random_depth(8, 8, 7);
    CHECK_THROWS_WITH_AS(fit_affine_background(s, t, MaskRaster(8, 8, true)),
                         doctest::Contains("DegenerateFit"), Error);
}

TEST_CASE("noisy teacher keeps r2 in the analytic band") {
    // teacher = student + N(0, 0.1) on ~1e4 unit-variance pixels: R^2 ~ 1 - 0.01/(var+0.01)
    DepthMap s(100, 100);
    CounterRng rng(8);
    for (double& v : s.values) v = rng.next_real(0.0, 3.4641016151377544); // variance ~1
    DepthMap t = s;
    for (double& v : t.values) v += 0.1 * rng.next_normal();
    AffineFit f = fit_affine_background(s, t, MaskRaster(100, 100, true));
    CHECK(f.r2 >= 0.98);
    CHECK(f.r2 <= 1.0);
}

TEST_CASE("affine equivariance in the student") {
    DepthMap s = random_depth(12, 12, 9);
    DepthMap t = random_depth(12, 12, 10);
    MaskRaster bg(12, 12, true);
    AffineFit f = fit_affine_background(s, t, bg);
    double p = 2.5, q = -0.75;
    DepthMap s2 = s;
    for (double& v : s2.values) v = p * v + q;
    AffineFit g = fit_affine_background(s2, t, bg);
    CHECK(g.a == doctest::Approx(f.a / p).epsilon(1e-10));
    CHECK(g.b == doctest::Approx(f.b - f.a * q / p).epsilon(1e-10));
    CHECK(g.r2 == doctest::Approx(f.r2).epsilon(1e-10));
}

TEST_CASE("heatmap of a perfect fit is all zero") {
    DepthMap s = random_depth(10, 10, 11);
    DepthMap t = s;
    for (double& v : t.values) v = 0.5 * v - 2.0;
    AffineFit f = fit_affine_background(s, t, MaskRaster(10, 10, true));
    DepthMap heat = error_heatmap(s, t, f);
    for (double v : heat.values) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("heatmap values stay within [0,1]") {
    DepthMap s = random_depth(10, 10, 12);
    DepthMap t = random_depth(10, 10, 13);
    AffineFit f = fit_affine_background(s, t, MaskRaster(10, 10, true));
    DepthMap heat = error_heatmap(s, t, f);
    for (double v : heat.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("constant disagreement is absorbed by the shift") {
    DepthMap s = random_depth(10, 10, 14);
    DepthMap t = s;
    for (double& v : t.values) v += 5.0;
    AffineFit f = fit_affine_background(s, t, MaskRaster(10, 10, true));
    CHECK(f.b == doctest::Approx(5.0).epsilon(1e-12));
    DepthMap heat = error_heatmap(s, t, f);
    for (double v : heat.values) CHECK(v == doctest::Approx(0.0));
}
