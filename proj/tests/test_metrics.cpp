#include <doctest.h>

#include "mirage/metrics.hpp"
#include "mirage/rng.hpp"
#include "oracles.hpp"

using namespace mirage;

static NormalizedField as_field(const DepthMap& d) {
    NormalizedField f;
    f.width = d.width;
    f.height = d.height;
    f.values = d.values;
    f.validity = d.validity;
    return f;
}

TEST_CASE("percentile bounds of 0..99") {
    DepthMap d(10, 10);
    for (std::size_t i = 0; i < 100; ++i) d.values[i] = static_cast<double>(i);
    NormalizedField f = percentile_normalize(d);
    CHECK(f.lo == doctest::Approx(0.99).epsilon(1e-12));
    CHECK(f.hi == doctest::Approx(98.01).epsilon(1e-12));
    // d = lo maps to 0, d = hi maps to 1
    CHECK((0.99 - f.lo) / (f.hi - f.lo) == doctest::Approx(0.0));
    CHECK((98.01 - f.lo) / (f.hi - f.lo) == doctest::Approx(1.0));
}

TEST_CASE("constant field normalizes degenerate to zeros") {
    DepthMap d(4, 4, 5.0);
    NormalizedField f = percentile_normalize(d);
    CHECK(f.degenerate);
    for (double v : f.values) CHECK(v == 0.0);
}

TEST_CASE("percentile_select agrees with sort-based oracle") {
    CounterRng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> v(static_cast<std::size_t>(rng.next_int(1, 200)));
        for (double& x : v) x = rng.next_real(-5.0, 5.0);
        for (double p : {0.0, 10.0, 37.5, 50.0, 90.0, 99.0, 100.0})
            CHECK(percentile_select(v, p) == doctest::Approx(oracle::percentile(v, p)).epsilon(1e-14));
    }
}

TEST_CASE("laplacian of an affine field vanishes") {
    DepthMap d(8, 8);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) d.at(x, y) = 2.0 * x + 3.0 * y;
    LaplacianField l = laplacian_magnitude(as_field(d));
    for (int y = 1; y < 7; ++y)
        for (int x = 1; x < 7; ++x) CHECK(l.magnitude[l.index(x, y)] == doctest::Approx(0.0));
}

TEST_CASE("laplacian of a unit spike") {
    DepthMap d(7, 7, 0.0);
    d.at(3, 3) = 1.0;
    LaplacianField l = laplacian_magnitude(as_field(d));
    CHECK(l.magnitude[l.index(3, 3)] == doctest::Approx(4.0));
    CHECK(l.magnitude[l.index(2, 3)] == doctest::Approx(1.0));
    CHECK(l.magnitude[l.index(3, 2)] == doctest::Approx(1.0));
    CHECK(l.magnitude[l.index(4, 3)] == doctest::Approx(1.0));
    CHECK(l.magnitude[l.index(3, 4)] == doctest::Approx(1.0));
    CHECK(l.magnitude[l.index(1, 1)] == doctest::Approx(0.0));
}

TEST_CASE("laplacian of x^2 is 2 in the interior") {
    DepthMap d(9, 9);
    for (int y = 0; y < 9; ++y)
        for (int x = 0; x < 9; ++x) d.at(x, y) = static_cast<double>(x) * x;
    LaplacianField l = laplacian_magnitude(as_field(d));
    for (int y = 1; y < 8; ++y)
        for (int x = 1; x < 8; ++x) CHECK(l.magnitude[l.index(x, y)] == doctest::Approx(2.0));
}

TEST_CASE("invalidity erodes by one pixel") {
    DepthMap d(7, 7, 1.0);
    d.validity.assign(49, 1);
    d.validity[d.index(3, 3)] = 0;
    LaplacianField l = laplacian_magnitude(as_field(d));
    CHECK_FALSE(l.valid(l.index(3, 3)));
    CHECK_FALSE(l.valid(l.index(2, 3)));
    CHECK_FALSE(l.valid(l.index(3, 2)));
    CHECK(l.valid(l.index(2, 2)));
}

// Wraps a magnitude list into a LaplacianField row so decile_filter can run.
static void check_decile(const std::vector<double>& mags, double expect_t, double expect_m) {
    int n = static_cast<int>(mags.size());
    LaplacianField l;
    l.width = n;
    l.height = 3;
    l.magnitude.assign(static_cast<std::size_t>(n) * 3, 0.0);
    l.validity.assign(l.magnitude.size(), 1);
    MaskRaster region(n, 3);
    for (int x = 0; x < n; ++x) {
        l.magnitude[l.index(x, 1)] = mags[static_cast<std::size_t>(x)];
        region.set(x, 1, true);
    }
    detail::DecileView v = detail::decile_filter(l, region);
    CHECK(v.t == doctest::Approx(expect_t).epsilon(1e-12));
    CHECK(v.m == doctest::Approx(expect_m).epsilon(1e-12));
}

TEST_CASE("decile filter on 1..10") { check_decile({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 10.0, 6.0); }

TEST_CASE("decile filter keeps ties") {
    check_decile(std::vector<double>(10, 5.0), 50.0, 5.0);
}

TEST_CASE("decile filter matches oracle on random regions") {
    CounterRng rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        int w = static_cast<int>(rng.next_int(3, 40));
        int h = static_cast<int>(rng.next_int(3, 40));
        LaplacianField l;
        l.width = w;
        l.height = h;
        l.magnitude.resize(static_cast<std::size_t>(w) * h);
        l.validity.assign(l.magnitude.size(), 1);
        for (double& m : l.magnitude) m = rng.next_real(0.0, 3.0);
        MaskRaster region(w, h);
        std::vector<double> mags;
        std::vector<std::size_t> idx;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (rng.next_double() < 0.5) {
                    region.set(x, y, true);
                    mags.push_back(l.magnitude[l.index(x, y)]);
                    idx.push_back(l.index(x, y));
                }
        if (region.count() == 0) continue;
        detail::DecileView v = detail::decile_filter(l, region);
        oracle::DecileRef ref = oracle::decile(mags);
        CHECK(v.t == doctest::Approx(ref.t).epsilon(1e-12));
        CHECK(v.m == doctest::Approx(ref.m).epsilon(1e-12));
        // kept sets match bitwise
        MaskRaster top_ref(w, h), trim_ref(w, h);
        for (std::size_t k : ref.kept_top)
            top_ref.set(static_cast<int>(idx[k] % w), static_cast<int>(idx[k] / w), true);
        for (std::size_t k : ref.kept_trim)
            trim_ref.set(static_cast<int>(idx[k] % w), static_cast<int>(idx[k] / w), true);
        CHECK(v.kept_top == top_ref);
        CHECK(v.kept_trim == trim_ref);
    }
}

TEST_CASE("composite 3-4-5 example") {
    RoiAggregates a;
    a.t_full = 3.0;
    a.t_crop = 4.0;
    a.effective = MaskRaster(3, 3);
    a.effective.set(1, 1, true);
    a.lt_full.assign(9, 0.0);
    a.lt_crop.assign(9, 0.0);
    a.lm_full.assign(9, 0.0);
    a.lm_crop.assign(9, 0.0);
    a.lt_full[4] = 3.0;
    a.lt_crop[4] = 4.0;
    CompositeScores s = composite_scores(a);
    CHECK(s.d_cluster == doctest::Approx(5.0));
    CHECK(s.d_avg == doctest::Approx(5.0));
    CHECK(s.dcs == doctest::Approx(10.0));
    CHECK(s.ccs == doctest::Approx(0.0));
}

TEST_CASE("composite confusion closed form") {
    RoiAggregates a;
    a.m_full = 1.0;
    a.m_crop = 0.0;
    a.effective = MaskRaster(2, 2, true);
    a.lt_full.assign(4, 0.0);
    a.lt_crop.assign(4, 0.0);
    a.lm_full.assign(4, 1.0);
    a.lm_crop.assign(4, 0.0);
    CompositeScores s = composite_scores(a);
    CHECK(s.D_cluster == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(s.D_avg == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(s.ccs == doctest::Approx(2.0 / std::sqrt(2.0)));
}

// Bump deliberately off-center: a symmetric bump produces exact Laplacian
// ties, and tie membership at the decile threshold is not affine-stable.
static DepthMap bumpy_depth(int w, int h, double amp) {
    DepthMap d(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double dx = x + 0.5 - w * 0.5 - 0.37, dy = y + 0.5 - h * 0.5 + 0.23;
            d.at(x, y) = 0.01 * x + 0.02 * y + 3.0 +
                         amp * std::exp(-(dx * dx + dy * dy) / 18.0);
        }
    return d;
}

TEST_CASE("unit scores are invariant to positive affine depth maps") {
    DepthMap full = bumpy_depth(32, 32, 0.1);
    CropRect rect;
    rect.x0 = 4; rect.y0 = 4; rect.x1 = 28; rect.y1 = 28;
    DepthMap crop(rect.width(), rect.height());
    for (int y = 0; y < rect.height(); ++y)
        for (int x = 0; x < rect.width(); ++x) crop.at(x, y) = full.at(rect.x0 + x, rect.y0 + y);
    RoiShape roi;
    roi.outer = {{8, 8}, {24, 8}, {24, 24}, {8, 24}};
    MaskRaster mask = rasterize_roi(roi, 32, 32);

    UnitScore base = evaluate_unit(full, crop, rect, mask, {});
    DepthMap full2 = full, crop2 = crop;
    for (double& v : full2.values) v = 3.0 * v + 7.0;
    for (double& v : crop2.values) v = 3.0 * v + 7.0;
    UnitScore scaled = evaluate_unit(full2, crop2, rect, mask, {});
    CHECK(scaled.scores.dcs == doctest::Approx(base.scores.dcs).epsilon(1e-12));
    CHECK(scaled.scores.ccs == doctest::Approx(base.scores.ccs).epsilon(1e-12));
    CHECK(base.scores.dcs > 0.0);
}

TEST_CASE("symmetry: swapping views preserves both scores") {
    DepthMap a = bumpy_depth(24, 24, 0.2);
    DepthMap b = bumpy_depth(24, 24, 0.05);
    CropRect rect;
    rect.x1 = rect.y1 = 24;
    RoiShape roi;
    roi.outer = {{6, 6}, {18, 6}, {18, 18}, {6, 18}};
    MaskRaster mask = rasterize_roi(roi, 24, 24);
    UnitScore ab = evaluate_unit(a, b, rect, mask, {});
    UnitScore ba = evaluate_unit(b, a, rect, mask, {});
    CHECK(ab.scores.dcs == doctest::Approx(ba.scores.dcs).epsilon(1e-12));
    CHECK(ab.scores.ccs == doctest::Approx(ba.scores.ccs).epsilon(1e-12));
}

TEST_CASE("decomposition holds on a nontrivial unit") {
    DepthMap full = bumpy_depth(32, 32, 0.15);
    CropRect rect;
    rect.x0 = 2; rect.y0 = 2; rect.x1 = 30; rect.y1 = 30;
    DepthMap crop(rect.width(), rect.height());
    for (int y = 0; y < rect.height(); ++y)
        for (int x = 0; x < rect.width(); ++x)
            crop.at(x, y) = full.at(rect.x0 + x, rect.y0 + y) * 1.1;
    RoiShape roi;
    roi.outer = {{8, 8}, {24, 8}, {24, 24}, {8, 24}};
    UnitScore u = evaluate_unit(full, crop, rect, rasterize_roi(roi, 32, 32), {});
    CHECK(u.scores.dcs == doctest::Approx(u.scores.d_cluster + u.scores.d_avg).epsilon(1e-15));
    CHECK(u.scores.ccs == doctest::Approx(u.scores.D_cluster + u.scores.D_avg).epsilon(1e-15));
}

TEST_CASE("scatter export format") {
    UnitScore u;
    u.sample_id = "s0001";
    u.roi_index = 0;
    u.crop_id = "c2";
    u.t_full = 1.5;
    std::string csv = scatter_export({u});
    CHECK(csv.find("unit,t_full,t_crop,m_full,m_crop\n") == 0);
    CHECK(csv.find("s0001:0:c2,1.5,0,0,0\n") != std::string::npos);
    CHECK(scatter_export({}) == "unit,t_full,t_crop,m_full,m_crop\n");
}
