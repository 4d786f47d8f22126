#include <doctest.h>

#include "mirage/geometry.hpp"
#include "mirage/rng.hpp"
#include "oracles.hpp"

using namespace mirage;

static RoiShape square(double x0, double y0, double x1, double y1) {
    RoiShape s;
    s.outer = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
    return s;
}

TEST_CASE("axis-aligned square rasterizes to its pixel count") {
    MaskRaster m = rasterize_roi(square(0, 0, 4, 4), 8, 8);
    CHECK(m.count() == 16);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) CHECK(m.get(x, y));
}

TEST_CASE("exclusion hole subtracts its pixels") {
    RoiShape s = square(0, 0, 4, 4);
    s.exclusions.push_back({{1, 1}, {3, 1}, {3, 3}, {1, 3}});
    MaskRaster m = rasterize_roi(s, 8, 8);
    CHECK(m.count() == 12);
    CHECK_FALSE(m.get(1, 1));
    CHECK_FALSE(m.get(2, 2));
    CHECK(m.get(0, 0));
}

TEST_CASE("triangle matches brute-force point-in-polygon scan") {
    RoiShape s;
    s.outer = {{0, 0}, {6, 0}, {0, 6}};
    MaskRaster fast = rasterize_roi(s, 8, 8);
    MaskRaster ref = oracle::rasterize(s, 8, 8);
    CHECK(fast == ref);
}

TEST_CASE("rasterization matches oracle on random polygons") {
    CounterRng rng(20240517);
    for (int trial = 0; trial < 200; ++trial) {
        RoiShape s;
        int n = static_cast<int>(rng.next_int(3, 7));
        // star-shaped construction keeps the polygon simple
        double cx = rng.next_real(8.0, 24.0), cy = rng.next_real(8.0, 24.0);
        for (int i = 0; i < n; ++i) {
            double th = (i + rng.next_real(0.05, 0.95)) * 2.0 * 3.141592653589793 / n;
            double r = rng.next_real(3.0, 10.0);
            s.outer.push_back({cx + r * std::cos(th), cy + r * std::sin(th)});
        }
        MaskRaster fast, ref;
        try {
            fast = rasterize_roi(s, 32, 32);
        } catch (const Error& e) {
            CHECK(e.category() == "EmptyMask");
            CHECK(oracle::rasterize(s, 32, 32).count() == 0);
            continue;
        }
        ref = oracle::rasterize(s, 32, 32);
        CHECK(fast == ref);
    }
}

TEST_CASE("polygon_area closed forms") {
    CHECK(polygon_area(square(0, 0, 1, 1)) == doctest::Approx(1.0));
    RoiShape tri;
    tri.outer = {{0, 0}, {4, 0}, {0, 3}};
    CHECK(polygon_area(tri) == doctest::Approx(6.0));
    RoiShape holed = square(0, 0, 4, 4);
    holed.exclusions.push_back({{0, 0}, {4, 0}, {0, 3}});
    CHECK(polygon_area(holed) == doctest::Approx(10.0));
}

TEST_CASE("degenerate polygon is rejected") {
    RoiShape s;
    s.outer = {{1, 1}, {1, 1}, {2, 2}};
    CHECK_THROWS_WITH_AS(rasterize_roi(s, 8, 8), doctest::Contains("DegeneratePolygon"), Error);
}

TEST_CASE("empty rasterization is rejected") {
    CHECK_THROWS_WITH_AS(rasterize_roi(square(100, 100, 104, 104), 8, 8),
                         doctest::Contains("EmptyMask"), Error);
}

TEST_CASE("generate_crops satisfies the diagonal predicate and is deterministic") {
    RoiShape s = square(100, 100, 300, 300);
    auto a = generate_crops(s, 640, 480, 4, 0.4, 42);
    auto b = generate_crops(s, 640, 480, 4, 0.4, 42);
    REQUIRE(a.size() == 4);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(crop_diagonal_ok(a[i], s, 0.4));
        a[i].validate(640, 480);
        CHECK(a[i].x0 == b[i].x0);
        CHECK(a[i].y0 == b[i].y0);
        CHECK(a[i].x1 == b[i].x1);
        CHECK(a[i].y1 == b[i].y1);
        CHECK(a[i].id == "c" + std::to_string(i));
    }
}

TEST_CASE("generate_crops full-frame bbox with frac 1 returns the frame") {
    RoiShape s = square(0, 0, 64, 48);
    auto r = generate_crops(s, 64, 48, 1, 1.0, 7);
    REQUIRE(r.size() == 1);
    CHECK(r[0].x0 == 0);
    CHECK(r[0].y0 == 0);
    CHECK(r[0].x1 == 64);
    CHECK(r[0].y1 == 48);
}

TEST_CASE("generate_crops random property sweep") {
    CounterRng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        double x0 = rng.next_real(0.0, 40.0), y0 = rng.next_real(0.0, 40.0);
        RoiShape s = square(x0, y0, x0 + rng.next_real(4.0, 20.0), y0 + rng.next_real(4.0, 20.0));
        auto crops = generate_crops(s, 64, 64, 2, 0.4, rng.next_u64());
        for (const CropRect& r : crops) {
            r.validate(64, 64);
            CHECK(crop_diagonal_ok(r, s, 0.4));
        }
    }
}

TEST_CASE("map_crop_to_full identity placement") {
    DepthMap crop(4, 4);
    for (std::size_t i = 0; i < crop.size(); ++i) crop.values[i] = static_cast<double>(i) * 0.25;
    CropRect rect;
    rect.x1 = rect.y1 = 4;
    DepthMap out = map_crop_to_full(crop, rect, 4, 4);
    for (std::size_t i = 0; i < crop.size(); ++i) {
        CHECK(out.values[i] == crop.values[i]);
        CHECK(out.valid(i));
    }
}

TEST_CASE("map_crop_to_full constant input and invalid outside") {
    DepthMap crop(3, 5, 7.0);
    CropRect rect;
    rect.x0 = 2; rect.y0 = 1; rect.x1 = 8; rect.y1 = 7;
    DepthMap out = map_crop_to_full(crop, rect, 10, 10);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 10; ++x) {
            bool in = x >= 2 && x < 8 && y >= 1 && y < 7;
            CHECK(out.valid(x, y) == in);
            if (in) CHECK(out.at(x, y) == doctest::Approx(7.0));
        }
}

TEST_CASE("map_crop_to_full matches the bilinear kernel on a 2x2 upsample") {
    DepthMap crop(2, 2);
    crop.values = {0, 1, 2, 3};
    CropRect rect;
    rect.x1 = rect.y1 = 4;
    DepthMap out = map_crop_to_full(crop, rect, 4, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            double u = (x + 0.5) / 4.0 * 2.0, v = (y + 0.5) / 4.0 * 2.0;
            CHECK(out.at(x, y) == doctest::Approx(bilinear_sample(crop, u, v)));
            // bilinear convexity: stays inside the input range
            CHECK(out.at(x, y) >= 0.0);
            CHECK(out.at(x, y) <= 3.0);
        }
}

TEST_CASE("dilate_chebyshev grows a point into a square") {
    MaskRaster m(9, 9);
    m.set(4, 4, true);
    MaskRaster d = dilate_chebyshev(m, 2);
    CHECK(d.count() == 25);
    for (int y = 2; y <= 6; ++y)
        for (int x = 2; x <= 6; ++x) CHECK(d.get(x, y));
}

TEST_CASE("mask algebra") {
    MaskRaster a(4, 4), b(4, 4);
    a.set(0, 0, true);
    a.set(1, 1, true);
    b.set(1, 1, true);
    b.set(2, 2, true);
    CHECK((a & b).count() == 1);
    CHECK((a | b).count() == 3);
    CHECK(a.minus(b).count() == 1);
    CHECK(a.complement().count() == 14);
    CHECK(((a & b) | a.minus(b)) == a);
}
