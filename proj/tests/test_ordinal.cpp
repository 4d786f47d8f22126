#include <doctest.h>

#include <cmath>

#include "mirage/ordinal.hpp"
#include "mirage/rng.hpp"
#include "oracles.hpp"

using namespace mirage;

static DepthMap random_depth(int w, int h, std::uint64_t seed) {
    DepthMap d(w, h);
    CounterRng rng(seed);
    for (double& v : d.values) v = rng.next_real(0.0, 1.0);
    return d;
}

TEST_CASE("perfect ordering scores 1") {
    DepthMap gt = random_depth(8, 8, 1);
    OrdinalResult r = pairwise_accuracy(gt, gt, 20000, 0.01, 3);
    CHECK(r.accuracy == 1.0);
    CHECK(r.pairs_retained > 0);
}

TEST_CASE("total inversion scores 0") {
    DepthMap gt = random_depth(8, 8, 2);
    DepthMap pred = gt;
    for (double& v : pred.values) v = -v;
    CHECK(pairwise_accuracy(gt, pred, 20000, 0.01, 3).accuracy == 0.0);
}

TEST_CASE("constant prediction scores 0") {
    DepthMap gt = random_depth(8, 8, 3);
    DepthMap pred(8, 8, 2.0);
    CHECK(pairwise_accuracy(gt, pred, 20000, 0.01, 3).accuracy == 0.0);
}

TEST_CASE("strictly increasing transforms leave accuracy unchanged") {
    DepthMap gt = random_depth(16, 16, 4);
    DepthMap pred = random_depth(16, 16, 5);
    OrdinalResult base = pairwise_accuracy(gt, pred, 50000, 0.01, 9);
    DepthMap warped = pred;
    for (double& v : warped.values) v = std::exp(3.0 * v) - 2.0;
    OrdinalResult w = pairwise_accuracy(gt, warped, 50000, 0.01, 9);
    CHECK(w.accuracy == base.accuracy);
    CHECK(w.pairs_retained == base.pairs_retained);
}

TEST_CASE("identical calls are bit-identical") {
    DepthMap gt = random_depth(16, 16, 6);
    DepthMap pred = random_depth(16, 16, 7);
    OrdinalResult a = pairwise_accuracy(gt, pred, 12345, 0.02, 42);
    OrdinalResult b = pairwise_accuracy(gt, pred, 12345, 0.02, 42);
    CHECK(a.accuracy == b.accuracy);
    CHECK(a.pairs_retained == b.pairs_retained);
}

TEST_CASE("sampled estimate tracks the exhaustive oracle on a 3x3 grid") {
    DepthMap gt(3, 3);
    gt.values = {0.1, 0.9, 0.3, 0.7, 0.5, 0.2, 0.8, 0.4, 0.6};
    DepthMap pred(3, 3);
    pred.values = {0.2, 0.8, 0.1, 0.9, 0.5, 0.3, 0.6, 0.4, 0.7};
    double exact = oracle::pairwise_exhaustive(gt, pred, 0.01);
    OrdinalResult s = pairwise_accuracy(gt, pred, 200000, 0.01, 17);
    CHECK(std::fabs(s.accuracy - exact) <= 0.02);
}

TEST_CASE("sampled estimate tracks the oracle on random 16x16 grids") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        DepthMap gt = random_depth(16, 16, 100 + seed);
        DepthMap pred = random_depth(16, 16, 200 + seed);
        double exact = oracle::pairwise_exhaustive(gt, pred, 0.01);
        OrdinalResult s = pairwise_accuracy(gt, pred, 100000, 0.01, seed);
        CHECK(std::fabs(s.accuracy - exact) <= 0.01);
    }
}

TEST_CASE("mismatched grids resample ground truth") {
    DepthMap gt(32, 32);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) gt.at(x, y) = x + y;
    DepthMap pred(16, 16);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) pred.at(x, y) = x + y;
    OrdinalResult r = pairwise_accuracy(gt, pred, 20000, 0.01, 5);
    CHECK(r.accuracy == 1.0);
}

TEST_CASE("invalid tau is rejected") {
    DepthMap gt = random_depth(4, 4, 8);
    CHECK_THROWS_AS(pairwise_accuracy(gt, gt, 100, 1.5, 0), Error);
}
