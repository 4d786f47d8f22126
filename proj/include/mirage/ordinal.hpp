#ifndef MIRAGE_ORDINAL_HPP
#define MIRAGE_ORDINAL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mirage/depth_map.hpp"
#include "mirage/error.hpp"
#include "mirage/rng.hpp"

namespace mirage {

struct OrdinalResult {
    double accuracy = 0.0;
    std::uint64_t pairs_retained = 0;
    std::uint64_t pairs_sampled = 0;
};

inline int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

/// Mean pairwise ordinal accuracy on sampled point pairs. Pairs are drawn
/// uniformly with replacement among jointly-valid pixels from a counter-based
/// generator, so pair k gets its own substream regardless of evaluation order.
/// Pairs whose ground-truth gap is within tau * (gt range) are discarded;
/// prediction ties on retained pairs count as incorrect.
inline OrdinalResult pairwise_accuracy(const DepthMap& gt, const DepthMap& pred,
                                       std::uint64_t pairs, double tau, std::uint64_t seed) {
    if (!(tau >= 0.0 && tau < 1.0)) fail("SpecError", "tau must be in [0,1)");
    DepthMap gt_grid = (gt.width == pred.width && gt.height == pred.height)
                           ? gt
                           : resample_bilinear(gt, pred.width, pred.height);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (gt_grid.valid(i) && pred.valid(i)) idx.push_back(i);
    if (idx.size() < 2) fail("NoValidPairs", "fewer than 2 jointly-valid pixels");

    double g_min = gt_grid.values[idx[0]], g_max = g_min;
    for (std::size_t i : idx) {
        g_min = std::min(g_min, gt_grid.values[i]);
        g_max = std::max(g_max, gt_grid.values[i]);
    }
    double band = tau * (g_max - g_min);

    std::uint64_t retained = 0, correct = 0;
    std::uint64_t n = idx.size();
    for (std::uint64_t k = 0; k < pairs; ++k) {
        std::size_t i = idx[bounded(counter_hash(seed, 2 * k), n)];
        std::size_t j = idx[bounded(counter_hash(seed, 2 * k + 1), n)];
        double gi = gt_grid.values[i], gj = gt_grid.values[j];
        if (std::fabs(gi - gj) <= band) continue;
        ++retained;
        if (sign_of(pred.values[i] - pred.values[j]) == sign_of(gi - gj)) ++correct;
    }
    if (retained == 0) fail("NoValidPairs", "every sampled pair fell in the exclusion band");
    OrdinalResult r;
    r.accuracy = static_cast<double>(correct) / static_cast<double>(retained);
    r.pairs_retained = retained;
    r.pairs_sampled = pairs;
    return r;
}

} // namespace mirage

#endif
