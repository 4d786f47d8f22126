// Brute-force reference implementations used by both the unit suites and the
// acceptance runner. They deliberately avoid the production code paths:
// membership is tested per pixel, percentiles come from a full sort, and
// pairwise accuracy enumerates every pair.
#ifndef TESTS_ORACLES_HPP
#define TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mirage/depth_map.hpp"
#include "mirage/geometry.hpp"

namespace oracle {

/// Even-odd membership by counting ray crossings to the left of the point.
/// A point exactly on an edge crossing is outside (strictly-inside rule).
inline bool point_in_poly(const mirage::Polygon& poly, double px, double py) {
    bool inside = false;
    std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const mirage::Point& a = poly[i];
        const mirage::Point& b = poly[(i + 1) % n];
        if ((a.y <= py) != (b.y <= py)) {
            double x = a.x + (py - a.y) / (b.y - a.y) * (b.x - a.x);
            if (x == px) return false;
            if (x < px) inside = !inside;
        }
    }
    return inside;
}

/// Per-pixel rasterization: test every pixel center directly.
inline mirage::MaskRaster rasterize(const mirage::RoiShape& shape, int w, int h) {
    mirage::MaskRaster mask(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double px = x + 0.5, py = y + 0.5;
            if (!point_in_poly(shape.outer, px, py)) continue;
            bool excluded = false;
            for (const mirage::Polygon& ex : shape.exclusions)
                if (point_in_poly(ex, px, py)) { excluded = true; break; }
            if (!excluded) mask.set(x, y, true);
        }
    return mask;
}

/// Percentile with linear interpolation between closest order statistics,
/// computed from a full sort.
inline double percentile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    if (v.size() == 1) return v[0];
    double pos = p / 100.0 * static_cast<double>(v.size() - 1);
    if (pos <= 0.0) return v.front();
    if (pos >= static_cast<double>(v.size() - 1)) return v.back();
    std::size_t i = static_cast<std::size_t>(pos);
    return v[i] + (pos - static_cast<double>(i)) * (v[i + 1] - v[i]);
}

struct DecileRef {
    double t = 0.0;
    double m = 0.0;
    std::vector<std::size_t> kept_top;  // indices into the input list
    std::vector<std::size_t> kept_trim;
};

/// Sort-every-time decile filter over a list of magnitudes.
inline DecileRef decile(const std::vector<double>& mags) {
    DecileRef r;
    double top = percentile(mags, 90.0);
    double trim = percentile(mags, 10.0);
    double trim_sum = 0.0;
    for (std::size_t i = 0; i < mags.size(); ++i) {
        if (mags[i] >= top) { r.kept_top.push_back(i); r.t += mags[i]; }
        if (mags[i] >= trim) { r.kept_trim.push_back(i); trim_sum += mags[i]; }
    }
    r.m = r.kept_trim.empty() ? 0.0 : trim_sum / static_cast<double>(r.kept_trim.size());
    return r;
}

/// Exhaustive all-(unordered)-pairs ordinal accuracy; same tie conventions as
/// the sampled estimator (band-excluded pairs dropped, prediction ties wrong).
inline double pairwise_exhaustive(const mirage::DepthMap& gt, const mirage::DepthMap& pred,
                                  double tau) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (gt.valid(i) && pred.valid(i)) idx.push_back(i);
    double g_min = gt.values[idx[0]], g_max = g_min;
    for (std::size_t i : idx) {
        g_min = std::min(g_min, gt.values[i]);
        g_max = std::max(g_max, gt.values[i]);
    }
    double band = tau * (g_max - g_min);
    std::size_t retained = 0, correct = 0;
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = a + 1; b < idx.size(); ++b) {
            double gd = gt.values[idx[a]] - gt.values[idx[b]];
            if (std::fabs(gd) <= band) continue;
            ++retained;
            double pd = pred.values[idx[a]] - pred.values[idx[b]];
            if ((pd > 0) == (gd > 0) && pd != 0.0) ++correct;
        }
    return static_cast<double>(correct) / static_cast<double>(retained);
}

} // namespace oracle

#endif
