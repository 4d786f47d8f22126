#ifndef MIRAGE_DEPTH_MAP_HPP
#define MIRAGE_DEPTH_MAP_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "mirage/error.hpp"

namespace mirage {

/// Row-major grid of real depth values, the universal payload of the toolkit.
/// An empty `validity` vector means every value is valid; otherwise validity
/// has width*height entries and invalid pixels carry no meaning.
struct DepthMap {
    int width = 0;
    int height = 0;
    std::vector<double> values;
    std::vector<std::uint8_t> validity; // empty == all valid

    DepthMap() = default;
    DepthMap(int w, int h, double fill = 0.0)
        : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

    std::size_t size() const { return values.size(); }
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }

    double at(int x, int y) const { return values[index(x, y)]; }
    double& at(int x, int y) { return values[index(x, y)]; }

    bool valid(std::size_t i) const {
        return validity.empty() ? std::isfinite(values[i]) : (validity[i] != 0 && std::isfinite(values[i]));
    }
    bool valid(int x, int y) const { return valid(index(x, y)); }

    std::size_t valid_count() const {
        std::size_t n = 0;
        for (std::size_t i = 0; i < values.size(); ++i)
            if (valid(i)) ++n;
        return n;
    }
};

/// Bilinear sample with half-pixel centers: continuous coordinate (u, v) in
/// pixel units, pixel (i, j) sits at (j + 0.5, i + 0.5). Coordinates are
/// clamped to the grid so edge samples replicate.
inline double bilinear_sample(const DepthMap& d, double u, double v) {
    double fx = u - 0.5;
    double fy = v - 0.5;
    fx = std::clamp(fx, 0.0, static_cast<double>(d.width - 1));
    fy = std::clamp(fy, 0.0, static_cast<double>(d.height - 1));
    int x0 = static_cast<int>(std::floor(fx));
    int y0 = static_cast<int>(std::floor(fy));
    int x1 = std::min(x0 + 1, d.width - 1);
    int y1 = std::min(y0 + 1, d.height - 1);
    double ax = fx - x0;
    double ay = fy - y0;
    double top = d.at(x0, y0) * (1.0 - ax) + d.at(x1, y0) * ax;
    double bot = d.at(x0, y1) * (1.0 - ax) + d.at(x1, y1) * ax;
    return top * (1.0 - ay) + bot * ay;
}

/// Separable bilinear resample of the whole grid to a new resolution.
inline DepthMap resample_bilinear(const DepthMap& d, int new_w, int new_h) {
    if (new_w <= 0 || new_h <= 0) fail("SpecError", "resample target must be positive");
    DepthMap out(new_w, new_h);
    for (int y = 0; y < new_h; ++y) {
        double v = (y + 0.5) / new_h * d.height;
        for (int x = 0; x < new_w; ++x) {
            double u = (x + 0.5) / new_w * d.width;
            out.at(x, y) = bilinear_sample(d, u, v);
        }
    }
    return out;
}

} // namespace mirage

#endif
