#ifndef MIRAGE_GEOMETRY_HPP
#define MIRAGE_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mirage/depth_map.hpp"
#include "mirage/error.hpp"
#include "mirage/rng.hpp"

namespace mirage {

// Pixel-center convention, used everywhere: pixel (i, j) has continuous
// coordinates (j + 0.5, i + 0.5).

struct Point {
    double x = 0.0;
    double y = 0.0;
};

using Polygon = std::vector<Point>;

/// Outer polygon plus zero or more exclusion polygons (full-image frame).
struct RoiShape {
    Polygon outer;
    std::vector<Polygon> exclusions;
};

/// Half-open integer rectangle [x0, x1) x [y0, y1) in the full-image frame.
struct CropRect {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    std::string id;
    std::uint64_t seed = 0;

    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }

    void validate(int frame_w, int frame_h) const {
        if (!(0 <= x0 && x0 < x1 && x1 <= frame_w && 0 <= y0 && y0 < y1 && y1 <= frame_h))
            fail("SpecError", "crop rect '" + id + "' out of frame bounds");
    }
};

/// Binary pixel mask with a cached popcount.
class MaskRaster {
public:
    MaskRaster() = default;
    MaskRaster(int w, int h, bool fill = false)
        : width_(w), height_(h), bits_(static_cast<std::size_t>(w) * h, fill ? 1 : 0),
          count_(fill ? bits_.size() : 0) {}

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t count() const { return count_; }

    bool get(int x, int y) const { return bits_[idx(x, y)] != 0; }
    bool get(std::size_t i) const { return bits_[i] != 0; }

    void set(int x, int y, bool v) {
        std::uint8_t nv = v ? 1 : 0;
        std::uint8_t& b = bits_[idx(x, y)];
        if (b != nv) {
            count_ += v ? 1 : -1;
            b = nv;
        }
    }

    std::size_t size() const { return bits_.size(); }

    MaskRaster operator&(const MaskRaster& o) const { return combine(o, [](bool a, bool b) { return a && b; }); }
    MaskRaster operator|(const MaskRaster& o) const { return combine(o, [](bool a, bool b) { return a || b; }); }
    /// Set difference: pixels in *this and not in o.
    MaskRaster minus(const MaskRaster& o) const { return combine(o, [](bool a, bool b) { return a && !b; }); }

    MaskRaster complement() const {
        MaskRaster r(width_, height_);
        for (std::size_t i = 0; i < bits_.size(); ++i)
            if (!bits_[i]) { r.bits_[i] = 1; ++r.count_; }
        return r;
    }

    bool operator==(const MaskRaster& o) const {
        return width_ == o.width_ && height_ == o.height_ && bits_ == o.bits_;
    }

private:
    template <class F>
    MaskRaster combine(const MaskRaster& o, F f) const {
        if (width_ != o.width_ || height_ != o.height_)
            fail("SpecError", "mask frame mismatch");
        MaskRaster r(width_, height_);
        for (std::size_t i = 0; i < bits_.size(); ++i) {
            bool v = f(bits_[i] != 0, o.bits_[i] != 0);
            if (v) { r.bits_[i] = 1; ++r.count_; }
        }
        return r;
    }

    std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
    std::size_t count_ = 0;
};

namespace detail {

inline int distinct_vertices(const Polygon& p) {
    int n = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        bool dup = false;
        for (std::size_t j = 0; j < i; ++j)
            if (p[i].x == p[j].x && p[i].y == p[j].y) { dup = true; break; }
        if (!dup) ++n;
    }
    return n;
}

inline void check_polygon(const Polygon& p, const char* what) {
    if (distinct_vertices(p) < 3)
        fail("DegeneratePolygon", std::string(what) + " has fewer than 3 distinct vertices");
    for (const Point& v : p)
        if (!std::isfinite(v.x) || !std::isfinite(v.y))
            fail("SpecError", std::string(what) + " has non-finite vertex");
}

/// Edge crossings of the horizontal line y = yc, for even-odd scanline fill.
inline void row_crossings(const Polygon& poly, double yc, std::vector<double>& xs) {
    std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = poly[i];
        const Point& b = poly[(i + 1) % n];
        if ((a.y <= yc) != (b.y <= yc))
            xs.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
    }
    std::sort(xs.begin(), xs.end());
}

/// Even-odd membership of a single point (crossing count parity).
inline bool point_in_polygon(const Polygon& poly, double px, double py) {
    bool inside = false;
    std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = poly[i];
        const Point& b = poly[(i + 1) % n];
        if ((a.y <= py) != (b.y <= py)) {
            double x = a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y);
            if (x < px) inside = !inside;
        }
    }
    return inside;
}

inline double shoelace(const Polygon& p) {
    double s = 0.0;
    std::size_t n = p.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = p[i];
        const Point& b = p[(i + 1) % n];
        s += a.x * b.y - b.x * a.y;
    }
    return std::fabs(s) * 0.5;
}

struct Bbox {
    double x0, y0, x1, y1;
    double w() const { return x1 - x0; }
    double h() const { return y1 - y0; }
    double diag() const { return std::hypot(w(), h()); }
};

inline Bbox polygon_bbox(const Polygon& p) {
    Bbox b{p[0].x, p[0].y, p[0].x, p[0].y};
    for (const Point& v : p) {
        b.x0 = std::min(b.x0, v.x);
        b.y0 = std::min(b.y0, v.y);
        b.x1 = std::max(b.x1, v.x);
        b.y1 = std::max(b.y1, v.y);
    }
    return b;
}

} // namespace detail

inline void validate_roi_shape(const RoiShape& shape) {
    detail::check_polygon(shape.outer, "outer polygon");
    detail::Bbox bb = detail::polygon_bbox(shape.outer);
    for (const Polygon& ex : shape.exclusions) {
        detail::check_polygon(ex, "exclusion polygon");
        for (const Point& v : ex)
            if (v.x < bb.x0 || v.x > bb.x1 || v.y < bb.y0 || v.y > bb.y1)
                fail("SpecError", "exclusion vertex outside outer bounding box");
    }
}

/// Scanline even-odd rasterization: a pixel is set iff its center lies inside
/// the outer polygon and inside no exclusion. Clipped to the frame.
inline MaskRaster rasterize_roi(const RoiShape& shape, int width, int height) {
    if (width <= 0 || height <= 0) fail("SpecError", "frame must be positive");
    validate_roi_shape(shape);
    MaskRaster mask(width, height);
    std::vector<double> xs;
    std::vector<std::uint8_t> row(static_cast<std::size_t>(width));
    for (int y = 0; y < height; ++y) {
        double yc = y + 0.5;
        std::fill(row.begin(), row.end(), 0);
        xs.clear();
        detail::row_crossings(shape.outer, yc, xs);
        for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
            int cx0 = std::max(0, static_cast<int>(std::ceil(xs[k] - 0.5)));
            int cx1 = std::min(width - 1, static_cast<int>(std::floor(xs[k + 1] - 0.5 - 1e-12)));
            // pixel centers x+0.5 strictly inside (xs[k], xs[k+1])
            for (int x = cx0; x <= cx1; ++x)
                if (x + 0.5 > xs[k] && x + 0.5 < xs[k + 1]) row[x] = 1;
        }
        for (const Polygon& ex : shape.exclusions) {
            xs.clear();
            detail::row_crossings(ex, yc, xs);
            for (std::size_t k = 0; k + 1 < xs.size(); k += 2)
                for (int x = 0; x < width; ++x)
                    if (x + 0.5 > xs[k] && x + 0.5 < xs[k + 1]) row[x] = 0;
        }
        for (int x = 0; x < width; ++x)
            if (row[x]) mask.set(x, y, true);
    }
    if (mask.count() == 0) fail("EmptyMask", "rasterized ROI has no pixels");
    return mask;
}

/// Shoelace area of the outer polygon minus the exclusion areas.
inline double polygon_area(const RoiShape& shape) {
    validate_roi_shape(shape);
    double a = detail::shoelace(shape.outer);
    for (const Polygon& ex : shape.exclusions) a -= detail::shoelace(ex);
    return a;
}

namespace detail {

inline bool crop_satisfies(const CropRect& r, const Bbox& bb, double min_diag_frac) {
    double cx = (r.x0 + r.x1) * 0.5;
    double cy = (r.y0 + r.y1) * 0.5;
    if (cx < bb.x0 || cx > bb.x1 || cy < bb.y0 || cy > bb.y1) return false;
    double ow = std::min(static_cast<double>(r.x1), bb.x1) - std::max(static_cast<double>(r.x0), bb.x0);
    double oh = std::min(static_cast<double>(r.y1), bb.y1) - std::max(static_cast<double>(r.y0), bb.y0);
    if (ow <= 0.0 || oh <= 0.0) return false;
    return std::hypot(ow, oh) >= min_diag_frac * bb.diag() - 1e-12;
}

} // namespace detail

/// Re-evaluates the "retain at least min_diag_frac of the ROI diagonal"
/// predicate on a candidate rect. Exposed so tests can check outputs directly.
inline bool crop_diagonal_ok(const CropRect& r, const RoiShape& shape, double min_diag_frac) {
    detail::Bbox bb = detail::polygon_bbox(shape.outer);
    return detail::crop_satisfies(r, bb, min_diag_frac);
}

/// Random ROI-centered crops. Center is sampled uniformly in the ROI bbox,
/// side lengths uniformly in [floor(frac * bbox side), min(frame side,
/// 2 * bbox side)]; up to 256 rejection attempts per crop, after which the
/// integer-rounded bbox itself (always feasible) is used.
inline std::vector<CropRect> generate_crops(const RoiShape& shape, int width, int height,
                                            int count, double min_diag_frac, std::uint64_t seed) {
    if (count < 1) fail("SpecError", "crop count must be >= 1");
    if (!(min_diag_frac > 0.0 && min_diag_frac <= 1.0)) fail("SpecError", "min_diag_frac must be in (0,1]");
    validate_roi_shape(shape);
    detail::Bbox bb = detail::polygon_bbox(shape.outer);
    bb.x0 = std::clamp(bb.x0, 0.0, static_cast<double>(width));
    bb.x1 = std::clamp(bb.x1, 0.0, static_cast<double>(width));
    bb.y0 = std::clamp(bb.y0, 0.0, static_cast<double>(height));
    bb.y1 = std::clamp(bb.y1, 0.0, static_cast<double>(height));
    if (bb.w() <= 0.0 || bb.h() <= 0.0) fail("InfeasibleCrop", "ROI bbox lies outside the frame");

    auto fallback = [&]() {
        CropRect r;
        r.x0 = static_cast<int>(std::floor(bb.x0));
        r.y0 = static_cast<int>(std::floor(bb.y0));
        r.x1 = std::max(r.x0 + 1, static_cast<int>(std::ceil(bb.x1)));
        r.y1 = std::max(r.y0 + 1, static_cast<int>(std::ceil(bb.y1)));
        r.x1 = std::min(r.x1, width);
        r.y1 = std::min(r.y1, height);
        return r;
    };

    int wmax = std::min(width, static_cast<int>(std::ceil(2.0 * bb.w())));
    int hmax = std::min(height, static_cast<int>(std::ceil(2.0 * bb.h())));
    int wmin = std::max(1, static_cast<int>(std::floor(min_diag_frac * bb.w())));
    int hmin = std::max(1, static_cast<int>(std::floor(min_diag_frac * bb.h())));
    wmin = std::min(wmin, wmax);
    hmin = std::min(hmin, hmax);

    std::vector<CropRect> out;
    for (int k = 0; k < count; ++k) {
        CounterRng rng(seed, static_cast<std::uint64_t>(k));
        CropRect best;
        bool found = false;
        for (int attempt = 0; attempt < 256 && !found; ++attempt) {
            int w = static_cast<int>(rng.next_int(wmin, wmax));
            int h = static_cast<int>(rng.next_int(hmin, hmax));
            double cx = rng.next_real(bb.x0, bb.x1);
            double cy = rng.next_real(bb.y0, bb.y1);
            CropRect r;
            r.x0 = std::clamp(static_cast<int>(std::lround(cx - w * 0.5)), 0, width - w);
            r.y0 = std::clamp(static_cast<int>(std::lround(cy - h * 0.5)), 0, height - h);
            r.x1 = r.x0 + w;
            r.y1 = r.y0 + h;
            if (detail::crop_satisfies(r, bb, min_diag_frac)) {
                best = r;
                found = true;
            }
        }
        if (!found) {
            best = fallback();
            if (!detail::crop_satisfies(best, bb, min_diag_frac))
                fail("InfeasibleCrop", "no rectangle satisfies the diagonal constraint");
        }
        best.id = "c" + std::to_string(k);
        best.seed = seed;
        out.push_back(best);
    }
    return out;
}

/// Places a crop-view prediction into the full frame: separable bilinear
/// resample onto the rect footprint, everything outside the rect invalid.
inline DepthMap map_crop_to_full(const DepthMap& crop_depth, const CropRect& rect,
                                 int full_width, int full_height) {
    rect.validate(full_width, full_height);
    if (crop_depth.width <= 0 || crop_depth.height <= 0)
        fail("SpecError", "empty crop depth");
    DepthMap out(full_width, full_height);
    out.validity.assign(out.size(), 0);
    int rw = rect.width();
    int rh = rect.height();
    for (int y = rect.y0; y < rect.y1; ++y) {
        double v = (y - rect.y0 + 0.5) / rh * crop_depth.height;
        for (int x = rect.x0; x < rect.x1; ++x) {
            double u = (x - rect.x0 + 0.5) / rw * crop_depth.width;
            out.at(x, y) = bilinear_sample(crop_depth, u, v);
            out.validity[out.index(x, y)] = 1;
        }
    }
    return out;
}

/// Chebyshev (chessboard) dilation by `radius`, as two separable window-max
/// passes over rows then columns.
inline MaskRaster dilate_chebyshev(const MaskRaster& mask, int radius) {
    if (radius <= 0) return mask;
    int w = mask.width(), h = mask.height();
    MaskRaster tmp(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            bool v = false;
            for (int dx = -radius; dx <= radius && !v; ++dx) {
                int xx = x + dx;
                if (xx >= 0 && xx < w && mask.get(xx, y)) v = true;
            }
            if (v) tmp.set(x, y, true);
        }
    MaskRaster out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            bool v = false;
            for (int dy = -radius; dy <= radius && !v; ++dy) {
                int yy = y + dy;
                if (yy >= 0 && yy < h && tmp.get(x, yy)) v = true;
            }
            if (v) out.set(x, y, true);
        }
    return out;
}

} // namespace mirage

#endif
