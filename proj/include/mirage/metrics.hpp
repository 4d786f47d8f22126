#ifndef MIRAGE_METRICS_HPP
#define MIRAGE_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "mirage/depth_map.hpp"
#include "mirage/error.hpp"
#include "mirage/geometry.hpp"
#include "mirage/manifest.hpp"
#include "mirage/stats.hpp"

namespace mirage {

/// Depth after percentile normalization: values = (d - lo)/(hi - lo) with lo/hi
/// the chosen order statistics, not clipped. A flat view normalizes to all
/// zeros (`degenerate`) instead of failing: a flat prediction on a planar ROI
/// is the ideal answer and must score zero.
struct NormalizedField {
    int width = 0;
    int height = 0;
    std::vector<double> values;
    std::vector<std::uint8_t> validity; // empty == all valid
    double lo = 0.0;
    double hi = 0.0;
    bool degenerate = false;

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
    bool valid(std::size_t i) const { return validity.empty() || validity[i] != 0; }
};

/// Magnitude of the separable second-difference (Laplacian) operator.
struct LaplacianField {
    int width = 0;
    int height = 0;
    std::vector<double> magnitude;
    std::vector<std::uint8_t> validity;

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
    bool valid(std::size_t i) const { return validity[i] != 0; }
};

/// Per-(ROI, crop) aggregates: top-decile edge energies, trimmed means, the
/// retained-pixel masks and the filtered response fields (zero off the kept set).
struct RoiAggregates {
    double t_full = 0.0, t_crop = 0.0;
    double m_full = 0.0, m_crop = 0.0;
    MaskRaster effective;       // R_i actually evaluated
    MaskRaster kept_top_full, kept_top_crop;
    MaskRaster kept_trim_full, kept_trim_crop;
    std::vector<double> lt_full, lt_crop; // top-decile filtered fields
    std::vector<double> lm_full, lm_crop; // trimmed-mean filtered fields
};

struct CompositeScores {
    double d_cluster = 0.0, d_avg = 0.0, dcs = 0.0;
    double D_cluster = 0.0, D_avg = 0.0, ccs = 0.0;
};

inline double percentile_of_depth(const DepthMap& d, double p) {
    std::vector<double> vals;
    vals.reserve(d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d.valid(i)) vals.push_back(d.values[i]);
    if (vals.empty()) fail("AllInvalid", "no valid pixel");
    std::sort(vals.begin(), vals.end());
    return percentile_sorted(vals, p);
}

/// 1-99% percentile normalization (bounds configurable; the error-heatmap path
/// reuses this with 2-98). `scope` restricts the pixels the percentiles are
/// computed from; the affine map is applied to the whole grid either way.
inline NormalizedField percentile_normalize(const DepthMap& depth, double lo_pct = 1.0,
                                            double hi_pct = 99.0,
                                            const MaskRaster* scope = nullptr) {
    std::vector<double> vals;
    vals.reserve(depth.size());
    for (std::size_t i = 0; i < depth.size(); ++i)
        if (depth.valid(i) && (!scope || scope->get(i))) vals.push_back(depth.values[i]);
    if (vals.empty()) fail("AllInvalid", "no valid pixel in normalization scope");
    std::sort(vals.begin(), vals.end());

    NormalizedField f;
    f.width = depth.width;
    f.height = depth.height;
    f.lo = percentile_sorted(vals, lo_pct);
    f.hi = percentile_sorted(vals, hi_pct);
    f.degenerate = (f.hi - f.lo) < 1e-12 * std::max(1.0, std::fabs(f.hi));
    f.values.resize(depth.size(), 0.0);
    if (!depth.validity.empty()) f.validity = depth.validity;
    if (!f.degenerate) {
        double inv = 1.0 / (f.hi - f.lo);
        for (std::size_t i = 0; i < depth.size(); ++i)
            if (depth.valid(i)) f.values[i] = (depth.values[i] - f.lo) * inv;
    }
    return f;
}

/// |v(x+1,y) + v(x-1,y) + v(x,y+1) + v(x,y-1) - 4 v(x,y)| with replicate
/// padding at the frame border. A pixel is valid only if the center and all
/// four (clamped) neighbors are valid, so invalidity erodes inward by one.
inline LaplacianField laplacian_magnitude(const NormalizedField& field) {
    if (field.width < 3 || field.height < 3) fail("TooSmall", "frame must be at least 3x3");
    LaplacianField l;
    l.width = field.width;
    l.height = field.height;
    l.magnitude.assign(field.values.size(), 0.0);
    l.validity.assign(field.values.size(), 0);
    int w = field.width, h = field.height;
    for (int y = 0; y < h; ++y) {
        int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
        for (int x = 0; x < w; ++x) {
            int xm = std::max(x - 1, 0), xp = std::min(x + 1, w - 1);
            std::size_t i = field.index(x, y);
            if (!(field.valid(i) && field.valid(field.index(xm, y)) &&
                  field.valid(field.index(xp, y)) && field.valid(field.index(x, ym)) &&
                  field.valid(field.index(x, yp))))
                continue;
            double c = field.values[i];
            double s = field.values[field.index(xm, y)] + field.values[field.index(xp, y)] +
                       field.values[field.index(x, ym)] + field.values[field.index(x, yp)] - 4.0 * c;
            l.magnitude[i] = std::fabs(s);
            l.validity[i] = 1;
        }
    }
    return l;
}

namespace detail {

struct DecileView {
    double t = 0.0;      // top-decile cumulative energy
    double m = 0.0;      // trimmed mean
    MaskRaster kept_top;
    MaskRaster kept_trim;
    std::vector<double> lt;
    std::vector<double> lm;
};

inline DecileView decile_filter(const LaplacianField& l, const MaskRaster& region) {
    std::vector<double> mags;
    std::vector<std::size_t> idx;
    for (int y = 0; y < l.height; ++y)
        for (int x = 0; x < l.width; ++x) {
            std::size_t i = l.index(x, y);
            if (region.get(x, y)) {
                mags.push_back(l.magnitude[i]);
                idx.push_back(i);
            }
        }
    DecileView v;
    v.kept_top = MaskRaster(l.width, l.height);
    v.kept_trim = MaskRaster(l.width, l.height);
    v.lt.assign(l.magnitude.size(), 0.0);
    v.lm.assign(l.magnitude.size(), 0.0);
    double top_thresh = percentile_select(mags, 90.0);
    double trim_thresh = percentile_select(mags, 10.0);
    double trim_sum = 0.0;
    std::size_t trim_n = 0;
    for (std::size_t k = 0; k < mags.size(); ++k) {
        int x = static_cast<int>(idx[k] % l.width);
        int y = static_cast<int>(idx[k] / l.width);
        if (mags[k] >= top_thresh) { // ties kept
            v.kept_top.set(x, y, true);
            v.lt[idx[k]] = mags[k];
            v.t += mags[k];
        }
        if (mags[k] >= trim_thresh) {
            v.kept_trim.set(x, y, true);
            v.lm[idx[k]] = mags[k];
            trim_sum += mags[k];
            ++trim_n;
        }
    }
    v.m = trim_n ? trim_sum / static_cast<double>(trim_n) : 0.0;
    return v;
}

} // namespace detail

/// Top-decile sums and trimmed means over R_i = roi ∩ crop_valid ∩ both
/// fields' validity, additionally excluding the 1-pixel frame border (those
/// second differences are artifacts of the replicate padding).
inline RoiAggregates roi_aggregates(const LaplacianField& l_full, const LaplacianField& l_crop,
                                    const MaskRaster& roi, const MaskRaster& crop_valid) {
    if (l_full.width != roi.width() || l_full.height != roi.height() ||
        l_crop.width != roi.width() || l_crop.height != roi.height() ||
        crop_valid.width() != roi.width() || crop_valid.height() != roi.height())
        fail("SpecError", "aggregate inputs must share the full-image frame");
    int w = roi.width(), h = roi.height();
    MaskRaster region(w, h);
    for (int y = 1; y < h - 1; ++y)
        for (int x = 1; x < w - 1; ++x) {
            std::size_t i = l_full.index(x, y);
            if (roi.get(x, y) && crop_valid.get(x, y) && l_full.valid(i) && l_crop.valid(i))
                region.set(x, y, true);
        }
    if (region.count() == 0) fail("EmptyEffectiveRoi", "ROI has no evaluable pixels");

    detail::DecileView vf = detail::decile_filter(l_full, region);
    detail::DecileView vc = detail::decile_filter(l_crop, region);
    RoiAggregates a;
    a.t_full = vf.t;
    a.t_crop = vc.t;
    a.m_full = vf.m;
    a.m_crop = vc.m;
    a.effective = std::move(region);
    a.kept_top_full = std::move(vf.kept_top);
    a.kept_top_crop = std::move(vc.kept_top);
    a.kept_trim_full = std::move(vf.kept_trim);
    a.kept_trim_crop = std::move(vc.kept_trim);
    a.lt_full = std::move(vf.lt);
    a.lt_crop = std::move(vc.lt);
    a.lm_full = std::move(vf.lm);
    a.lm_crop = std::move(vc.lm);
    return a;
}

/// DCS/CCS and their four components. Filtered-out pixels contribute zero and
/// the per-pixel means divide by |R_i|.
inline CompositeScores composite_scores(const RoiAggregates& a) {
    CompositeScores s;
    s.d_cluster = std::hypot(a.t_full, a.t_crop);
    s.D_cluster = std::fabs(a.m_full - a.m_crop) / std::sqrt(2.0);
    double d_sum = 0.0, D_sum = 0.0;
    std::size_t n = a.effective.count();
    for (std::size_t i = 0; i < a.effective.size(); ++i) {
        if (!a.effective.get(i)) continue;
        d_sum += std::hypot(a.lt_full[i], a.lt_crop[i]);
        D_sum += std::fabs(a.lm_full[i] - a.lm_crop[i]) / std::sqrt(2.0);
    }
    s.d_avg = d_sum / static_cast<double>(n);
    s.D_avg = D_sum / static_cast<double>(n);
    s.dcs = s.d_cluster + s.d_avg;
    s.ccs = s.D_cluster + s.D_avg;
    return s;
}

enum class NormScope { PerView, PerRoi };

struct EvalOptions {
    NormScope scope = NormScope::PerView;
    double lo_pct = 1.0;
    double hi_pct = 99.0;
};

struct UnitScore {
    std::string sample_id;
    int roi_index = 0;
    std::string crop_id;
    CompositeScores scores;
    double t_full = 0.0, t_crop = 0.0, m_full = 0.0, m_crop = 0.0;

    std::string unit_id() const {
        return sample_id + ":" + std::to_string(roi_index) + ":" + crop_id;
    }
};

struct BenchmarkResult {
    CompositeScores aggregate;
    std::vector<UnitScore> units; // sorted by (sample id, roi index, crop id)
};

namespace detail {

inline NormalizedField apply_affine_norm(const DepthMap& d, double lo, double hi) {
    NormalizedField f;
    f.width = d.width;
    f.height = d.height;
    f.lo = lo;
    f.hi = hi;
    f.degenerate = (hi - lo) < 1e-12 * std::max(1.0, std::fabs(hi));
    f.values.assign(d.size(), 0.0);
    if (!d.validity.empty()) f.validity = d.validity;
    if (!f.degenerate) {
        double inv = 1.0 / (hi - lo);
        for (std::size_t i = 0; i < d.size(); ++i)
            if (d.valid(i)) f.values[i] = (d.values[i] - lo) * inv;
    }
    return f;
}

} // namespace detail

/// One (ROI, crop) unit. `full_raw` is the full-view depth at sample
/// resolution; `crop_raw` the crop-view prediction in its native grid.
inline UnitScore evaluate_unit(const DepthMap& full_raw, const DepthMap& crop_raw,
                               const CropRect& rect, const MaskRaster& roi_mask,
                               const EvalOptions& opt) {
    int w = full_raw.width, h = full_raw.height;
    DepthMap mapped = map_crop_to_full(crop_raw, rect, w, h);
    MaskRaster crop_valid(w, h);
    for (int y = rect.y0; y < rect.y1; ++y)
        for (int x = rect.x0; x < rect.x1; ++x) crop_valid.set(x, y, true);

    NormalizedField nf, nc;
    if (opt.scope == NormScope::PerView) {
        nf = percentile_normalize(full_raw, opt.lo_pct, opt.hi_pct);
        // crop percentiles from the native crop grid; normalization commutes
        // with the bilinear map, so apply it to the mapped field
        double lo = percentile_of_depth(crop_raw, opt.lo_pct);
        double hi = percentile_of_depth(crop_raw, opt.hi_pct);
        nc = detail::apply_affine_norm(mapped, lo, hi);
    } else {
        nf = percentile_normalize(full_raw, opt.lo_pct, opt.hi_pct, &roi_mask);
        MaskRaster roi_in_crop = roi_mask & crop_valid;
        if (roi_in_crop.count() == 0) fail("EmptyEffectiveRoi", "ROI does not intersect crop");
        nc = percentile_normalize(mapped, opt.lo_pct, opt.hi_pct, &roi_in_crop);
    }

    LaplacianField lf = laplacian_magnitude(nf);
    LaplacianField lc = laplacian_magnitude(nc);
    RoiAggregates agg = roi_aggregates(lf, lc, roi_mask, crop_valid);

    UnitScore u;
    u.scores = composite_scores(agg);
    u.t_full = agg.t_full;
    u.t_crop = agg.t_crop;
    u.m_full = agg.m_full;
    u.m_crop = agg.m_crop;
    return u;
}

/// Full per-(ROI, crop) pipeline over every positive sample of the manifest.
/// Aggregate = arithmetic mean of each component over all evaluated units.
inline BenchmarkResult benchmark_scores(const BenchmarkManifest& m, const std::string& role,
                                        const EvalOptions& opt = {}) {
    BenchmarkResult res;
    for (const SampleRecord& s : m.samples) {
        if (s.negative) continue;
        DepthMap full_raw = load_role_full(m, s, role);
        if (full_raw.width != s.width || full_raw.height != s.height)
            full_raw = resample_bilinear(full_raw, s.width, s.height);
        for (std::size_t ri = 0; ri < s.rois.size(); ++ri) {
            MaskRaster roi_mask = rasterize_roi(s.rois[ri], s.width, s.height);
            for (const CropRect& rect : s.crops) {
                try {
                    DepthMap crop_raw = load_role_crop(m, s, role, rect.id);
                    UnitScore u = evaluate_unit(full_raw, crop_raw, rect, roi_mask, opt);
                    u.sample_id = s.id;
                    u.roi_index = static_cast<int>(ri);
                    u.crop_id = rect.id;
                    res.units.push_back(std::move(u));
                } catch (const Error& e) {
                    fail(e.category(), "(" + s.id + ",roi " + std::to_string(ri) + "," +
                                           rect.id + "): " + e.what());
                }
            }
        }
    }
    if (res.units.empty()) fail("SpecError", "manifest has no evaluable (ROI, crop) units");
    std::sort(res.units.begin(), res.units.end(), [](const UnitScore& a, const UnitScore& b) {
        if (a.sample_id != b.sample_id) return a.sample_id < b.sample_id;
        if (a.roi_index != b.roi_index) return a.roi_index < b.roi_index;
        return a.crop_id < b.crop_id;
    });
    double n = static_cast<double>(res.units.size());
    for (const UnitScore& u : res.units) {
        res.aggregate.d_cluster += u.scores.d_cluster;
        res.aggregate.d_avg += u.scores.d_avg;
        res.aggregate.dcs += u.scores.dcs;
        res.aggregate.D_cluster += u.scores.D_cluster;
        res.aggregate.D_avg += u.scores.D_avg;
        res.aggregate.ccs += u.scores.ccs;
    }
    res.aggregate.d_cluster /= n;
    res.aggregate.d_avg /= n;
    res.aggregate.dcs /= n;
    res.aggregate.D_cluster /= n;
    res.aggregate.D_avg /= n;
    res.aggregate.ccs /= n;
    return res;
}

/// CSV rows of the per-unit (full, crop) projection, for the scatter figure.
inline std::string scatter_export(const std::vector<UnitScore>& units) {
    std::ostringstream out;
    out << "unit,t_full,t_crop,m_full,m_crop\n";
    out.precision(17);
    for (const UnitScore& u : units)
        out << u.unit_id() << "," << u.t_full << "," << u.t_crop << ","
            << u.m_full << "," << u.m_crop << "\n";
    return out.str();
}

} // namespace mirage

#endif
