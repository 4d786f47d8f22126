#ifndef MIRAGE_ALIGNMENT_HPP
#define MIRAGE_ALIGNMENT_HPP

#include <cmath>
#include <limits>

#include "mirage/depth_map.hpp"
#include "mirage/error.hpp"
#include "mirage/geometry.hpp"
#include "mirage/metrics.hpp"

namespace mirage {

/// Background-only affine alignment of student to teacher: the (a, b)
/// minimizing sum (a*s + b - t)^2, with R^2 over the same pixels.
struct AffineFit {
    double a = 1.0;
    double b = 0.0;
    double r2 = 1.0; // coefficient of determination, <= 1, may be negative
    std::size_t n = 0;
};

inline AffineFit fit_affine_background(const DepthMap& student, const DepthMap& teacher,
                                       const MaskRaster& background) {
    if (student.width != teacher.width || student.height != teacher.height ||
        background.width() != student.width || background.height() != student.height)
        fail("SpecError", "alignment inputs must share a frame");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < student.size(); ++i) {
        if (!background.get(i) || !student.valid(i) || !teacher.valid(i)) continue;
        double x = student.values[i], y = teacher.values[i];
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) fail("DegenerateFit", "fewer than 2 background pixels");
    double dn = static_cast<double>(n);
    double var = sxx - sx * sx / dn;
    if (var <= 1e-12 * std::max(1.0, sxx))
        fail("DegenerateFit", "student is constant on background");
    AffineFit fit;
    fit.n = n;
    fit.a = (sxy - sx * sy / dn) / var;
    fit.b = (sy - fit.a * sx) / dn;

    double t_mean = sy / dn;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < student.size(); ++i) {
        if (!background.get(i) || !student.valid(i) || !teacher.valid(i)) continue;
        double r = fit.a * student.values[i] + fit.b - teacher.values[i];
        double d = teacher.values[i] - t_mean;
        ss_res += r * r;
        ss_tot += d * d;
    }
    if (ss_tot <= 0.0)
        fit.r2 = ss_res <= 1e-24 ? 1.0 : -std::numeric_limits<double>::infinity();
    else
        fit.r2 = 1.0 - ss_res / ss_tot;
    return fit;
}

/// |a*s + b - t| normalized per image to its 2-98 percentile range and
/// clamped to [0, 1]. A residual-free image comes back all zero.
inline DepthMap error_heatmap(const DepthMap& student, const DepthMap& teacher,
                              const AffineFit& fit, double lo_pct = 2.0, double hi_pct = 98.0) {
    if (student.width != teacher.width || student.height != teacher.height)
        fail("SpecError", "heatmap inputs must share a frame");
    DepthMap residual(student.width, student.height);
    residual.validity.assign(residual.size(), 1);
    for (std::size_t i = 0; i < residual.size(); ++i) {
        if (student.valid(i) && teacher.valid(i))
            residual.values[i] = std::fabs(fit.a * student.values[i] + fit.b - teacher.values[i]);
        else
            residual.validity[i] = 0;
    }
    NormalizedField norm = percentile_normalize(residual, lo_pct, hi_pct);
    DepthMap heat(student.width, student.height);
    heat.validity = residual.validity;
    for (std::size_t i = 0; i < heat.size(); ++i)
        heat.values[i] = std::clamp(norm.values[i], 0.0, 1.0);
    return heat;
}

} // namespace mirage

#endif
