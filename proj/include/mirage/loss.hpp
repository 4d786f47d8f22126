#ifndef MIRAGE_LOSS_HPP
#define MIRAGE_LOSS_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mirage/depth_map.hpp"
#include "mirage/error.hpp"
#include "mirage/geometry.hpp"
#include "mirage/metrics.hpp"
#include "mirage/stats.hpp"

namespace mirage {

/// Everything the loss computation is parameterized by. Defaults follow the
/// published weights where they exist; the rest are recorded in output
/// metadata so runs stay auditable.
struct LossConfig {
    double alpha1 = 1.0, alpha2 = 0.4;                            // HKR
    double alpha3 = 1.0, alpha4 = 0.5, alpha5 = 0.3, alpha6 = 0.8, alpha7 = 0.3; // NKP
    double lambda_f = 0.5;     // full-branch weight, < 1 keeps the crop branch dominant
    int k = 3;                 // plane experts (K+1 gating slots)
    double temperature = 0.1;  // soft-target / heuristic-gate temperature
    double smoothing = 0.1;    // label smoothing for negative-sample targets
    double beta_ce = 1.0, beta_h = 0.01, beta_anchor = 0.1;
    int ring_width = 8;
    int guard_width = 4;
    int smooth_radius = 5;
};

inline LossConfig loss_config_from_json(const nlohmann::json& j) {
    LossConfig c;
    c.alpha1 = j.value("alpha1", c.alpha1);
    c.alpha2 = j.value("alpha2", c.alpha2);
    c.alpha3 = j.value("alpha3", c.alpha3);
    c.alpha4 = j.value("alpha4", c.alpha4);
    c.alpha5 = j.value("alpha5", c.alpha5);
    c.alpha6 = j.value("alpha6", c.alpha6);
    c.alpha7 = j.value("alpha7", c.alpha7);
    c.lambda_f = j.value("lambda_f", c.lambda_f);
    c.k = j.value("k", c.k);
    c.temperature = j.value("temperature", c.temperature);
    c.smoothing = j.value("smoothing", c.smoothing);
    c.beta_ce = j.value("beta_ce", c.beta_ce);
    c.beta_h = j.value("beta_h", c.beta_h);
    c.beta_anchor = j.value("beta_anchor", c.beta_anchor);
    c.ring_width = j.value("ring_width", c.ring_width);
    c.guard_width = j.value("guard_width", c.guard_width);
    c.smooth_radius = j.value("smooth_radius", c.smooth_radius);
    if (c.k < 1) fail("SpecError", "k must be >= 1");
    if (!(c.temperature > 0.0)) fail("SpecError", "temperature must be > 0");
    if (!(c.smoothing >= 0.0 && c.smoothing < 1.0)) fail("SpecError", "smoothing must be in [0,1)");
    if (c.ring_width < 1 || c.guard_width < 1) fail("SpecError", "ring widths must be >= 1");
    return c;
}

inline nlohmann::json loss_config_to_json(const LossConfig& c) {
    nlohmann::json j;
    j["alpha1"] = c.alpha1;
    j["alpha2"] = c.alpha2;
    j["alpha3"] = c.alpha3;
    j["alpha4"] = c.alpha4;
    j["alpha5"] = c.alpha5;
    j["alpha6"] = c.alpha6;
    j["alpha7"] = c.alpha7;
    j["lambda_f"] = c.lambda_f;
    j["k"] = c.k;
    j["temperature"] = c.temperature;
    j["smoothing"] = c.smoothing;
    j["beta_ce"] = c.beta_ce;
    j["beta_h"] = c.beta_h;
    j["beta_anchor"] = c.beta_anchor;
    j["ring_width"] = c.ring_width;
    j["guard_width"] = c.guard_width;
    j["smooth_radius"] = c.smooth_radius;
    return j;
}

inline LossConfig load_loss_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("IoError", "cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail("SchemaError", path.string() + ": " + e.what());
    }
    return loss_config_from_json(j);
}

/// Ring bands around the ROI. m_bg follows the published product
/// (1-m)(1-r_f)(1-r_g) literally, so r_e pixels can belong to m_bg;
/// m_bg_strict additionally excludes r_e.
struct RingMasks {
    MaskRaster base_ring;
    MaskRaster r_f;  // low-gradient seam
    MaskRaster r_e;  // high-gradient edge subset (top decile by |L(z_T)|)
    MaskRaster r_g;  // protective guard band
    MaskRaster m_bg;
    MaskRaster m_bg_strict;
};

inline RingMasks build_ring_masks(const MaskRaster& roi, const LaplacianField& lap_teacher,
                                  int ring_width, int guard_width) {
    if (roi.count() == 0) fail("EmptyMask", "empty ROI");
    if (ring_width < 1 || guard_width < 1) fail("SpecError", "ring widths must be >= 1");
    if (lap_teacher.width != roi.width() || lap_teacher.height != roi.height())
        fail("SpecError", "teacher Laplacian frame mismatch");
    MaskRaster dil_inner = dilate_chebyshev(roi, ring_width);
    RingMasks r;
    r.base_ring = dil_inner.minus(roi);
    if (r.base_ring.count() == 0) fail("RingEmpty", "ROI leaves no room for a ring");
    r.r_g = dilate_chebyshev(roi, ring_width + guard_width).minus(dil_inner);

    std::vector<double> mags;
    for (std::size_t i = 0; i < r.base_ring.size(); ++i)
        if (r.base_ring.get(i)) mags.push_back(lap_teacher.magnitude[i]);
    double thresh = percentile_select(mags, 90.0);
    r.r_e = MaskRaster(roi.width(), roi.height());
    for (int y = 0; y < roi.height(); ++y)
        for (int x = 0; x < roi.width(); ++x)
            if (r.base_ring.get(x, y) && lap_teacher.magnitude[lap_teacher.index(x, y)] >= thresh)
                r.r_e.set(x, y, true);
    r.r_f = r.base_ring.minus(r.r_e);
    r.m_bg = roi.complement().minus(r.r_f).minus(r.r_g);
    r.m_bg_strict = r.m_bg.minus(r.r_e);
    return r;
}

/// Depth standardized against the teacher's background statistics.
struct ZNormalized {
    int width = 0;
    int height = 0;
    std::vector<double> values;
    std::vector<std::uint8_t> validity; // empty == all valid
    double mu_b = 0.0;
    double sigma_b = 1.0;

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
    bool valid(std::size_t i) const { return validity.empty() || validity[i] != 0; }
};

/// Standardize with statistics computed over `m_bg` (population std) of
/// `stats_source`; usually stats_source == depth (self) or the teacher.
inline ZNormalized z_normalize(const DepthMap& depth, const MaskRaster& m_bg,
                               const DepthMap* stats_source = nullptr) {
    const DepthMap& src = stats_source ? *stats_source : depth;
    if (src.width != depth.width || src.height != depth.height ||
        m_bg.width() != depth.width || m_bg.height() != depth.height)
        fail("SpecError", "z-normalize frame mismatch");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < src.size(); ++i)
        if (m_bg.get(i) && src.valid(i)) { sum += src.values[i]; ++n; }
    if (n < 2) fail("DegenerateBackground", "fewer than 2 background pixels");
    double mu = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < src.size(); ++i)
        if (m_bg.get(i) && src.valid(i)) { double d = src.values[i] - mu; ss += d * d; }
    double sigma = std::sqrt(ss / static_cast<double>(n));
    if (sigma < 1e-8) fail("DegenerateBackground", "background standard deviation below 1e-8");

    ZNormalized z;
    z.width = depth.width;
    z.height = depth.height;
    z.mu_b = mu;
    z.sigma_b = sigma;
    z.values.assign(depth.size(), 0.0);
    if (!depth.validity.empty()) z.validity = depth.validity;
    for (std::size_t i = 0; i < depth.size(); ++i)
        if (depth.valid(i)) z.values[i] = (depth.values[i] - mu) / sigma;
    return z;
}

inline LaplacianField laplacian_of(const ZNormalized& z) {
    NormalizedField f;
    f.width = z.width;
    f.height = z.height;
    f.values = z.values;
    f.validity = z.validity;
    return laplacian_magnitude(f);
}

/// Box average over the (2r+1)^2 window intersected with `ring`, normalized by
/// the in-ring neighbor count; defined only on ring pixels (zero elsewhere).
inline std::vector<double> ring_local_smooth(const ZNormalized& z, const MaskRaster& ring,
                                             int radius) {
    if (ring.count() == 0) fail("EmptyMask", "empty ring for smoothing");
    std::vector<double> out(z.values.size(), 0.0);
    int w = z.width, h = z.height;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!ring.get(x, y)) continue;
            double s = 0.0;
            int n = 0;
            for (int dy = -radius; dy <= radius; ++dy)
                for (int dx = -radius; dx <= radius; ++dx) {
                    int xx = x + dx, yy = y + dy;
                    if (xx < 0 || xx >= w || yy < 0 || yy >= h) continue;
                    std::size_t i = z.index(xx, yy);
                    if (!ring.get(xx, yy) || !z.valid(i)) continue;
                    s += z.values[i];
                    ++n;
                }
            out[z.index(x, y)] = n ? s / n : z.values[z.index(x, y)];
        }
    return out;
}

struct Plane {
    double a = 0.0, b = 0.0, c = 0.0;
    double eval(double x, double y) const { return a * x + b * y + c; }
};

struct PlaneMixture {
    std::vector<Plane> planes;                  // in sector order
    std::vector<double> sigmas;                 // RMS residual per plane
    std::vector<std::size_t> ring_pixels_per_plane;
};

namespace detail {

struct PlaneFit {
    Plane plane;
    double sigma = 0.0;
    bool ok = false;
};

inline PlaneFit fit_plane(const std::vector<double>& xs, const std::vector<double>& ys,
                          const std::vector<double>& zs) {
    PlaneFit r;
    std::size_t n = xs.size();
    if (n < 3) return r;
    double mx = 0, my = 0, mz = 0;
    for (std::size_t i = 0; i < n; ++i) { mx += xs[i]; my += ys[i]; mz += zs[i]; }
    mx /= n; my /= n; mz /= n;
    double sxx = 0, sxy = 0, syy = 0, sxz = 0, syz = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = xs[i] - mx, dy = ys[i] - my, dz = zs[i] - mz;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
        sxz += dx * dz;
        syz += dy * dz;
    }
    double det = sxx * syy - sxy * sxy;
    if (det <= 1e-9 * std::max(1.0, (sxx + syy) * (sxx + syy)))
        return r; // collinear support
    r.plane.a = (syy * sxz - sxy * syz) / det;
    r.plane.b = (sxx * syz - sxy * sxz) / det;
    r.plane.c = mz - r.plane.a * mx - r.plane.b * my;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double e = r.plane.eval(xs[i], ys[i]) - zs[i];
        ss += e * e;
    }
    r.sigma = std::sqrt(ss / n);
    r.ok = true;
    return r;
}

} // namespace detail

/// Centroid of the mask's pixel centers.
inline Point mask_centroid(const MaskRaster& mask) {
    if (mask.count() == 0) fail("EmptyMask", "centroid of empty mask");
    double sx = 0, sy = 0;
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.get(x, y)) { sx += x + 0.5; sy += y + 0.5; }
    return {sx / mask.count(), sy / mask.count()};
}

/// Up to K least-squares planes fit to teacher depth on the ring, one per
/// contiguous angular sector about the ROI centroid; degenerate sectors are
/// merged clockwise into their neighbor.
inline PlaneMixture fit_plane_mixture(const ZNormalized& z_t, const MaskRaster& roi,
                                      const MaskRaster& base_ring, int k_planes) {
    if (base_ring.count() == 0) fail("RingEmpty", "empty ring");
    if (k_planes < 1) fail("SpecError", "K must be >= 1");
    Point c = mask_centroid(roi);
    int k = k_planes;
    std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(k));
    for (int y = 0; y < base_ring.height(); ++y)
        for (int x = 0; x < base_ring.width(); ++x) {
            if (!base_ring.get(x, y)) continue;
            std::size_t i = z_t.index(x, y);
            if (!z_t.valid(i)) continue;
            double theta = std::atan2(y + 0.5 - c.y, x + 0.5 - c.x);
            int s = std::min(k - 1, static_cast<int>((theta + 3.14159265358979323846) /
                                                     (2.0 * 3.14159265358979323846) * k));
            groups[static_cast<std::size_t>(std::max(0, s))].push_back(i);
        }

    auto group_fit = [&](const std::vector<std::size_t>& g) {
        std::vector<double> xs, ys, zs;
        xs.reserve(g.size());
        ys.reserve(g.size());
        zs.reserve(g.size());
        for (std::size_t i : g) {
            xs.push_back(static_cast<double>(i % z_t.width) + 0.5);
            ys.push_back(static_cast<double>(i / z_t.width) + 0.5);
            zs.push_back(z_t.values[i]);
        }
        return detail::fit_plane(xs, ys, zs);
    };

    // merge degenerate sectors clockwise until every remaining group fits
    for (int pass = 0; pass < k; ++pass) {
        bool merged = false;
        for (int s = 0; s < k; ++s) {
            auto& g = groups[static_cast<std::size_t>(s)];
            if (g.empty()) continue;
            if (!group_fit(g).ok) {
                int t = (s + 1) % k;
                if (t == s) break;
                auto& dst = groups[static_cast<std::size_t>(t)];
                dst.insert(dst.end(), g.begin(), g.end());
                g.clear();
                merged = true;
            }
        }
        if (!merged) break;
    }

    PlaneMixture mix;
    for (int s = 0; s < k; ++s) {
        const auto& g = groups[static_cast<std::size_t>(s)];
        if (g.empty()) continue;
        detail::PlaneFit f = group_fit(g);
        if (!f.ok) continue;
        mix.planes.push_back(f.plane);
        mix.sigmas.push_back(f.sigma);
        mix.ring_pixels_per_plane.push_back(g.size());
    }
    if (mix.planes.empty()) fail("AllSectorsDegenerate", "no sector admits a plane fit");
    return mix;
}

struct MixtureResiduals {
    std::vector<double> ell; // one per plane expert
    double ell_null = 0.0;
};

/// ell_k = mean over the ROI of |z - pi_k|; ell_null = mean of |z - z_T|.
inline MixtureResiduals mixture_residuals(const ZNormalized& z, const ZNormalized& z_t,
                                          const MaskRaster& roi, const PlaneMixture& mix) {
    if (roi.count() == 0) fail("EmptyMask", "empty ROI");
    MixtureResiduals r;
    r.ell.assign(mix.planes.size(), 0.0);
    std::size_t n = 0;
    for (int y = 0; y < roi.height(); ++y)
        for (int x = 0; x < roi.width(); ++x) {
            if (!roi.get(x, y)) continue;
            std::size_t i = z.index(x, y);
            if (!z.valid(i) || !z_t.valid(i)) continue;
            double px = x + 0.5, py = y + 0.5;
            for (std::size_t kk = 0; kk < mix.planes.size(); ++kk)
                r.ell[kk] += std::fabs(z.values[i] - mix.planes[kk].eval(px, py));
            r.ell_null += std::fabs(z.values[i] - z_t.values[i]);
            ++n;
        }
    if (n == 0) fail("EmptyEffectiveRoi", "no valid ROI pixel for residuals");
    for (double& e : r.ell) e /= static_cast<double>(n);
    r.ell_null /= static_cast<double>(n);
    return r;
}

/// Mixture weights, soft targets and the gating regularizer pieces.
struct GatingBundle {
    std::vector<double> w; // K+1, null expert last
    std::vector<double> q; // K+1
    double ce = 0.0;       // -sum q log w
    double entropy = 0.0;  // H(w)
    double anchor = 0.0;   // min_k ell_k over plane experts
    bool null_masked = false;
};

namespace detail {

inline std::vector<double> softmax(const std::vector<double>& logits) {
    double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> e(logits.size());
    double s = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) { e[i] = std::exp(logits[i] - m); s += e[i]; }
    for (double& x : e) x /= s;
    return e;
}

} // namespace detail

/// Targets q from the residual scales (lower sigma => higher weight); weights
/// w from supplied gating logits, or the residual-greedy surrogate
/// softmax(-ell / temperature) when none are given. On positive samples the
/// null expert is masked out of both.
inline GatingBundle gating_targets(const PlaneMixture& mix, const MixtureResiduals& resid,
                                   bool positive, double temperature, double smoothing,
                                   const std::optional<std::vector<double>>& logits = std::nullopt) {
    if (!(temperature > 0.0)) fail("SpecError", "temperature must be > 0");
    if (!(smoothing >= 0.0 && smoothing < 1.0)) fail("SpecError", "smoothing must be in [0,1)");
    std::size_t k = mix.planes.size();
    GatingBundle g;
    g.null_masked = positive;

    if (positive) {
        std::vector<double> neg_sigma(k);
        for (std::size_t i = 0; i < k; ++i) neg_sigma[i] = -mix.sigmas[i] / temperature;
        g.q = detail::softmax(neg_sigma);
        g.q.push_back(0.0);
    } else {
        g.q.assign(k + 1, smoothing / static_cast<double>(k));
        g.q[k] = 1.0 - smoothing;
    }

    if (logits) {
        if (logits->size() != k + 1) fail("SpecError", "gating logits must have K+1 entries");
        g.w = detail::softmax(*logits);
    } else {
        std::vector<double> neg_ell(k + 1);
        for (std::size_t i = 0; i < k; ++i) neg_ell[i] = -resid.ell[i] / temperature;
        neg_ell[k] = -resid.ell_null / temperature;
        g.w = detail::softmax(neg_ell);
    }
    if (positive) {
        g.w[k] = 0.0;
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) s += g.w[i];
        if (s <= 0.0) fail("SpecError", "gating weights collapsed to the null expert");
        for (std::size_t i = 0; i < k; ++i) g.w[i] /= s;
    }

    for (std::size_t i = 0; i <= k; ++i) {
        g.ce -= g.q[i] * std::log(std::max(g.w[i], 1e-12));
        if (g.w[i] > 0.0) g.entropy -= g.w[i] * std::log(g.w[i]);
    }
    g.anchor = *std::min_element(resid.ell.begin(), resid.ell.end());
    return g;
}

struct HkrTerms {
    double hkr_flat = 0.0;    // mean |L(z)| over the ROI
    double hkr_mixture = 0.0; // sum_k w_k ell_k + w_null ell_null
    double hkr = 0.0;
};

inline HkrTerms hkr_loss(const ZNormalized& z, const MaskRaster& roi, const GatingBundle& gate,
                         const MixtureResiduals& resid, double alpha1, double alpha2) {
    if (alpha1 < 0.0 || alpha2 < 0.0) fail("SpecError", "weights must be >= 0");
    LaplacianField lap = laplacian_of(z);
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < lap.magnitude.size(); ++i)
        if (roi.get(i) && lap.valid(i)) { s += lap.magnitude[i]; ++n; }
    HkrTerms t;
    t.hkr_flat = n ? s / static_cast<double>(n) : 0.0;
    std::size_t k = resid.ell.size();
    for (std::size_t i = 0; i < k; ++i) t.hkr_mixture += gate.w[i] * resid.ell[i];
    t.hkr_mixture += gate.w[k] * resid.ell_null;
    t.hkr = alpha1 * t.hkr_flat + alpha2 * t.hkr_mixture;
    return t;
}

struct NkpTerms {
    double t3 = 0.0, t4 = 0.0, t5 = 0.0, t6 = 0.0, t7 = 0.0;
    double nkp = 0.0;
    std::vector<std::string> empty_masks; // warning flags
};

struct NkpWeights {
    double alpha3 = 1.0, alpha4 = 0.5, alpha5 = 0.3, alpha6 = 0.8, alpha7 = 0.3;
};

/// Background/ring preservation terms. The seam term compares the
/// ring-smoothed student against the ring-smoothed teacher, so
/// student == teacher is an exact zero of every term.
inline NkpTerms nkp_loss(const ZNormalized& z, const ZNormalized& z_t, const RingMasks& rings,
                         int smooth_radius, const NkpWeights& w) {
    if (w.alpha3 < 0 || w.alpha4 < 0 || w.alpha5 < 0 || w.alpha6 < 0 || w.alpha7 < 0)
        fail("SpecError", "weights must be >= 0");
    NkpTerms t;
    LaplacianField lap_z = laplacian_of(z);
    LaplacianField lap_t = laplacian_of(z_t);

    auto masked_mean_abs_diff = [&](const std::vector<double>& a, const std::vector<double>& b,
                                    const MaskRaster& mask, const std::vector<std::uint8_t>* req,
                                    const char* name, double& dst) {
        double s = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!mask.get(i)) continue;
            if (req && !(*req)[i]) continue;
            if (!z.valid(i) || !z_t.valid(i)) continue;
            s += std::fabs(a[i] - b[i]);
            ++n;
        }
        if (n == 0) {
            t.empty_masks.push_back(name);
            dst = 0.0;
        } else {
            dst = s / static_cast<double>(n);
        }
    };

    std::vector<std::uint8_t> lap_ok(lap_z.validity.size());
    for (std::size_t i = 0; i < lap_ok.size(); ++i)
        lap_ok[i] = lap_z.validity[i] && lap_t.validity[i];

    masked_mean_abs_diff(z.values, z_t.values, rings.m_bg, nullptr, "m_bg", t.t3);
    masked_mean_abs_diff(lap_z.magnitude, lap_t.magnitude, rings.m_bg, &lap_ok, "m_bg_lap", t.t4);
    if (rings.r_f.count() > 0) {
        std::vector<double> sz = ring_local_smooth(z, rings.r_f, smooth_radius);
        std::vector<double> st = ring_local_smooth(z_t, rings.r_f, smooth_radius);
        masked_mean_abs_diff(sz, st, rings.r_f, nullptr, "r_f", t.t5);
    } else {
        t.empty_masks.push_back("r_f");
    }
    masked_mean_abs_diff(lap_z.magnitude, lap_t.magnitude, rings.r_e, &lap_ok, "r_e", t.t6);
    masked_mean_abs_diff(lap_z.magnitude, lap_t.magnitude, rings.r_g, &lap_ok, "r_g", t.t7);

    t.nkp = w.alpha3 * t.t3 + w.alpha4 * t.t4 + w.alpha5 * t.t5 + w.alpha6 * t.t6 + w.alpha7 * t.t7;
    return t;
}

/// Every itemized term for one branch (crop or full).
struct BranchTerms {
    HkrTerms hkr;
    NkpTerms nkp;
    GatingBundle gate;
    MixtureResiduals resid;
    PlaneMixture mixture;
    double gating_reg = 0.0;
    double total = 0.0;
    double mu_b = 0.0, sigma_b = 0.0;
};

/// All loss terms for a (student, teacher) pair in one view. Invalid pixels
/// (e.g. outside a mapped crop's footprint) are skipped by every mean, so the
/// crop branch can pass fields mapped into the full frame directly.
inline BranchTerms evaluate_branch(const DepthMap& student, const DepthMap& teacher,
                                   const MaskRaster& roi, bool positive, const LossConfig& cfg,
                                   const std::optional<std::vector<double>>& logits = std::nullopt) {
    if (student.width != teacher.width || student.height != teacher.height ||
        roi.width() != student.width || roi.height() != student.height)
        fail("SpecError", "branch inputs must share a frame");

    // Ring geometry. r_e needs |L(z_T)|, but the top-decile selection is
    // invariant to the affine z-normalization, so the raw teacher works.
    NormalizedField raw_t;
    raw_t.width = teacher.width;
    raw_t.height = teacher.height;
    raw_t.values = teacher.values;
    raw_t.validity = teacher.validity;
    LaplacianField lap_teacher = laplacian_magnitude(raw_t);
    RingMasks rings = build_ring_masks(roi, lap_teacher, cfg.ring_width, cfg.guard_width);

    ZNormalized z_t = z_normalize(teacher, rings.m_bg);
    ZNormalized z = z_normalize(student, rings.m_bg, &teacher);

    BranchTerms b;
    b.mu_b = z_t.mu_b;
    b.sigma_b = z_t.sigma_b;
    b.mixture = fit_plane_mixture(z_t, roi, rings.base_ring, cfg.k);
    b.resid = mixture_residuals(z, z_t, roi, b.mixture);
    b.gate = gating_targets(b.mixture, b.resid, positive, cfg.temperature, cfg.smoothing, logits);
    b.hkr = hkr_loss(z, roi, b.gate, b.resid, cfg.alpha1, cfg.alpha2);
    NkpWeights nw{cfg.alpha3, cfg.alpha4, cfg.alpha5, cfg.alpha6, cfg.alpha7};
    b.nkp = nkp_loss(z, z_t, rings, cfg.smooth_radius, nw);
    b.gating_reg = cfg.beta_ce * b.gate.ce + cfg.beta_h * b.gate.entropy +
                   cfg.beta_anchor * b.gate.anchor;
    b.total = b.hkr.hkr + b.nkp.nkp + b.gating_reg;
    return b;
}

/// Branch-combined objective: L = L_crop + lambda_F * L_full.
struct LossBreakdown {
    BranchTerms crop;
    BranchTerms full;
    bool has_crop = false;
    double lambda_f = 0.5;
    double total = 0.0;
};

inline LossBreakdown total_loss(const std::optional<BranchTerms>& crop_branch,
                                const BranchTerms& full_branch, double lambda_f) {
    if (lambda_f < 0.0) fail("SpecError", "lambda_f must be >= 0");
    LossBreakdown lb;
    lb.full = full_branch;
    lb.lambda_f = lambda_f;
    if (crop_branch) {
        lb.crop = *crop_branch;
        lb.has_crop = true;
        lb.total = lb.crop.total + lambda_f * lb.full.total;
    } else {
        // no crop view: the full branch stands alone
        lb.total = lb.full.total;
    }
    return lb;
}

} // namespace mirage

#endif
