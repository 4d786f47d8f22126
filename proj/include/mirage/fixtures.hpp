#ifndef MIRAGE_FIXTURES_HPP
#define MIRAGE_FIXTURES_HPP

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mirage/depth_map.hpp"
#include "mirage/error.hpp"
#include "mirage/geometry.hpp"
#include "mirage/loss.hpp"
#include "mirage/manifest.hpp"
#include "mirage/pfm.hpp"
#include "mirage/rng.hpp"

namespace mirage {

enum class Preset { Planar, Bump, CropOnlyBump, PiecewisePlanes, Noise };
enum class Edit { None, FlattenRoi, FlattenEverywhere, OffsetBg };

inline Preset preset_from_string(const std::string& s) {
    if (s == "planar") return Preset::Planar;
    if (s == "bump") return Preset::Bump;
    if (s == "crop_only_bump") return Preset::CropOnlyBump;
    if (s == "piecewise_planes") return Preset::PiecewisePlanes;
    if (s == "noise") return Preset::Noise;
    fail("SpecError", "unknown preset '" + s + "'");
}

inline Edit edit_from_string(const std::string& s) {
    if (s == "none") return Edit::None;
    if (s == "flatten_roi") return Edit::FlattenRoi;
    if (s == "flatten_everywhere") return Edit::FlattenEverywhere;
    if (s == "offset_bg") return Edit::OffsetBg;
    fail("SpecError", "unknown edit '" + s + "'");
}

struct FixtureSpec {
    Preset preset = Preset::Planar;
    int width = 128;
    int height = 128;
    int samples = 1;
    int crops_per_sample = 4;     // used by the planar preset
    double min_diag_frac = 0.4;
    double bump_amp = 0.1;
    double bump_sigma = 0.0;      // 0 = auto (1/14 of the ROI bbox short side)
    double noise_sigma = 0.05;
    double offset_delta = 0.2;
    Edit edit = Edit::None;
    std::uint64_t seed = 0;
    int ring_width = 8;
    int guard_width = 4;

    void validate() const {
        if (width < 32 || height < 32) fail("SpecError", "fixture frame must be at least 32x32");
        if (samples < 1) fail("SpecError", "samples must be >= 1");
        if (bump_amp < 0.0 || noise_sigma < 0.0) fail("SpecError", "amplitudes must be >= 0");
        if ((preset == Preset::Noise) && noise_sigma <= 0.0)
            fail("SpecError", "noise preset needs noise_sigma > 0");
    }
};

struct Scene {
    DepthMap full;
    std::map<std::string, DepthMap> crops; // crop id -> crop-resolution grid
    RoiShape roi;
    std::vector<CropRect> crop_rects;
};

namespace detail {

/// Crop view at native rect resolution; pixel centers align exactly with the
/// full grid so no interpolation is involved.
inline DepthMap extract(const DepthMap& full, const CropRect& r) {
    DepthMap out(r.width(), r.height());
    for (int y = 0; y < r.height(); ++y)
        for (int x = 0; x < r.width(); ++x)
            out.at(x, y) = full.at(r.x0 + x, r.y0 + y);
    return out;
}

inline RoiShape centered_square_roi(int w, int h) {
    double x0 = w * 0.25, x1 = w * 0.75;
    double y0 = h * 0.25, y1 = h * 0.75;
    RoiShape s;
    s.outer = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
    return s;
}

inline CropRect full_frame_rect(int w, int h, const std::string& id) {
    CropRect r;
    r.x0 = 0;
    r.y0 = 0;
    r.x1 = w;
    r.y1 = h;
    r.id = id;
    return r;
}

struct PlaneParams {
    double a, b, c;
};

// Coefficients are dyadic (multiples of 2^-10) so plane values survive the
// float32 PFM round trip bit-exactly; planar fixtures then score a true zero.
inline PlaneParams sample_plane(CounterRng& rng) {
    return {static_cast<double>(rng.next_int(2, 6)) / 1024.0,
            static_cast<double>(rng.next_int(2, 6)) / 1024.0,
            static_cast<double>(rng.next_int(1024, 3072)) / 1024.0};
}

inline DepthMap render_plane(int w, int h, const PlaneParams& p) {
    DepthMap d(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            d.at(x, y) = p.a * (x + 0.5) + p.b * (y + 0.5) + p.c;
    return d;
}

inline void add_bump(DepthMap& d, double cx, double cy, double amp, double sigma) {
    for (int y = 0; y < d.height; ++y)
        for (int x = 0; x < d.width; ++x) {
            double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
            d.at(x, y) += amp * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
        }
}

} // namespace detail

/// Deterministic synthetic scene for one sample index; pure in (spec, index).
inline Scene make_scene(const FixtureSpec& spec, int sample_index) {
    spec.validate();
    Scene sc;
    sc.roi = detail::centered_square_roi(spec.width, spec.height);
    CounterRng rng(spec.seed, 0x5CE0E000ULL + static_cast<std::uint64_t>(sample_index));
    detail::PlaneParams plane = detail::sample_plane(rng);
    DepthMap base = detail::render_plane(spec.width, spec.height, plane);

    double cx = spec.width * 0.5, cy = spec.height * 0.5;
    double sigma = spec.bump_sigma > 0.0 ? spec.bump_sigma
                                         : std::min(spec.width, spec.height) * 0.5 / 14.0;

    switch (spec.preset) {
        case Preset::Planar: {
            sc.full = base;
            sc.crop_rects = generate_crops(sc.roi, spec.width, spec.height, spec.crops_per_sample,
                                           spec.min_diag_frac,
                                           spec.seed + static_cast<std::uint64_t>(sample_index));
            for (const CropRect& r : sc.crop_rects) sc.crops[r.id] = detail::extract(sc.full, r);
            break;
        }
        case Preset::Bump: {
            sc.full = base;
            detail::add_bump(sc.full, cx, cy, spec.bump_amp, sigma);
            sc.crop_rects = {detail::full_frame_rect(spec.width, spec.height, "c0")};
            sc.crops["c0"] = detail::extract(sc.full, sc.crop_rects[0]);
            break;
        }
        case Preset::CropOnlyBump: {
            sc.full = base; // the mirage appears only when context is removed
            DepthMap crop_view = base;
            detail::add_bump(crop_view, cx, cy, spec.bump_amp, sigma);
            sc.crop_rects = {detail::full_frame_rect(spec.width, spec.height, "c0")};
            sc.crops["c0"] = detail::extract(crop_view, sc.crop_rects[0]);
            break;
        }
        case Preset::PiecewisePlanes: {
            // two planes meeting on the horizontal line through the ROI center:
            // the slope in y changes sign at cy, values stay continuous
            sc.full = base;
            double delta = 0.0078125; // 2^-7, keeps values dyadic
            for (int y = 0; y < spec.height; ++y)
                for (int x = 0; x < spec.width; ++x) {
                    double yy = y + 0.5;
                    if (yy > cy) sc.full.at(x, y) += delta * (yy - cy);
                }
            sc.crop_rects = {detail::full_frame_rect(spec.width, spec.height, "c0")};
            sc.crops["c0"] = detail::extract(sc.full, sc.crop_rects[0]);
            break;
        }
        case Preset::Noise: {
            sc.full = base;
            CounterRng noise(spec.seed, 0x4015E000ULL + static_cast<std::uint64_t>(sample_index));
            for (double& v : sc.full.values) v += spec.noise_sigma * noise.next_normal();
            sc.crop_rects = {detail::full_frame_rect(spec.width, spec.height, "c0")};
            sc.crops["c0"] = detail::extract(sc.full, sc.crop_rects[0]);
            break;
        }
    }
    return sc;
}

/// Teacher/student pair for the loss oracles. The teacher is the scene depth
/// rescaled so its background standard deviation is exactly 1; the student is
/// the teacher transformed by the requested edit.
inline std::pair<DepthMap, DepthMap> make_student_teacher(const FixtureSpec& spec,
                                                          int sample_index) {
    Scene sc = make_scene(spec, sample_index);
    MaskRaster roi = rasterize_roi(sc.roi, spec.width, spec.height);

    NormalizedField raw;
    raw.width = sc.full.width;
    raw.height = sc.full.height;
    raw.values = sc.full.values;
    LaplacianField lap = laplacian_magnitude(raw);
    RingMasks rings = build_ring_masks(roi, lap, spec.ring_width, spec.guard_width);

    // rescale so sigma_B == 1 (makes background offsets read out verbatim)
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < sc.full.size(); ++i)
        if (rings.m_bg.get(i)) { sum += sc.full.values[i]; ++n; }
    double mu = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < sc.full.size(); ++i)
        if (rings.m_bg.get(i)) { double d = sc.full.values[i] - mu; ss += d * d; }
    double sigma = std::sqrt(ss / static_cast<double>(n));
    if (sigma < 1e-8) fail("DegenerateBackground", "fixture background is flat");

    DepthMap teacher = sc.full;
    for (double& v : teacher.values) v /= sigma;

    auto ring_plane = [&]() {
        std::vector<double> xs, ys, zs;
        for (int y = 0; y < teacher.height; ++y)
            for (int x = 0; x < teacher.width; ++x)
                if (rings.base_ring.get(x, y)) {
                    xs.push_back(x + 0.5);
                    ys.push_back(y + 0.5);
                    zs.push_back(teacher.at(x, y));
                }
        detail::PlaneFit f = detail::fit_plane(xs, ys, zs);
        if (!f.ok) fail("AllSectorsDegenerate", "fixture ring does not support a plane fit");
        return f.plane;
    };

    DepthMap student = teacher;
    switch (spec.edit) {
        case Edit::None:
            break;
        case Edit::FlattenRoi: {
            Plane p = ring_plane();
            for (int y = 0; y < student.height; ++y)
                for (int x = 0; x < student.width; ++x)
                    if (roi.get(x, y)) student.at(x, y) = p.eval(x + 0.5, y + 0.5);
            break;
        }
        case Edit::FlattenEverywhere: {
            Plane p = ring_plane();
            for (int y = 0; y < student.height; ++y)
                for (int x = 0; x < student.width; ++x)
                    student.at(x, y) = p.eval(x + 0.5, y + 0.5);
            break;
        }
        case Edit::OffsetBg: {
            for (std::size_t i = 0; i < student.size(); ++i)
                if (rings.m_bg.get(i)) student.values[i] += spec.offset_delta;
            break;
        }
    }
    return {teacher, student};
}

/// Writes a complete benchmark tree: manifest.json plus PFM depth files for
/// the roles "pred" (scene views, possibly asymmetric), "teacher" and
/// "student" (loss pair; crop views extracted from the full grids).
inline void write_fixture_tree(const FixtureSpec& spec, const std::filesystem::path& out_dir) {
    spec.validate();
    std::filesystem::create_directories(out_dir / "depth");
    BenchmarkManifest m;
    m.version = 1;
    m.base_dir = out_dir;

    for (int si = 0; si < spec.samples; ++si) {
        Scene sc = make_scene(spec, si);
        auto [teacher, student] = make_student_teacher(spec, si);

        char idbuf[16];
        std::snprintf(idbuf, sizeof(idbuf), "s%04d", si);
        SampleRecord rec;
        rec.id = idbuf;
        rec.width = spec.width;
        rec.height = spec.height;
        rec.rois = {sc.roi};
        rec.crops = sc.crop_rects;

        auto write_role = [&](const std::string& role, const DepthMap& full,
                              const std::map<std::string, DepthMap>* crop_grids) {
            DepthBinding b;
            std::string stem = rec.id + "_" + role;
            b.full = "depth/" + stem + "_full.pfm";
            save_pfm(full, out_dir / b.full);
            for (const CropRect& r : sc.crop_rects) {
                DepthMap cv = crop_grids ? crop_grids->at(r.id) : detail::extract(full, r);
                std::string rel = "depth/" + stem + "_" + r.id + ".pfm";
                save_pfm(cv, out_dir / rel);
                b.crops[r.id] = rel;
            }
            rec.depth[role] = std::move(b);
        };
        write_role("pred", sc.full, &sc.crops);
        write_role("teacher", teacher, nullptr);
        write_role("student", student, nullptr);
        m.samples.push_back(std::move(rec));
    }
    save_manifest(m, out_dir / "manifest.json");
}

} // namespace mirage

#endif
