#ifndef MIRAGE_MANIFEST_HPP
#define MIRAGE_MANIFEST_HPP

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "mirage/depth_map.hpp"
#include "mirage/error.hpp"
#include "mirage/geometry.hpp"
#include "mirage/pfm.hpp"
#include "mirage/png16.hpp"

namespace mirage {

/// Where a model role finds its depth files. Paths are manifest-relative.
struct DepthBinding {
    std::string full;                         // full-view depth file
    std::map<std::string, std::string> crops; // crop id -> depth file
    std::optional<double> png_scale;
    std::optional<double> png_offset;
};

struct SampleRecord {
    std::string id;
    int width = 0;
    int height = 0;
    std::vector<RoiShape> rois;
    std::vector<CropRect> crops;
    std::map<std::string, DepthBinding> depth; // role -> binding
    bool negative = false;
};

struct BenchmarkManifest {
    int version = 1;
    std::vector<SampleRecord> samples;
    std::filesystem::path base_dir; // directory the manifest was loaded from

    const SampleRecord* find(const std::string& id) const {
        for (const auto& s : samples)
            if (s.id == id) return &s;
        return nullptr;
    }
};

namespace detail {

using nlohmann::json;

inline const json& require(const json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) fail("SchemaError", where + ": missing field '" + key + "'");
    return *it;
}

inline Polygon parse_polygon(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() < 3)
        fail("SchemaError", where + ": polygon needs >= 3 vertices");
    Polygon p;
    for (const auto& v : j) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            fail("SchemaError", where + ": vertex must be [x,y]");
        p.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    return p;
}

inline json polygon_to_json(const Polygon& p) {
    json j = json::array();
    for (const Point& v : p) j.push_back(json::array({v.x, v.y}));
    return j;
}

} // namespace detail

inline BenchmarkManifest parse_manifest(const nlohmann::json& root,
                                        const std::filesystem::path& base_dir) {
    using detail::require;
    BenchmarkManifest m;
    m.base_dir = base_dir;
    if (!root.is_object()) fail("SchemaError", "manifest root must be an object");
    m.version = require(root, "version", "manifest").get<int>();
    const auto& samples = require(root, "samples", "manifest");
    if (!samples.is_array()) fail("SchemaError", "manifest.samples must be an array");

    std::set<std::string> seen_ids;
    for (std::size_t si = 0; si < samples.size(); ++si) {
        const auto& js = samples[si];
        std::string where = "samples[" + std::to_string(si) + "]";
        SampleRecord s;
        s.id = require(js, "id", where).get<std::string>();
        if (!seen_ids.insert(s.id).second)
            fail("DuplicateSampleId", "sample id '" + s.id + "' appears twice");
        s.width = require(js, "width", where).get<int>();
        s.height = require(js, "height", where).get<int>();
        if (s.width <= 0 || s.height <= 0)
            fail("SchemaError", where + ": non-positive dimensions");
        s.negative = js.value("negative", false);

        if (js.contains("rois")) {
            for (const auto& jr : js["rois"]) {
                RoiShape shape;
                shape.outer = detail::parse_polygon(detail::require(jr, "polygon", where + ".rois"),
                                                    where + ".rois.polygon");
                if (jr.contains("exclusions"))
                    for (const auto& je : jr["exclusions"])
                        shape.exclusions.push_back(detail::parse_polygon(je, where + ".rois.exclusions"));
                validate_roi_shape(shape);
                s.rois.push_back(std::move(shape));
            }
        }
        if (s.rois.empty() && !s.negative)
            fail("SchemaError", where + ": positive sample needs at least one ROI");

        std::set<std::string> crop_ids;
        if (js.contains("crops")) {
            for (const auto& jc : js["crops"]) {
                CropRect r;
                r.id = detail::require(jc, "id", where + ".crops").get<std::string>();
                const auto& rect = detail::require(jc, "rect", where + ".crops");
                if (!rect.is_array() || rect.size() != 4)
                    fail("SchemaError", where + ".crops: rect must be [x0,y0,x1,y1]");
                r.x0 = rect[0].get<int>();
                r.y0 = rect[1].get<int>();
                r.x1 = rect[2].get<int>();
                r.y1 = rect[3].get<int>();
                r.seed = jc.value("seed", 0ULL);
                r.validate(s.width, s.height);
                if (!crop_ids.insert(r.id).second)
                    fail("SchemaError", where + ": duplicate crop id '" + r.id + "'");
                s.crops.push_back(std::move(r));
            }
        }

        if (js.contains("depth")) {
            const auto& jd = js["depth"];
            if (!jd.is_object()) fail("SchemaError", where + ".depth must be an object");
            for (auto it = jd.begin(); it != jd.end(); ++it) {
                DepthBinding b;
                const auto& jb = it.value();
                if (jb.contains("full")) b.full = jb["full"].get<std::string>();
                if (jb.contains("crops"))
                    for (auto cit = jb["crops"].begin(); cit != jb["crops"].end(); ++cit) {
                        if (!crop_ids.count(cit.key()))
                            fail("DanglingCropRef", "(" + s.id + "," + cit.key() + ")");
                        b.crops[cit.key()] = cit.value().get<std::string>();
                    }
                if (jb.contains("png_scale")) b.png_scale = jb["png_scale"].get<double>();
                if (jb.contains("png_offset")) b.png_offset = jb["png_offset"].get<double>();
                s.depth[it.key()] = std::move(b);
            }
        }
        m.samples.push_back(std::move(s));
    }
    return m;
}

inline BenchmarkManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("IoError", "cannot open " + path.string());
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& e) {
        fail("SchemaError", path.string() + ": " + e.what());
    }
    return parse_manifest(root, path.parent_path());
}

inline nlohmann::json manifest_to_json(const BenchmarkManifest& m) {
    using nlohmann::json;
    json root;
    root["version"] = m.version;
    root["samples"] = json::array();
    for (const auto& s : m.samples) {
        json js;
        js["id"] = s.id;
        js["width"] = s.width;
        js["height"] = s.height;
        js["negative"] = s.negative;
        js["rois"] = json::array();
        for (const auto& r : s.rois) {
            json jr;
            jr["polygon"] = detail::polygon_to_json(r.outer);
            jr["exclusions"] = json::array();
            for (const auto& e : r.exclusions) jr["exclusions"].push_back(detail::polygon_to_json(e));
            js["rois"].push_back(jr);
        }
        js["crops"] = json::array();
        for (const auto& c : s.crops) {
            json jc;
            jc["id"] = c.id;
            jc["rect"] = json::array({c.x0, c.y0, c.x1, c.y1});
            jc["seed"] = c.seed;
            js["crops"].push_back(jc);
        }
        json jd = json::object();
        for (const auto& [role, b] : s.depth) {
            json jb;
            if (!b.full.empty()) jb["full"] = b.full;
            json jcrops = json::object();
            for (const auto& [cid, p] : b.crops) jcrops[cid] = p;
            jb["crops"] = jcrops;
            if (b.png_scale) jb["png_scale"] = *b.png_scale;
            if (b.png_offset) jb["png_offset"] = *b.png_offset;
            jd[role] = jb;
        }
        js["depth"] = jd;
        root["samples"].push_back(js);
    }
    return root;
}

inline void save_manifest(const BenchmarkManifest& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("IoError", "cannot write " + path.string());
    out << manifest_to_json(m).dump(2) << "\n";
}

/// Loads a depth file referenced by a binding; format is chosen by extension.
inline DepthMap load_depth(const std::filesystem::path& path,
                           const DepthBinding* binding = nullptr) {
    std::string ext = path.extension().string();
    if (ext == ".pfm" || ext == ".PFM") return load_pfm(path);
    if (ext == ".png" || ext == ".PNG") {
        double scale = binding && binding->png_scale ? *binding->png_scale : 1.0;
        double offset = binding && binding->png_offset ? *binding->png_offset : 0.0;
        return load_depth_png16(path, scale, offset);
    }
    fail("UnsupportedFormat", "unknown depth format: " + path.string());
}

inline DepthMap load_role_full(const BenchmarkManifest& m, const SampleRecord& s,
                               const std::string& role) {
    auto it = s.depth.find(role);
    if (it == s.depth.end() || it->second.full.empty())
        fail("SchemaError", "sample '" + s.id + "' has no full depth for role '" + role + "'");
    return load_depth(m.base_dir / it->second.full, &it->second);
}

inline DepthMap load_role_crop(const BenchmarkManifest& m, const SampleRecord& s,
                               const std::string& role, const std::string& crop_id) {
    auto it = s.depth.find(role);
    if (it == s.depth.end())
        fail("SchemaError", "sample '" + s.id + "' has no depth for role '" + role + "'");
    auto cit = it->second.crops.find(crop_id);
    if (cit == it->second.crops.end())
        fail("SchemaError", "sample '" + s.id + "' role '" + role + "' has no crop '" + crop_id + "'");
    return load_depth(m.base_dir / cit->second, &it->second);
}

} // namespace mirage

#endif
