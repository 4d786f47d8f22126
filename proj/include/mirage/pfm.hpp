#ifndef MIRAGE_PFM_HPP
#define MIRAGE_PFM_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mirage/depth_map.hpp"
#include "mirage/error.hpp"

namespace mirage {

// PFM (portable float map), grayscale "Pf" only. Header: magic, width height,
// scale line whose sign encodes endianness (negative = little-endian). Rows
// are stored bottom-to-top on disk; in memory we keep top-to-bottom.

namespace detail {

inline bool host_little_endian() {
    return std::endian::native == std::endian::little;
}

inline void byteswap4(unsigned char* p) {
    std::swap(p[0], p[3]);
    std::swap(p[1], p[2]);
}

} // namespace detail

inline DepthMap load_pfm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("IoError", "cannot open " + path.string());
    std::string magic;
    in >> magic;
    if (magic == "PF") fail("UnsupportedFormat", "color PFM not supported: " + path.string());
    if (magic != "Pf") fail("UnsupportedFormat", "not a PFM file: " + path.string());
    int w = 0, h = 0;
    double scale = 0.0;
    in >> w >> h >> scale;
    if (!in || w <= 0 || h <= 0 || scale == 0.0)
        fail("CorruptFile", "bad PFM header in " + path.string());
    in.get(); // single whitespace byte separating header from raster
    bool file_little = scale < 0.0;
    std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<unsigned char> raw(n * 4);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        fail("CorruptFile", "truncated PFM raster in " + path.string());
    if (file_little != detail::host_little_endian())
        for (std::size_t i = 0; i < n; ++i) detail::byteswap4(raw.data() + i * 4);

    DepthMap d(w, h);
    d.validity.assign(n, 1);
    bool any_valid = false;
    for (int y = 0; y < h; ++y) {
        int src_row = h - 1 - y; // bottom-to-top on disk
        for (int x = 0; x < w; ++x) {
            float f;
            std::memcpy(&f, raw.data() + (static_cast<std::size_t>(src_row) * w + x) * 4, 4);
            std::size_t i = d.index(x, y);
            d.values[i] = f;
            if (std::isfinite(f)) any_valid = true;
            else d.validity[i] = 0;
        }
    }
    if (!any_valid) fail("AllInvalid", "no finite value in " + path.string());
    return d;
}

/// Writes grayscale PFM in host endianness. `force_big_endian` exists for
/// tests that need both byte orders of the same grid.
inline void save_pfm(const DepthMap& d, const std::filesystem::path& path,
                     bool force_big_endian = false) {
    if (d.width <= 0 || d.height <= 0) fail("SpecError", "empty depth map");
    bool little = detail::host_little_endian() && !force_big_endian;
    std::ostringstream header;
    header << "Pf\n" << d.width << " " << d.height << "\n" << (little ? "-1.0" : "1.0") << "\n";
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("IoError", "cannot write " + path.string());
    out << header.str();
    std::vector<unsigned char> raw(static_cast<std::size_t>(d.width) * d.height * 4);
    for (int y = 0; y < d.height; ++y) {
        int dst_row = d.height - 1 - y;
        for (int x = 0; x < d.width; ++x) {
            float f = static_cast<float>(d.values[d.index(x, y)]);
            if (!d.validity.empty() && !d.validity[d.index(x, y)])
                f = std::numeric_limits<float>::quiet_NaN();
            unsigned char* p = raw.data() + (static_cast<std::size_t>(dst_row) * d.width + x) * 4;
            std::memcpy(p, &f, 4);
            if (little != detail::host_little_endian()) detail::byteswap4(p);
        }
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) fail("IoError", "short write to " + path.string());
}

} // namespace mirage

#endif
