#ifndef MIRAGE_PNG16_HPP
#define MIRAGE_PNG16_HPP

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mirage/depth_map.hpp"
#include "mirage/error.hpp"

namespace mirage {

// Minimal 16-bit grayscale PNG codec (the only PNG flavor the manifest
// accepts; 8-bit depth would quantize away the Laplacian statistics).
// Values map through depth = (sample - offset) * scale.

namespace detail {

inline void put_u32(std::vector<unsigned char>& v, std::uint32_t x) {
    v.push_back(static_cast<unsigned char>(x >> 24));
    v.push_back(static_cast<unsigned char>(x >> 16));
    v.push_back(static_cast<unsigned char>(x >> 8));
    v.push_back(static_cast<unsigned char>(x));
}

inline std::uint32_t get_u32(const unsigned char* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
           (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

inline void write_chunk(std::vector<unsigned char>& out, const char type[4],
                        const unsigned char* data, std::size_t len) {
    put_u32(out, static_cast<std::uint32_t>(len));
    std::size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data, data + len);
    std::uint32_t crc = static_cast<std::uint32_t>(
        crc32(0, out.data() + start, static_cast<uInt>(4 + len)));
    put_u32(out, crc);
}

inline int paeth(int a, int b, int c) {
    int p = a + b - c;
    int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

} // namespace detail

inline void save_png16(const std::vector<std::uint16_t>& samples, int width, int height,
                       const std::filesystem::path& path) {
    if (width <= 0 || height <= 0 || samples.size() != static_cast<std::size_t>(width) * height)
        fail("SpecError", "bad png16 payload");
    // raw scanlines: filter byte 0 + big-endian samples
    std::size_t stride = static_cast<std::size_t>(width) * 2;
    std::vector<unsigned char> raw((stride + 1) * height);
    for (int y = 0; y < height; ++y) {
        unsigned char* row = raw.data() + static_cast<std::size_t>(y) * (stride + 1);
        row[0] = 0;
        for (int x = 0; x < width; ++x) {
            std::uint16_t s = samples[static_cast<std::size_t>(y) * width + x];
            row[1 + 2 * x] = static_cast<unsigned char>(s >> 8);
            row[2 + 2 * x] = static_cast<unsigned char>(s & 0xFF);
        }
    }
    uLongf comp_len = compressBound(static_cast<uLong>(raw.size()));
    std::vector<unsigned char> comp(comp_len);
    if (compress2(comp.data(), &comp_len, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK)
        fail("IoError", "zlib compression failed");
    comp.resize(comp_len);

    std::vector<unsigned char> out;
    static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    out.insert(out.end(), sig, sig + 8);
    unsigned char ihdr[13];
    ihdr[0] = static_cast<unsigned char>(width >> 24);
    ihdr[1] = static_cast<unsigned char>(width >> 16);
    ihdr[2] = static_cast<unsigned char>(width >> 8);
    ihdr[3] = static_cast<unsigned char>(width);
    ihdr[4] = static_cast<unsigned char>(height >> 24);
    ihdr[5] = static_cast<unsigned char>(height >> 16);
    ihdr[6] = static_cast<unsigned char>(height >> 8);
    ihdr[7] = static_cast<unsigned char>(height);
    ihdr[8] = 16; // bit depth
    ihdr[9] = 0;  // grayscale
    ihdr[10] = ihdr[11] = ihdr[12] = 0;
    detail::write_chunk(out, "IHDR", ihdr, 13);
    detail::write_chunk(out, "IDAT", comp.data(), comp.size());
    detail::write_chunk(out, "IEND", nullptr, 0);

    std::ofstream f(path, std::ios::binary);
    if (!f) fail("IoError", "cannot write " + path.string());
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) fail("IoError", "short write to " + path.string());
}

inline std::vector<std::uint16_t> load_png16(const std::filesystem::path& path,
                                             int& width, int& height) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail("IoError", "cannot open " + path.string());
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
    static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    if (buf.size() < 8 || std::memcmp(buf.data(), sig, 8) != 0)
        fail("UnsupportedFormat", "not a PNG file: " + path.string());

    width = height = 0;
    int bit_depth = 0, color_type = -1;
    std::vector<unsigned char> idat;
    std::size_t pos = 8;
    while (pos + 8 <= buf.size()) {
        std::uint32_t len = detail::get_u32(buf.data() + pos);
        if (pos + 12 + len > buf.size()) fail("CorruptFile", "truncated chunk in " + path.string());
        const char* type = reinterpret_cast<const char*>(buf.data() + pos + 4);
        const unsigned char* data = buf.data() + pos + 8;
        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (len != 13) fail("CorruptFile", "bad IHDR in " + path.string());
            width = static_cast<int>(detail::get_u32(data));
            height = static_cast<int>(detail::get_u32(data + 4));
            bit_depth = data[8];
            color_type = data[9];
            if (data[12] != 0) fail("UnsupportedFormat", "interlaced PNG: " + path.string());
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), data, data + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            break;
        }
        pos += 12 + len;
    }
    if (width <= 0 || height <= 0 || idat.empty())
        fail("CorruptFile", "missing IHDR/IDAT in " + path.string());
    if (bit_depth != 16 || color_type != 0)
        fail("UnsupportedFormat", "only 16-bit grayscale PNG accepted: " + path.string());

    std::size_t stride = static_cast<std::size_t>(width) * 2;
    std::vector<unsigned char> raw((stride + 1) * height);
    uLongf raw_len = static_cast<uLongf>(raw.size());
    int rc = uncompress(raw.data(), &raw_len, idat.data(), static_cast<uLong>(idat.size()));
    if (rc != Z_OK || raw_len != raw.size())
        fail("CorruptFile", "bad IDAT stream in " + path.string());

    // undo per-row filters (bytes-per-pixel = 2)
    std::vector<std::uint16_t> out(static_cast<std::size_t>(width) * height);
    std::vector<unsigned char> prev(stride, 0), cur(stride);
    for (int y = 0; y < height; ++y) {
        const unsigned char* row = raw.data() + static_cast<std::size_t>(y) * (stride + 1);
        int filter = row[0];
        for (std::size_t i = 0; i < stride; ++i) {
            int x = row[1 + i];
            int a = i >= 2 ? cur[i - 2] : 0;
            int b = prev[i];
            int c = i >= 2 ? prev[i - 2] : 0;
            switch (filter) {
                case 0: break;
                case 1: x += a; break;
                case 2: x += b; break;
                case 3: x += (a + b) / 2; break;
                case 4: x += detail::paeth(a, b, c); break;
                default: fail("CorruptFile", "unknown PNG filter in " + path.string());
            }
            cur[i] = static_cast<unsigned char>(x & 0xFF);
        }
        for (int px = 0; px < width; ++px)
            out[static_cast<std::size_t>(y) * width + px] =
                static_cast<std::uint16_t>((cur[2 * px] << 8) | cur[2 * px + 1]);
        std::swap(prev, cur);
    }
    return out;
}

/// Decode a 16-bit PNG as depth via (sample - offset) * scale.
inline DepthMap load_depth_png16(const std::filesystem::path& path, double scale, double offset) {
    int w = 0, h = 0;
    std::vector<std::uint16_t> samples = load_png16(path, w, h);
    DepthMap d(w, h);
    for (std::size_t i = 0; i < samples.size(); ++i)
        d.values[i] = (static_cast<double>(samples[i]) - offset) * scale;
    return d;
}

} // namespace mirage

#endif
