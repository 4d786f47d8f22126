#ifndef MIRAGE_RESULTS_HPP
#define MIRAGE_RESULTS_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "mirage/error.hpp"

namespace mirage {

inline constexpr const char* kToolkitVersion = "0.1.0";

// Canonical results form: alphabetically ordered keys (nlohmann's default
// std::map container), 2-space indent, shortest round-trip float literals.
// save -> load -> save is byte-identical.

inline std::string canonical_dump(const nlohmann::json& j) {
    return j.dump(2) + "\n";
}

/// Atomic write: temp file in the target directory, then rename.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path dir = path.parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) fail("IoError", "cannot write " + tmp.string());
        out << content;
        if (!out) fail("IoError", "short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) fail("IoError", "rename to " + path.string() + " failed: " + ec.message());
}

inline void save_results(const nlohmann::json& j, const std::filesystem::path& path) {
    write_atomic(path, canonical_dump(j));
}

inline nlohmann::json load_results(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("IoError", "cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail("SchemaError", path.string() + ": " + e.what());
    }
    return j;
}

} // namespace mirage

#endif
