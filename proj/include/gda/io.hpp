#pragma once

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gda/core.hpp"

namespace gda {

namespace fs = std::filesystem;

/// Writes an 8-bit grayscale or RGB PNG.
inline void write_png(const fs::path& path, const Image& img) {
    png_image out{};
    out.version = PNG_IMAGE_VERSION;
    out.width = static_cast<png_uint_32>(img.width);
    out.height = static_cast<png_uint_32>(img.height);
    out.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    std::vector<png_byte> bytes(img.data.size());
    for (std::size_t i = 0; i < bytes.size(); ++i)
        bytes[i] = static_cast<png_byte>(std::lround(std::clamp(img.data[i], 0.0f, 1.0f) * 255.0f));
    if (!png_image_write_to_file(&out, path.c_str(), 0, bytes.data(), 0, nullptr))
        throw Error("failed to write PNG " + path.string() + ": " + out.message);
}

/// Reads a PNG as grayscale (1 channel) or RGB (3 channels), matching the
/// file's colour type; alpha is dropped.
inline Image read_png(const fs::path& path) {
    png_image in{};
    in.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&in, path.c_str()))
        throw Error("failed to read PNG " + path.string() + ": " + in.message);
    const bool gray = (in.format & PNG_FORMAT_FLAG_COLOR) == 0;
    in.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    std::vector<png_byte> bytes(PNG_IMAGE_SIZE(in));
    if (!png_image_finish_read(&in, nullptr, bytes.data(), 0, nullptr)) {
        png_image_free(&in);
        throw Error("failed to decode PNG " + path.string() + ": " + in.message);
    }
    Image img(static_cast<int>(in.height), static_cast<int>(in.width), gray ? 1 : 3);
    for (std::size_t i = 0; i < bytes.size(); ++i) img.data[i] = static_cast<float>(bytes[i]) / 255.0f;
    return img;
}

// ---------------------------------------------------------------------------
// Manifest CSV: path,class_label,domain_label,class_visible,domain_visible

inline constexpr const char* kManifestHeader = "path,class_label,domain_label,class_visible,domain_visible";

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

inline bool parse_flag(const std::string& s, std::size_t line_no) {
    if (s == "0") return false;
    if (s == "1") return true;
    throw Error("manifest line " + std::to_string(line_no) + ": visibility flag must be 0 or 1, got '" + s + "'");
}

inline int parse_int(const std::string& s, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size() || v < 0) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error("manifest line " + std::to_string(line_no) + ": expected a non-negative integer, got '" + s + "'");
    }
}

}  // namespace detail

/// Writes images under `dir/images/` and the manifest at `dir/manifest.csv`
/// (or `manifest_name`). Returns the manifest path.
inline fs::path write_dataset(const GdaDataset& dataset, const fs::path& dir, const std::string& manifest_name = "manifest.csv") {
    fs::create_directories(dir / "images");
    const fs::path manifest = dir / manifest_name;
    std::ofstream os(manifest);
    if (!os) throw Error("cannot write manifest " + manifest.string());
    os << kManifestHeader << '\n';
    char name[64];
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& s = dataset[i];
        std::snprintf(name, sizeof(name), "images/%06zu_d%d_c%d.png", i, s.domain_label, s.class_label);
        write_png(dir / name, s.image);
        os << name << ',' << s.class_label << ',' << s.domain_label << ',' << (s.class_visible ? 1 : 0) << ','
           << (s.domain_visible ? 1 : 0) << '\n';
    }
    return manifest;
}

/// Writes only a manifest that references image paths already relative to
/// the manifest's directory.
inline void write_manifest(const fs::path& manifest, const GdaDataset& dataset, const std::vector<std::string>& paths) {
    if (paths.size() != dataset.size()) throw Error("write_manifest: path count mismatch");
    std::ofstream os(manifest);
    if (!os) throw Error("cannot write manifest " + manifest.string());
    os << kManifestHeader << '\n';
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& s = dataset[i];
        os << paths[i] << ',' << s.class_label << ',' << s.domain_label << ',' << (s.class_visible ? 1 : 0) << ','
           << (s.domain_visible ? 1 : 0) << '\n';
    }
}

struct LoadedManifest {
    GdaDataset dataset;
    std::vector<std::string> paths;  // as written in the manifest
};

inline LoadedManifest read_manifest(const fs::path& manifest) {
    std::ifstream is(manifest);
    if (!is) throw Error("cannot open manifest " + manifest.string());
    std::string line;
    if (!std::getline(is, line)) throw Error("manifest " + manifest.string() + " is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kManifestHeader) throw Error("manifest header must be '" + std::string(kManifestHeader) + "'");
    const fs::path base = manifest.parent_path();
    LoadedManifest out;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 5) throw Error("manifest line " + std::to_string(line_no) + ": expected 5 fields");
        Sample s;
        s.image = read_png(base / f[0]);
        s.class_label = detail::parse_int(f[1], line_no);
        s.domain_label = detail::parse_int(f[2], line_no);
        s.class_visible = detail::parse_flag(f[3], line_no);
        s.domain_visible = detail::parse_flag(f[4], line_no);
        out.paths.push_back(f[0]);
        out.dataset.push_back(std::move(s));
    }
    if (out.dataset.empty()) throw Error("manifest " + manifest.string() + " has no samples");
    return out;
}

/// `sample_index,cluster` CSV for estimated domains.
inline void write_assignments_csv(const fs::path& path, const std::vector<int>& assignments) {
    std::ofstream os(path);
    if (!os) throw Error("cannot write " + path.string());
    os << "sample_index,cluster\n";
    for (std::size_t i = 0; i < assignments.size(); ++i) os << i << ',' << assignments[i] << '\n';
}

inline std::vector<int> read_assignments_csv(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open " + path.string());
    std::string line;
    std::getline(is, line);
    if (line.rfind("sample_index,cluster", 0) != 0) throw Error(path.string() + ": expected header sample_index,cluster");
    std::vector<int> out;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 2) throw Error(path.string() + ": malformed line " + std::to_string(line_no));
        const auto idx = static_cast<std::size_t>(detail::parse_int(f[0], line_no));
        if (idx != out.size()) throw Error(path.string() + ": sample indices must be consecutive from 0");
        out.push_back(detail::parse_int(f[1], line_no));
    }
    return out;
}

}  // namespace gda
