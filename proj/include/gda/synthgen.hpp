#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "gda/core.hpp"
#include "gda/rng.hpp"

namespace gda {

/// Global appearance of one domain: pixel = gain_c * (bg + (fg - bg) * coverage) + noise.
struct DomainStyle {
    double background_level = 0.1;
    double foreground_level = 0.9;
    std::array<double, 3> channel_gains{1.0, 1.0, 1.0};
    double noise_sigma = 0.02;
};

inline constexpr int kGlyphCount = 8;
inline constexpr const char* kGlyphNames[kGlyphCount] = {"row", "column", "diagonal", "antidiagonal", "corner", "triangle", "chevron", "hook"};

/// Built-in styles; the first n are used when a config does not list its own.
inline std::vector<DomainStyle> default_domain_styles(int n) {
    static const std::vector<DomainStyle> table = {
        {0.10, 0.85, {1.00, 0.55, 0.30}, 0.02},
        {0.80, 0.20, {0.35, 0.75, 1.00}, 0.02},
        {0.45, 0.95, {0.45, 1.00, 0.45}, 0.02},
        {0.90, 0.35, {1.00, 0.95, 0.35}, 0.02},
        {0.05, 0.60, {0.80, 0.30, 1.00}, 0.02},
        {0.60, 0.05, {0.60, 0.60, 0.60}, 0.02},
        {0.30, 0.90, {0.20, 0.70, 0.80}, 0.02},
        {0.95, 0.55, {0.95, 0.45, 0.75}, 0.02},
    };
    if (n < 1 || n > static_cast<int>(table.size()))
        throw Error("default_domain_styles: supports 1.." + std::to_string(table.size()) + " domains");
    return {table.begin(), table.begin() + n};
}

struct SynthConfig {
    int num_classes = 4;
    int num_domains = 2;
    int samples_per_cell = 100;
    int image_size = 32;
    int channels = 3;
    std::vector<DomainStyle> domain_styles;  // empty -> default_domain_styles(num_domains)
    int jitter = 3;
    double glyph_area_fraction = 0.05;
    std::uint64_t seed = 0;

    std::vector<DomainStyle> styles() const {
        return domain_styles.empty() ? default_domain_styles(num_domains) : domain_styles;
    }

    /// Expected per-channel image mean for a domain (noise and clamping ignored).
    std::array<double, 3> expected_channel_means(const DomainStyle& s) const {
        std::array<double, 3> m{};
        const double base = s.background_level + (s.foreground_level - s.background_level) * glyph_area_fraction;
        for (int c = 0; c < 3; ++c) m[static_cast<std::size_t>(c)] = s.channel_gains[static_cast<std::size_t>(c)] * base;
        return m;
    }

    void validate() const {
        if (num_classes < 1) throw Error("synth: num_classes must be >= 1");
        if (num_classes > kGlyphCount)
            throw Error("synth: num_classes " + std::to_string(num_classes) + " exceeds the " + std::to_string(kGlyphCount) +
                        " available glyphs");
        if (num_domains < 1) throw Error("synth: num_domains must be >= 1");
        if (samples_per_cell < 1) throw Error("synth: samples_per_cell must be >= 1");
        if (image_size < 16) throw Error("synth: image_size must be >= 16");
        if (channels != 1 && channels != 3) throw Error("synth: channels must be 1 or 3");
        if (jitter < 0 || jitter > image_size / 8) throw Error("synth: jitter out of range");
        const auto st = styles();
        if (static_cast<int>(st.size()) != num_domains) throw Error("synth: domain_styles must list one style per domain");
        for (std::size_t d = 0; d < st.size(); ++d) {
            if (std::abs(st[d].foreground_level - st[d].background_level) < 0.3)
                throw Error("synth: domain " + std::to_string(d) + " foreground/background levels differ by < 0.3");
            for (std::size_t e = 0; e < d; ++e) {
                if (st[d].channel_gains == st[e].channel_gains)
                    throw Error("synth: domains " + std::to_string(e) + " and " + std::to_string(d) + " share channel gains");
                const auto a = expected_channel_means(st[d]);
                const auto b = expected_channel_means(st[e]);
                double dist = 0.0;
                const int used = channels == 3 ? 3 : 1;
                for (int c = 0; c < used; ++c) {
                    const double diff = channels == 3 ? a[static_cast<std::size_t>(c)] - b[static_cast<std::size_t>(c)]
                                                      : (a[0] + a[1] + a[2] - b[0] - b[1] - b[2]) / 3.0;
                    dist += diff * diff;
                }
                if (std::sqrt(dist) < 0.1)
                    throw Error("synth: expected channel means of domains " + std::to_string(e) + " and " + std::to_string(d) +
                                " are closer than 0.1");
            }
        }
    }
};

namespace detail {

struct Segment {
    double x0, y0, x1, y1;
};

/// Three equal dots on the {-1, 0, 1}^2 lattice of the unit square (y down).
/// Every glyph has the same local content; only the arrangement differs, so a
/// block shuffle finer than the dot spacing leaves no class signal.
inline std::vector<Segment> glyph_segments(int glyph) {
    static const double dots[kGlyphCount][3][2] = {
        {{-1, 0}, {0, 0}, {1, 0}},     // row
        {{0, -1}, {0, 0}, {0, 1}},     // column
        {{-1, 1}, {0, 0}, {1, -1}},    // diagonal
        {{-1, -1}, {0, 0}, {1, 1}},    // antidiagonal
        {{-1, -1}, {-1, 1}, {1, 1}},   // corner
        {{0, -1}, {-1, 1}, {1, 1}},    // triangle
        {{-1, -1}, {0, 1}, {1, -1}},   // chevron
        {{-1, -1}, {1, -1}, {1, 1}},   // hook
    };
    if (glyph < 0 || glyph >= kGlyphCount) throw Error("unknown glyph " + std::to_string(glyph));
    std::vector<Segment> s;
    for (const auto& d : dots[glyph]) s.push_back({d[0], d[1], d[0], d[1]});
    return s;
}

inline double segment_distance(double px, double py, const Segment& s) {
    const double dx = s.x1 - s.x0, dy = s.y1 - s.y0;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((px - s.x0) * dx + (py - s.y0) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double qx = s.x0 + t * dx - px, qy = s.y0 + t * dy - py;
    return std::sqrt(qx * qx + qy * qy);
}

/// Anti-aliased coverage on a size x size canvas, glyph centred at
/// (cx, cy) with half-extent `half` pixels and dot diameter `width` pixels.
inline std::vector<double> rasterize_glyph(int glyph, int size, double cx, double cy, double half, double width) {
    const auto segs = glyph_segments(glyph);
    std::vector<double> cov(static_cast<std::size_t>(size * size), 0.0);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            const double px = (x + 0.5 - cx) / half, py = (y + 0.5 - cy) / half;
            double d = 1e9;
            for (const auto& s : segs) d = std::min(d, segment_distance(px, py, s));
            cov[static_cast<std::size_t>(y * size + x)] = std::clamp(width / 2.0 + 0.5 - d * half, 0.0, 1.0);
        }
    return cov;
}

/// Dot diameter giving each glyph the same total coverage (area_fraction of
/// the canvas), found by bisection at the canvas centre.
inline double equalized_dot_size(int glyph, int size, double half, double area_fraction) {
    const double target = area_fraction * size * size;
    double lo = 0.5, hi = 0.6 * half;
    for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        const auto cov = rasterize_glyph(glyph, size, size / 2.0, size / 2.0, half, mid);
        double area = 0.0;
        for (double v : cov) area += v;
        (area < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Renders the ShapeDomains set: class = glyph shape at a jittered position,
/// domain = global appearance. All visibility flags are set; pixels are
/// quantized to 8 bits so that a PNG round trip is exact.
inline GdaDataset generate(const SynthConfig& cfg) {
    cfg.validate();
    const auto styles = cfg.styles();
    const int size = cfg.image_size;
    const double half = 0.32 * size;
    std::vector<double> widths;
    for (int k = 0; k < cfg.num_classes; ++k) widths.push_back(detail::equalized_dot_size(k, size, half, cfg.glyph_area_fraction));

    GdaDataset out;
    out.reserve(static_cast<std::size_t>(cfg.num_domains * cfg.num_classes * cfg.samples_per_cell));
    std::uint64_t index = 0;
    for (int d = 0; d < cfg.num_domains; ++d) {
        const auto& st = styles[static_cast<std::size_t>(d)];
        for (int k = 0; k < cfg.num_classes; ++k) {
            for (int i = 0; i < cfg.samples_per_cell; ++i, ++index) {
                Rng rng = Rng::stream(cfg.seed, index);
                const int jx = static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * cfg.jitter + 1))) - cfg.jitter;
                const int jy = static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * cfg.jitter + 1))) - cfg.jitter;
                const auto cov = detail::rasterize_glyph(k, size, size / 2.0 + jx, size / 2.0 + jy, half, widths[static_cast<std::size_t>(k)]);
                Sample s;
                s.image = Image(size, size, cfg.channels);
                for (int y = 0; y < size; ++y)
                    for (int x = 0; x < size; ++x) {
                        const double base = st.background_level +
                                            (st.foreground_level - st.background_level) * cov[static_cast<std::size_t>(y * size + x)];
                        if (cfg.channels == 3) {
                            for (int c = 0; c < 3; ++c)
                                s.image.at(y, x, c) = static_cast<float>(st.channel_gains[static_cast<std::size_t>(c)] * base +
                                                                         rng.normal(0.0, st.noise_sigma));
                        } else {
                            const double g = (st.channel_gains[0] + st.channel_gains[1] + st.channel_gains[2]) / 3.0;
                            s.image.at(y, x, 0) = static_cast<float>(g * base + rng.normal(0.0, st.noise_sigma));
                        }
                    }
                quantize8(s.image);
                s.class_label = k;
                s.domain_label = d;
                out.push_back(std::move(s));
            }
        }
    }
    return out;
}

}  // namespace gda
