#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gda/image.hpp"
#include "gda/rng.hpp"

namespace gda {

/// g x g block partition for the class-destructive shuffle.
struct GridSpec {
    int g = 3;

    GridSpec() = default;
    explicit GridSpec(int g_) : g(g_) {
        if (g < 1) throw Error("grid partitions must be >= 1");
    }
};

enum class AugmentOp { RandomCrop, Grayscale, GaussianBlur };

inline std::string_view to_string(AugmentOp op) {
    switch (op) {
        case AugmentOp::RandomCrop: return "random_crop";
        case AugmentOp::Grayscale: return "grayscale";
        case AugmentOp::GaussianBlur: return "gaussian_blur";
    }
    return "?";
}

inline AugmentOp parse_augment_op(std::string_view s) {
    if (s == "random_crop") return AugmentOp::RandomCrop;
    if (s == "grayscale") return AugmentOp::Grayscale;
    if (s == "gaussian_blur") return AugmentOp::GaussianBlur;
    throw Error("unknown augmentation op '" + std::string(s) + "'");
}

struct AugmentConfig {
    std::pair<double, double> crop_scale_range{0.5, 1.0};
    double grayscale_probability = 0.2;
    double blur_probability = 0.0;
    std::pair<double, double> blur_sigma_range{0.1, 1.0};
    std::vector<AugmentOp> enabled_ops{AugmentOp::RandomCrop, AugmentOp::Grayscale};

    /// No-op configuration.
    static AugmentConfig identity() { return {{1.0, 1.0}, 0.0, 0.0, {0.1, 1.0}, {}}; }

    void validate() const {
        const auto [clo, chi] = crop_scale_range;
        if (!(clo > 0.0 && clo <= chi && chi <= 1.0)) throw Error("crop_scale_range must satisfy 0 < low <= high <= 1");
        if (grayscale_probability < 0.0 || grayscale_probability > 1.0) throw Error("grayscale_probability out of [0,1]");
        if (blur_probability < 0.0 || blur_probability > 1.0) throw Error("blur_probability out of [0,1]");
        const auto [slo, shi] = blur_sigma_range;
        if (!(slo > 0.0 && slo <= shi)) throw Error("blur_sigma_range must satisfy 0 < low <= high");
    }
};

/// Rearranges the g*g equal blocks of an image whose sides are multiples of g:
/// output block i receives input block permutation[i] (blocks in row-major order).
inline Image permute_blocks(const Image& img, int g, const std::vector<int>& permutation) {
    if (img.height % g != 0 || img.width % g != 0) throw Error("permute_blocks: image sides must be multiples of g");
    if (permutation.size() != static_cast<std::size_t>(g * g)) throw Error("permute_blocks: permutation size must be g*g");
    const int bh = img.height / g;
    const int bw = img.width / g;
    Image out(img.height, img.width, img.channels);
    for (int dst = 0; dst < g * g; ++dst) {
        const int src = permutation[static_cast<std::size_t>(dst)];
        const int sy0 = (src / g) * bh, sx0 = (src % g) * bw;
        const int dy0 = (dst / g) * bh, dx0 = (dst % g) * bw;
        for (int y = 0; y < bh; ++y) {
            const float* from = &img.data[img.index(sy0 + y, sx0, 0)];
            float* to = &out.data[out.index(dy0 + y, dx0, 0)];
            std::copy(from, from + static_cast<std::ptrdiff_t>(bw * img.channels), to);
        }
    }
    return out;
}

/// Nearest positive multiple of g (halves round up).
inline int nearest_multiple(int n, int g) {
    const int m = static_cast<int>(std::lround(static_cast<double>(n) / g)) * g;
    return m < g ? g : m;
}

/// Class-destructive transform: shuffles g*g blocks by a uniformly random
/// permutation. Sides not divisible by g are resampled to the nearest multiple
/// of g, shuffled, and resampled back.
inline Image block_shuffle(const Image& img, GridSpec grid, Rng& rng) {
    const int g = grid.g;
    if (g > std::min(img.height, img.width))
        throw Error("block_shuffle: grid " + std::to_string(g) + " exceeds image side " +
                    std::to_string(std::min(img.height, img.width)));
    if (g == 1) return img;
    const auto perm = rng.permutation(g * g);
    if (img.height % g == 0 && img.width % g == 0) return permute_blocks(img, g, perm);
    const int h = nearest_multiple(img.height, g);
    const int w = nearest_multiple(img.width, g);
    return resample_nearest(permute_blocks(resample_nearest(img, h, w), g, perm), img.height, img.width);
}

inline Image to_grayscale(const Image& img) {
    if (img.channels == 1) return img;
    Image out = img;
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        const std::size_t base = p * static_cast<std::size_t>(img.channels);
        float sum = 0.0f;
        for (int c = 0; c < img.channels; ++c) sum += img.data[base + static_cast<std::size_t>(c)];
        const float lum = sum / static_cast<float>(img.channels);
        for (int c = 0; c < img.channels; ++c) out.data[base + static_cast<std::size_t>(c)] = lum;
    }
    return out;
}

/// Separable Gaussian blur with kernel radius ceil(3 sigma); borders replicate.
inline Image gaussian_blur(const Image& img, double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    if (radius == 0) return img;
    std::vector<float> kernel(static_cast<std::size_t>(2 * radius + 1));
    double total = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * i * i / (sigma * sigma));
        kernel[static_cast<std::size_t>(i + radius)] = static_cast<float>(v);
        total += v;
    }
    for (auto& k : kernel) k = static_cast<float>(k / total);

    auto pass = [&](const Image& src, bool horizontal) {
        Image dst(src.height, src.width, src.channels);
        for (int y = 0; y < src.height; ++y)
            for (int x = 0; x < src.width; ++x)
                for (int c = 0; c < src.channels; ++c) {
                    float acc = 0.0f;
                    for (int i = -radius; i <= radius; ++i) {
                        const int yy = horizontal ? y : std::clamp(y + i, 0, src.height - 1);
                        const int xx = horizontal ? std::clamp(x + i, 0, src.width - 1) : x;
                        acc += kernel[static_cast<std::size_t>(i + radius)] * src.at(yy, xx, c);
                    }
                    dst.at(y, x, c) = acc;
                }
        return dst;
    };
    return pass(pass(img, true), false);
}

/// Random crop covering `area_fraction` of the image (same fraction per side,
/// sqrt of the area), resampled back to the input size.
inline Image random_crop(const Image& img, double area_fraction, Rng& rng) {
    const double side = std::sqrt(area_fraction);
    const int h = std::clamp(static_cast<int>(std::lround(side * img.height)), 1, img.height);
    const int w = std::clamp(static_cast<int>(std::lround(side * img.width)), 1, img.width);
    const int top = static_cast<int>(rng.below(static_cast<std::uint64_t>(img.height - h + 1)));
    const int left = static_cast<int>(rng.below(static_cast<std::uint64_t>(img.width - w + 1)));
    if (h == img.height && w == img.width) return img;
    return resample_nearest(crop(img, top, left, h, w), img.height, img.width);
}

/// Stochastic augmentation t(.): enabled ops run in the listed order. Crop is
/// always applied when enabled; grayscale and blur are coin flips.
inline Image augment(const Image& img, const AugmentConfig& cfg, Rng& rng) {
    Image out = img;
    for (const AugmentOp op : cfg.enabled_ops) {
        switch (op) {
            case AugmentOp::RandomCrop: {
                const double area = rng.uniform(cfg.crop_scale_range.first, cfg.crop_scale_range.second);
                out = random_crop(out, area, rng);
                break;
            }
            case AugmentOp::Grayscale:
                if (rng.bernoulli(cfg.grayscale_probability)) out = to_grayscale(out);
                break;
            case AugmentOp::GaussianBlur:
                if (rng.bernoulli(cfg.blur_probability)) {
                    const double sigma = rng.uniform(cfg.blur_sigma_range.first, cfg.blur_sigma_range.second);
                    out = gaussian_blur(out, sigma);
                }
                break;
        }
    }
    return out;
}

/// The two contrastive views t(t_s(x)) and t'(t_s'(x)); each view draws its
/// own shuffle permutation.
inline std::pair<Image, Image> make_views(const Image& img, GridSpec grid, const AugmentConfig& cfg, Rng& rng) {
    Image a = augment(block_shuffle(img, grid, rng), cfg, rng);
    Image b = augment(block_shuffle(img, grid, rng), cfg, rng);
    return {std::move(a), std::move(b)};
}

}  // namespace gda
