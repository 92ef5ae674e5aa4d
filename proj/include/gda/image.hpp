#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gda {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Height x width x channels image with interleaved float pixels in [0, 1].
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<float> data;

    Image() = default;
    Image(int h, int w, int c, float fill = 0.0f)
        : height(h), width(w), channels(c),
          data(static_cast<std::size_t>(h) * static_cast<std::size_t>(w) * static_cast<std::size_t>(c), fill) {
        if (h <= 0 || w <= 0) throw Error("image dimensions must be positive");
        if (c != 1 && c != 3) throw Error("image channels must be 1 or 3, got " + std::to_string(c));
    }

    std::size_t index(int y, int x, int c) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) *
                   static_cast<std::size_t>(channels) +
               static_cast<std::size_t>(c);
    }
    float& at(int y, int x, int c) { return data[index(y, x, c)]; }
    float at(int y, int x, int c) const { return data[index(y, x, c)]; }

    std::size_t pixel_count() const { return static_cast<std::size_t>(height) * static_cast<std::size_t>(width); }
    bool empty() const { return data.empty(); }

    friend bool operator==(const Image&, const Image&) = default;
};

/// Per-channel mean over all pixels.
inline std::vector<double> channel_means(const Image& img) {
    std::vector<double> m(static_cast<std::size_t>(img.channels), 0.0);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) m[static_cast<std::size_t>(c)] += img.at(y, x, c);
    for (auto& v : m) v /= static_cast<double>(img.pixel_count());
    return m;
}

/// Nearest-neighbour resampling to (out_h, out_w). Source row for output row
/// y is floor((y + 0.5) * in_h / out_h).
inline Image resample_nearest(const Image& src, int out_h, int out_w) {
    if (out_h == src.height && out_w == src.width) return src;
    Image out(out_h, out_w, src.channels);
    for (int y = 0; y < out_h; ++y) {
        const int sy = std::min(src.height - 1, static_cast<int>(((2LL * y + 1) * src.height) / (2LL * out_h)));
        for (int x = 0; x < out_w; ++x) {
            const int sx = std::min(src.width - 1, static_cast<int>(((2LL * x + 1) * src.width) / (2LL * out_w)));
            for (int c = 0; c < src.channels; ++c) out.at(y, x, c) = src.at(sy, sx, c);
        }
    }
    return out;
}

/// Copies the rectangle [top, top+h) x [left, left+w).
inline Image crop(const Image& src, int top, int left, int h, int w) {
    if (top < 0 || left < 0 || h <= 0 || w <= 0 || top + h > src.height || left + w > src.width)
        throw Error("crop rectangle out of bounds");
    Image out(h, w, src.channels);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < src.channels; ++c) out.at(y, x, c) = src.at(top + y, left + x, c);
    return out;
}

/// Quantizes every pixel to the nearest multiple of 1/255, the precision of
/// an 8-bit PNG.
inline void quantize8(Image& img) {
    for (auto& v : img.data) v = static_cast<float>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)) / 255.0f;
}

}  // namespace gda
