#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "gda/image.hpp"

namespace gda::nn {

/// Dense NCHW tensor. Fully-connected activations use h = w = 1.
template <typename T>
struct Tensor {
    int n = 0;
    int c = 0;
    int h = 1;
    int w = 1;
    std::vector<T> data;

    Tensor() = default;
    Tensor(int n_, int c_, int h_ = 1, int w_ = 1, T fill = T(0))
        : n(n_), c(c_), h(h_), w(w_),
          data(static_cast<std::size_t>(n_) * static_cast<std::size_t>(c_) * static_cast<std::size_t>(h_) *
                   static_cast<std::size_t>(w_),
               fill) {}

    std::size_t size() const { return data.size(); }
    std::size_t per_sample() const {
        return static_cast<std::size_t>(c) * static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
    }
    std::size_t plane() const { return static_cast<std::size_t>(h) * static_cast<std::size_t>(w); }
    T* sample(int i) { return data.data() + static_cast<std::size_t>(i) * per_sample(); }
    const T* sample(int i) const { return data.data() + static_cast<std::size_t>(i) * per_sample(); }

    T& at(int i, int ch, int y = 0, int x = 0) {
        return data[((static_cast<std::size_t>(i) * static_cast<std::size_t>(c) + static_cast<std::size_t>(ch)) *
                         static_cast<std::size_t>(h) +
                     static_cast<std::size_t>(y)) *
                        static_cast<std::size_t>(w) +
                    static_cast<std::size_t>(x)];
    }
    T at(int i, int ch, int y = 0, int x = 0) const { return const_cast<Tensor*>(this)->at(i, ch, y, x); }

    bool same_shape(const Tensor& o) const { return n == o.n && c == o.c && h == o.h && w == o.w; }
    Tensor zeros_like() const { return Tensor(n, c, h, w); }
};

/// Packs images (HWC) into an NCHW batch. All images must share a shape.
template <typename T>
Tensor<T> batch_from_images(const std::vector<const Image*>& images) {
    if (images.empty()) throw Error("batch_from_images: empty batch");
    const Image& first = *images.front();
    Tensor<T> out(static_cast<int>(images.size()), first.channels, first.height, first.width);
    for (std::size_t i = 0; i < images.size(); ++i) {
        const Image& img = *images[i];
        if (img.height != first.height || img.width != first.width || img.channels != first.channels)
            throw Error("batch_from_images: image shapes differ within batch");
        T* dst = out.sample(static_cast<int>(i));
        for (int ch = 0; ch < img.channels; ++ch)
            for (int y = 0; y < img.height; ++y)
                for (int x = 0; x < img.width; ++x)
                    dst[(static_cast<std::size_t>(ch) * static_cast<std::size_t>(img.height) + static_cast<std::size_t>(y)) *
                            static_cast<std::size_t>(img.width) +
                        static_cast<std::size_t>(x)] = static_cast<T>(img.at(y, x, ch));
    }
    return out;
}

/// Row i of a (n x c) activation.
template <typename T>
std::vector<T> row(const Tensor<T>& t, int i) {
    return std::vector<T>(t.sample(i), t.sample(i) + t.per_sample());
}

}  // namespace gda::nn
