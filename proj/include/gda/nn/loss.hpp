#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gda/nn/tensor.hpp"

namespace gda::nn {

/// Row-wise softmax over the first `columns` logits of an (n x m) activation;
/// remaining columns get probability 0.
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits, int columns = -1) {
    const int m = static_cast<int>(logits.per_sample());
    const int used = columns < 0 ? m : columns;
    Tensor<T> p(logits.n, m);
    for (int i = 0; i < logits.n; ++i) {
        const T* z = logits.sample(i);
        T* q = p.sample(i);
        const T mx = *std::max_element(z, z + used);
        T s = 0;
        for (int j = 0; j < used; ++j) {
            q[j] = std::exp(z[j] - mx);
            s += q[j];
        }
        for (int j = 0; j < used; ++j) q[j] /= s;
    }
    return p;
}

template <typename T>
struct LossGrad {
    T loss = T(0);
    Tensor<T> grad;  // d loss / d logits
};

/// Mean softmax cross-entropy over rows with target >= 0, using only the first
/// `columns` logits. Rows with target < 0 contribute neither loss nor gradient.
/// The mean is taken over `denominator` rows when positive, otherwise over the
/// participating rows.
template <typename T>
LossGrad<T> softmax_cross_entropy(const Tensor<T>& logits, const std::vector<int>& targets, int columns = -1,
                                  int denominator = 0) {
    const int m = static_cast<int>(logits.per_sample());
    const int used = columns < 0 ? m : columns;
    if (static_cast<int>(targets.size()) != logits.n) throw Error("softmax_cross_entropy: target count mismatch");
    LossGrad<T> out{T(0), logits.zeros_like()};
    int active = 0;
    for (int t : targets) active += t >= 0 ? 1 : 0;
    const int denom = denominator > 0 ? denominator : active;
    if (active == 0) return out;
    const Tensor<T> p = softmax(logits, used);
    for (int i = 0; i < logits.n; ++i) {
        const int t = targets[static_cast<std::size_t>(i)];
        if (t < 0) continue;
        if (t >= used) throw Error("softmax_cross_entropy: target outside active columns");
        out.loss -= std::log(std::max(p.at(i, t), T(1e-30)));
        for (int j = 0; j < used; ++j) out.grad.at(i, j) = (p.at(i, j) - (j == t ? T(1) : T(0))) / static_cast<T>(denom);
    }
    out.loss /= static_cast<T>(denom);
    return out;
}

}  // namespace gda::nn
