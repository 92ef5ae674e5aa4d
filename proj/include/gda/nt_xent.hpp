#pragma once

#include <cmath>
#include <vector>

#include "gda/nn/loss.hpp"
#include "gda/nn/tensor.hpp"

namespace gda {

/// Normalized temperature-scaled cross-entropy over 2N embeddings where rows
/// 2i and 2i+1 are the two views of sample i.
///
/// Each row is L2-normalized; for every anchor the paired view is the positive
/// and the remaining 2N-2 rows are negatives, with logits cos(u_i, u_k) / tau.
/// Returns the mean anchor loss and its gradient with respect to the raw
/// (unnormalized) embeddings.
template <typename T>
nn::LossGrad<T> nt_xent(const nn::Tensor<T>& embeddings, double temperature) {
    const int rows = embeddings.n;
    const int dim = static_cast<int>(embeddings.per_sample());
    if (temperature <= 0.0) throw Error("nt_xent: temperature must be positive");
    if (rows % 2 != 0) throw Error("nt_xent: embeddings must come in (view_a, view_b) pairs");
    if (rows < 4) throw Error("nt_xent: need at least 2 pairs so that negatives exist");

    const auto R = static_cast<std::size_t>(rows);
    const auto D = static_cast<std::size_t>(dim);
    std::vector<double> u(R * D), norm(R);
    for (std::size_t i = 0; i < R; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < D; ++k) {
            const double v = static_cast<double>(embeddings.data[i * D + k]);
            s += v * v;
        }
        if (s == 0.0) throw Error("nt_xent: zero-norm embedding row " + std::to_string(i));
        norm[i] = std::sqrt(s);
        for (std::size_t k = 0; k < D; ++k) u[i * D + k] = static_cast<double>(embeddings.data[i * D + k]) / norm[i];
    }

    // logits s_ij = u_i . u_j / tau
    std::vector<double> sim(R * R, 0.0);
    for (std::size_t i = 0; i < R; ++i)
        for (std::size_t j = i + 1; j < R; ++j) {
            double d = 0.0;
            for (std::size_t k = 0; k < D; ++k) d += u[i * D + k] * u[j * D + k];
            sim[i * R + j] = sim[j * R + i] = d / temperature;
        }

    // A_ij = softmax_j(s_i.) - [j == positive(i)], with the diagonal excluded.
    std::vector<double> a(R * R, 0.0);
    double loss = 0.0;
    for (std::size_t i = 0; i < R; ++i) {
        const std::size_t pos = i ^ 1U;
        double mx = -1e300;
        for (std::size_t j = 0; j < R; ++j)
            if (j != i) mx = std::max(mx, sim[i * R + j]);
        double z = 0.0;
        for (std::size_t j = 0; j < R; ++j)
            if (j != i) z += std::exp(sim[i * R + j] - mx);
        loss += -(sim[i * R + pos] - mx) + std::log(z);
        for (std::size_t j = 0; j < R; ++j)
            if (j != i) a[i * R + j] = std::exp(sim[i * R + j] - mx) / z - (j == pos ? 1.0 : 0.0);
    }
    loss /= static_cast<double>(R);

    // dL/du_i = (1 / (R tau)) sum_j (A_ij + A_ji) u_j, then project through the normalization.
    nn::LossGrad<T> out{static_cast<T>(loss), embeddings.zeros_like()};
    std::vector<double> gu(D);
    for (std::size_t i = 0; i < R; ++i) {
        std::fill(gu.begin(), gu.end(), 0.0);
        for (std::size_t j = 0; j < R; ++j) {
            const double c = (a[i * R + j] + a[j * R + i]) / (static_cast<double>(R) * temperature);
            if (c == 0.0) continue;
            for (std::size_t k = 0; k < D; ++k) gu[k] += c * u[j * D + k];
        }
        double dot = 0.0;
        for (std::size_t k = 0; k < D; ++k) dot += gu[k] * u[i * D + k];
        for (std::size_t k = 0; k < D; ++k)
            out.grad.data[i * D + k] = static_cast<T>((gu[k] - dot * u[i * D + k]) / norm[i]);
    }
    return out;
}

}  // namespace gda
