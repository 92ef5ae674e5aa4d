#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "gda/image.hpp"

namespace gda {

namespace detail {

/// Relabels arbitrary integer labels to 0..n-1 in order of first appearance.
inline std::vector<int> compact_labels(const std::vector<int>& labels, int& count) {
    std::map<int, int> ids;
    std::vector<int> out;
    out.reserve(labels.size());
    for (int l : labels) {
        auto [it, inserted] = ids.try_emplace(l, static_cast<int>(ids.size()));
        out.push_back(it->second);
    }
    count = static_cast<int>(ids.size());
    return out;
}

}  // namespace detail

/// Normalized mutual information, MI / sqrt(H(a) H(b)).
/// Zero when either labeling has zero entropy, unless both are single-group
/// (identical partitions), which scores 1.
inline double nmi(const std::vector<int>& labels_a, const std::vector<int>& labels_b) {
    if (labels_a.size() != labels_b.size()) throw Error("nmi: label sequences differ in length");
    if (labels_a.empty()) throw Error("nmi: empty label sequences");
    int ka = 0, kb = 0;
    const auto a = detail::compact_labels(labels_a, ka);
    const auto b = detail::compact_labels(labels_b, kb);
    const auto n = static_cast<double>(a.size());

    std::vector<double> joint(static_cast<std::size_t>(ka * kb), 0.0), pa(static_cast<std::size_t>(ka), 0.0),
        pb(static_cast<std::size_t>(kb), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[static_cast<std::size_t>(a[i] * kb + b[i])] += 1.0 / n;
        pa[static_cast<std::size_t>(a[i])] += 1.0 / n;
        pb[static_cast<std::size_t>(b[i])] += 1.0 / n;
    }
    auto entropy = [](const std::vector<double>& p) {
        double h = 0.0;
        for (double v : p)
            if (v > 0.0) h -= v * std::log(v);
        return h;
    };
    const double ha = entropy(pa), hb = entropy(pb);
    if (ka == 1 && kb == 1) return 1.0;
    if (ha <= 0.0 || hb <= 0.0) return 0.0;
    double mi = 0.0;
    for (int i = 0; i < ka; ++i)
        for (int j = 0; j < kb; ++j) {
            const double pij = joint[static_cast<std::size_t>(i * kb + j)];
            if (pij > 0.0) mi += pij * std::log(pij / (pa[static_cast<std::size_t>(i)] * pb[static_cast<std::size_t>(j)]));
        }
    return std::clamp(mi / std::sqrt(ha * hb), 0.0, 1.0);
}

/// Maximum-weight assignment on a rectangular matrix (Hungarian algorithm on
/// the square padding). Returns, for each row, the matched column or -1.
inline std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& weight) {
    const int rows = static_cast<int>(weight.size());
    const int cols = rows == 0 ? 0 : static_cast<int>(weight.front().size());
    const int n = std::max(rows, cols);
    if (n == 0) return {};
    double big = 0.0;
    for (const auto& r : weight)
        for (double v : r) big = std::max(big, v);
    // cost[i][j] = big - weight, padded entries cost `big`
    auto cost = [&](int i, int j) {
        if (i < rows && j < cols) return big - weight[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        return big;
    };
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(n + 1), 0.0);
    std::vector<int> p(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
        std::vector<char> used(static_cast<std::size_t>(n + 1), 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const int i0 = p[static_cast<std::size_t>(j0)];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> match(static_cast<std::size_t>(rows), -1);
    for (int j = 1; j <= n; ++j) {
        const int i = p[static_cast<std::size_t>(j)] - 1;
        if (i >= 0 && i < rows && j - 1 < cols) match[static_cast<std::size_t>(i)] = j - 1;
    }
    return match;
}

/// Fraction of samples whose cluster maps to their true label under the best
/// one-to-one relabeling of clusters.
inline double matched_agreement(const std::vector<int>& clusters, const std::vector<int>& truth) {
    if (clusters.size() != truth.size()) throw Error("matched_agreement: length mismatch");
    if (clusters.empty()) throw Error("matched_agreement: empty input");
    int kc = 0, kt = 0;
    const auto c = detail::compact_labels(clusters, kc);
    const auto t = detail::compact_labels(truth, kt);
    std::vector<std::vector<double>> counts(static_cast<std::size_t>(kc), std::vector<double>(static_cast<std::size_t>(kt), 0.0));
    for (std::size_t i = 0; i < c.size(); ++i) counts[static_cast<std::size_t>(c[i])][static_cast<std::size_t>(t[i])] += 1.0;
    const auto match = max_weight_assignment(counts);
    double hit = 0.0;
    for (int i = 0; i < kc; ++i)
        if (match[static_cast<std::size_t>(i)] >= 0) hit += counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(match[static_cast<std::size_t>(i)])];
    return hit / static_cast<double>(clusters.size());
}

}  // namespace gda
