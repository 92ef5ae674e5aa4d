#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gda/image.hpp"

namespace gda {

/// (K+1) x (K+1) counts; row = true index, column = predicted index, and
/// index K stands for UNK.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int known_classes) : k_(known_classes), counts_(static_cast<std::size_t>((known_classes + 1) * (known_classes + 1)), 0) {
        if (known_classes < 0) throw Error("ConfusionMatrix: negative class count");
    }

    int known() const { return k_; }
    int unk() const { return k_; }
    int dim() const { return k_ + 1; }

    void add(int truth, int predicted, std::int64_t n = 1) {
        if (truth < 0 || truth > k_ || predicted < 0 || predicted > k_) throw Error("ConfusionMatrix: index out of range");
        counts_[idx(truth, predicted)] += n;
    }
    std::int64_t at(int truth, int predicted) const { return counts_[idx(truth, predicted)]; }
    std::int64_t row_sum(int truth) const {
        std::int64_t s = 0;
        for (int p = 0; p <= k_; ++p) s += at(truth, p);
        return s;
    }
    std::int64_t total() const {
        std::int64_t s = 0;
        for (auto v : counts_) s += v;
        return s;
    }
    std::vector<std::vector<std::int64_t>> rows() const {
        std::vector<std::vector<std::int64_t>> out;
        for (int t = 0; t <= k_; ++t) {
            out.emplace_back();
            for (int p = 0; p <= k_; ++p) out.back().push_back(at(t, p));
        }
        return out;
    }

private:
    std::size_t idx(int t, int p) const { return static_cast<std::size_t>(t * (k_ + 1) + p); }
    int k_;
    std::vector<std::int64_t> counts_;
};

/// Macro-average known-class accuracy in percent; empty rows are skipped.
inline double os_star(const ConfusionMatrix& cm) {
    double sum = 0.0;
    int used = 0;
    for (int k = 0; k < cm.known(); ++k) {
        const auto n = cm.row_sum(k);
        if (n == 0) continue;
        sum += 100.0 * static_cast<double>(cm.at(k, k)) / static_cast<double>(n);
        ++used;
    }
    if (used == 0) throw Error("os_star: no known-class samples");
    return sum / used;
}

/// Unknown-class rejection accuracy in percent.
inline double unk_acc(const ConfusionMatrix& cm) {
    const auto n = cm.row_sum(cm.unk());
    if (n == 0) throw Error("unk_acc: no unknown-class samples");
    return 100.0 * static_cast<double>(cm.at(cm.unk(), cm.unk())) / static_cast<double>(n);
}

/// Harmonic mean of OS* and UNK.
inline double hos(double os_star_value, double unk_value) {
    const double s = os_star_value + unk_value;
    return s == 0.0 ? 0.0 : 2.0 * os_star_value * unk_value / s;
}

/// Macro-average accuracy over the K known rows plus the UNK row; empty rows
/// are skipped.
inline double os(const ConfusionMatrix& cm) {
    double sum = 0.0;
    int used = 0;
    bool known_seen = false;
    for (int k = 0; k <= cm.known(); ++k) {
        const auto n = cm.row_sum(k);
        if (n == 0) continue;
        known_seen = known_seen || k < cm.known();
        sum += 100.0 * static_cast<double>(cm.at(k, k)) / static_cast<double>(n);
        ++used;
    }
    if (!known_seen) throw Error("os: no known-class samples");
    return sum / used;
}

struct MetricsReport {
    double os_star = 0.0;
    std::optional<double> unk;  // absent when the evaluation set has no unknowns
    double hos = 0.0;
    double os = 0.0;
    std::optional<double> nmi_domain;
    ConfusionMatrix confusion{0};
};

inline MetricsReport make_report(const ConfusionMatrix& cm, std::optional<double> nmi_domain = std::nullopt) {
    MetricsReport r;
    r.confusion = cm;
    r.os_star = os_star(cm);
    if (cm.row_sum(cm.unk()) > 0) r.unk = unk_acc(cm);
    r.hos = r.unk ? hos(r.os_star, *r.unk) : 0.0;
    r.os = os(cm);
    r.nmi_domain = nmi_domain;
    return r;
}

inline nlohmann::ordered_json to_json(const MetricsReport& r) {
    nlohmann::ordered_json j;
    j["os_star"] = r.os_star;
    j["unk"] = r.unk ? nlohmann::ordered_json(*r.unk) : nlohmann::ordered_json(nullptr);
    j["hos"] = r.hos;
    j["os"] = r.os;
    j["nmi_domain"] = r.nmi_domain ? nlohmann::ordered_json(*r.nmi_domain) : nlohmann::ordered_json(nullptr);
    j["confusion"] = r.confusion.rows();
    return j;
}

inline MetricsReport report_from_json(const nlohmann::json& j) {
    const auto rows = j.at("confusion").get<std::vector<std::vector<std::int64_t>>>();
    if (rows.empty()) throw Error("metrics report: empty confusion matrix");
    ConfusionMatrix cm(static_cast<int>(rows.size()) - 1);
    for (std::size_t t = 0; t < rows.size(); ++t) {
        if (rows[t].size() != rows.size()) throw Error("metrics report: confusion matrix is not square");
        for (std::size_t p = 0; p < rows.size(); ++p) cm.add(static_cast<int>(t), static_cast<int>(p), rows[t][p]);
    }
    MetricsReport r;
    r.confusion = cm;
    r.os_star = j.at("os_star").get<double>();
    if (!j.at("unk").is_null()) r.unk = j.at("unk").get<double>();
    r.hos = j.at("hos").get<double>();
    r.os = j.at("os").get<double>();
    if (!j.at("nmi_domain").is_null()) r.nmi_domain = j.at("nmi_domain").get<double>();
    return r;
}

}  // namespace gda
