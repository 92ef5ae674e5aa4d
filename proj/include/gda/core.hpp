#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gda/image.hpp"

namespace gda {

/// One observation: image, ground-truth labels, and the two flags that say
/// whether training code may see those labels.
struct Sample {
    Image image;
    int class_label = 0;
    int domain_label = 0;
    bool class_visible = true;
    bool domain_visible = true;
};

using GdaDataset = std::vector<Sample>;

/// Raw-label sentinel for the unknown class.
inline constexpr int kUnk = -1;

struct DomainLabelSets {
    std::set<int> all;        // C_i
    std::set<int> labeled;    // L_i
    std::set<int> unlabeled;  // U_i

    friend bool operator==(const DomainLabelSets&, const DomainLabelSets&) = default;
};

struct LabelSets {
    std::set<int> all_classes;    // C
    std::set<int> known_classes;  // L
    std::map<int, DomainLabelSets> per_domain;

    friend bool operator==(const LabelSets&, const LabelSets&) = default;
};

inline LabelSets compute_label_sets(const GdaDataset& dataset) {
    if (dataset.empty()) throw Error("compute_label_sets: empty dataset");
    LabelSets sets;
    for (const auto& s : dataset) {
        auto& dom = sets.per_domain[s.domain_label];
        sets.all_classes.insert(s.class_label);
        dom.all.insert(s.class_label);
        if (s.class_visible) {
            sets.known_classes.insert(s.class_label);
            dom.labeled.insert(s.class_label);
        } else {
            dom.unlabeled.insert(s.class_label);
        }
    }
    return sets;
}

/// y if y is a known class, kUnk otherwise.
inline int oracle_target(const Sample& sample, const std::set<int>& known) {
    return known.contains(sample.class_label) ? sample.class_label : kUnk;
}

/// Dense index space over the known classes: label -> [0, K), unknown -> K.
class KnownClasses {
public:
    KnownClasses() = default;
    explicit KnownClasses(const std::set<int>& known) : labels_(known.begin(), known.end()) {}
    explicit KnownClasses(std::vector<int> labels) : labels_(std::move(labels)) {
        std::sort(labels_.begin(), labels_.end());
        labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
    }

    int size() const { return static_cast<int>(labels_.size()); }
    int unk_index() const { return size(); }
    int index_of(int label) const {
        const auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
        if (it == labels_.end() || *it != label) return unk_index();
        return static_cast<int>(it - labels_.begin());
    }
    bool contains(int label) const { return std::binary_search(labels_.begin(), labels_.end(), label); }
    int label_at(int index) const { return index == unk_index() ? kUnk : labels_.at(static_cast<std::size_t>(index)); }
    const std::vector<int>& labels() const { return labels_; }

private:
    std::vector<int> labels_;
};

// ---------------------------------------------------------------------------
// Blinded access

class LabelAccessError : public Error {
public:
    using Error::Error;
};

/// Read-only view that only hands out labels whose visibility flag is set.
/// Every successful label read is counted so training stages can be audited.
class BlindedView {
public:
    explicit BlindedView(const GdaDataset& dataset) : dataset_(&dataset) {}

    std::size_t size() const { return dataset_->size(); }
    const Image& image(std::size_t i) const { return dataset_->at(i).image; }
    bool class_visible(std::size_t i) const { return dataset_->at(i).class_visible; }
    bool domain_visible(std::size_t i) const { return dataset_->at(i).domain_visible; }

    int class_label(std::size_t i) const {
        const auto& s = dataset_->at(i);
        if (!s.class_visible) throw LabelAccessError("class label of sample " + std::to_string(i) + " is hidden");
        ++label_reads_;
        return s.class_label;
    }
    int domain_label(std::size_t i) const {
        const auto& s = dataset_->at(i);
        if (!s.domain_visible) throw LabelAccessError("domain label of sample " + std::to_string(i) + " is hidden");
        ++label_reads_;
        return s.domain_label;
    }

    std::size_t label_reads() const { return label_reads_; }

private:
    const GdaDataset* dataset_;
    mutable std::size_t label_reads_ = 0;
};

// ---------------------------------------------------------------------------
// Scenario classification

enum class ScenarioName { UDA, MSDA, OSDA, MS_OSDA, BTDA, GDA1, GDA2 };

inline constexpr ScenarioName kAllScenarios[] = {ScenarioName::UDA,     ScenarioName::MSDA, ScenarioName::OSDA,
                                                 ScenarioName::MS_OSDA, ScenarioName::BTDA, ScenarioName::GDA1,
                                                 ScenarioName::GDA2};

inline std::string_view to_string(ScenarioName n) {
    switch (n) {
        case ScenarioName::UDA: return "UDA";
        case ScenarioName::MSDA: return "MSDA";
        case ScenarioName::OSDA: return "OSDA";
        case ScenarioName::MS_OSDA: return "MS-OSDA";
        case ScenarioName::BTDA: return "BTDA";
        case ScenarioName::GDA1: return "GDA1";
        case ScenarioName::GDA2: return "GDA2";
    }
    return "?";
}

namespace detail {

enum class Visibility { AllVisible, AllHidden, Mixed };

template <typename T>
bool is_subset(const std::set<T>& a, const std::set<T>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}
template <typename T>
bool is_strict_subset(const std::set<T>& a, const std::set<T>& b) {
    return a.size() < b.size() && is_subset(a, b);
}
template <typename T>
bool disjoint(const std::set<T>& a, const std::set<T>& b) {
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) ++ia;
        else if (*ib < *ia) ++ib;
        else return false;
    }
    return true;
}

struct DomainRow {
    DomainLabelSets sets;
    Visibility vis;
};

inline bool is_target(const DomainRow& r) { return r.sets.labeled.empty() && r.sets.unlabeled == r.sets.all; }
inline bool is_source(const DomainRow& r, const std::set<int>& known) {
    return r.sets.labeled == r.sets.all && r.sets.labeled == known && r.sets.unlabeled.empty();
}

}  // namespace detail

/// Every Table-style constraint row the dataset satisfies. Rows overlap, so
/// several names can be returned; an empty set means no row matches.
inline std::set<ScenarioName> classify_scenario(const GdaDataset& dataset) {
    using detail::DomainRow;
    using detail::Visibility;
    const LabelSets sets = compute_label_sets(dataset);

    std::map<int, std::pair<std::size_t, std::size_t>> vis_count;  // domain -> (visible, total)
    for (const auto& s : dataset) {
        auto& [v, t] = vis_count[s.domain_label];
        v += s.domain_visible ? 1 : 0;
        ++t;
    }
    std::vector<DomainRow> rows;
    for (const auto& [d, dom] : sets.per_domain) {
        const auto [v, t] = vis_count.at(d);
        const Visibility vis = v == t ? Visibility::AllVisible : (v == 0 ? Visibility::AllHidden : Visibility::Mixed);
        if (vis == Visibility::Mixed) return {};
        rows.push_back({dom, vis});
    }

    const auto& C = sets.all_classes;
    const auto& L = sets.known_classes;
    const std::size_t n = rows.size();
    const bool all_visible = std::all_of(rows.begin(), rows.end(), [](const DomainRow& r) { return r.vis == Visibility::AllVisible; });
    const bool all_hidden = std::all_of(rows.begin(), rows.end(), [](const DomainRow& r) { return r.vis == Visibility::AllHidden; });
    const bool all_share_C = std::all_of(rows.begin(), rows.end(), [&](const DomainRow& r) { return r.sets.all == C; });

    // Exactly one domain satisfying `pred`, or -1.
    auto unique_index = [&](auto pred) {
        int found = -1;
        for (std::size_t i = 0; i < n; ++i) {
            if (pred(rows[i])) {
                if (found >= 0) return -1;
                found = static_cast<int>(i);
            }
        }
        return found;
    };
    auto others = [&](int j, auto pred) {
        for (std::size_t i = 0; i < n; ++i)
            if (static_cast<int>(i) != j && !pred(rows[i])) return false;
        return true;
    };
    auto src = [&](const DomainRow& r) { return detail::is_source(r, L); };

    std::set<ScenarioName> out;
    const int target = unique_index(detail::is_target);

    if (n == 2 && all_visible && target >= 0 && others(target, src)) {
        const auto& Ct = rows[static_cast<std::size_t>(target)].sets.all;
        const auto& Cs = rows[static_cast<std::size_t>(1 - target)].sets.all;
        if (Cs == C && Ct == C) out.insert(ScenarioName::UDA);
        if (Ct == C && detail::is_strict_subset(Cs, Ct)) out.insert(ScenarioName::OSDA);
    }
    if (n >= 2 && all_visible && target >= 0 && others(target, src)) {
        if (all_share_C) out.insert(ScenarioName::MSDA);
        const int full = unique_index([&](const DomainRow& r) { return r.sets.all == C; });
        if (full == target && others(target, [&](const DomainRow& r) {
                return detail::is_strict_subset(r.sets.all, rows[static_cast<std::size_t>(target)].sets.all);
            }))
            out.insert(ScenarioName::MS_OSDA);
    }
    if (n >= 2 && all_share_C) {
        const int source = unique_index(src);
        if (source >= 0 && rows[static_cast<std::size_t>(source)].vis == Visibility::AllVisible &&
            others(source, [](const DomainRow& r) { return detail::is_target(r) && r.vis == Visibility::AllHidden; }))
            out.insert(ScenarioName::BTDA);
    }
    if (all_hidden) {
        bool differ = false;
        for (std::size_t i = 0; i < n && !differ; ++i)
            for (std::size_t j = i + 1; j < n && !differ; ++j) differ = rows[i].sets.labeled != rows[j].sets.labeled;
        if (differ) {
            if (std::all_of(rows.begin(), rows.end(), [](const DomainRow& r) { return detail::disjoint(r.sets.labeled, r.sets.unlabeled); }))
                out.insert(ScenarioName::GDA1);
            if (std::all_of(rows.begin(), rows.end(), [](const DomainRow& r) { return detail::is_strict_subset(r.sets.labeled, r.sets.unlabeled); }))
                out.insert(ScenarioName::GDA2);
        }
    }
    return out;
}

}  // namespace gda
