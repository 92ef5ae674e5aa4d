#pragma once

#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gda/core.hpp"
#include "gda/rng.hpp"

namespace gda {

/// Error with a character offset into the parsed text.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error("parse error at position " + std::to_string(position) + ": " + what), position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

struct ScenarioClause {
    std::string domain;
    std::vector<std::pair<int, int>> ranges;  // inclusive

    std::set<int> classes() const {
        std::set<int> out;
        for (const auto& [lo, hi] : ranges)
            for (int c = lo; c <= hi; ++c) out.insert(c);
        return out;
    }
};

struct ScenarioSpec {
    std::vector<ScenarioClause> clauses;
    double labeled_fraction = 1.0;
    bool hide_domain_labels = true;

    void validate() const {
        if (!(labeled_fraction > 0.0 && labeled_fraction <= 1.0)) throw Error("scenario: labeled_fraction must be in (0, 1]");
    }
};

/// Parses "name(lo-hi[,lo-hi...]), name(...)"; a single class may be written
/// without a range ("sv(0,1)").
inline ScenarioSpec parse_scenario(const std::string& text) {
    ScenarioSpec spec;
    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    auto expect = [&](char ch) {
        skip_ws();
        if (i >= text.size() || text[i] != ch)
            throw ParseError(std::string("expected '") + ch + "'" + (i < text.size() ? std::string(", found '") + text[i] + "'" : ""), i);
        ++i;
    };
    auto number = [&] {
        skip_ws();
        const std::size_t start = i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
        if (start == i) throw ParseError("expected a class index", start);
        if (i - start > 6) throw ParseError("class index too large", start);
        return std::stoi(text.substr(start, i - start));
    };

    skip_ws();
    if (i == text.size()) throw ParseError("empty scenario", 0);
    std::set<std::string> seen;
    while (true) {
        skip_ws();
        const std::size_t name_start = i;
        while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_' || text[i] == '-')) ++i;
        if (name_start == i) throw ParseError("expected a domain name", name_start);
        ScenarioClause clause;
        clause.domain = text.substr(name_start, i - name_start);
        if (!seen.insert(clause.domain).second) throw ParseError("domain '" + clause.domain + "' listed twice", name_start);
        expect('(');
        std::set<int> covered;
        while (true) {
            skip_ws();
            const std::size_t range_start = i;
            const int lo = number();
            int hi = lo;
            skip_ws();
            if (i < text.size() && text[i] == '-') {
                ++i;
                hi = number();
            }
            if (hi < lo) throw ParseError("range " + std::to_string(lo) + "-" + std::to_string(hi) + " is decreasing", range_start);
            for (int c = lo; c <= hi; ++c)
                if (!covered.insert(c).second) throw ParseError("class " + std::to_string(c) + " listed twice in one clause", range_start);
            clause.ranges.emplace_back(lo, hi);
            skip_ws();
            if (i < text.size() && text[i] == ',') {
                ++i;
                continue;
            }
            break;
        }
        expect(')');
        spec.clauses.push_back(std::move(clause));
        skip_ws();
        if (i == text.size()) break;
        expect(',');
    }
    return spec;
}

inline std::string to_string(const ScenarioSpec& spec) {
    std::string out;
    for (std::size_t c = 0; c < spec.clauses.size(); ++c) {
        if (c > 0) out += ", ";
        out += spec.clauses[c].domain + "(";
        for (std::size_t r = 0; r < spec.clauses[c].ranges.size(); ++r) {
            const auto [lo, hi] = spec.clauses[c].ranges[r];
            if (r > 0) out += ",";
            out += std::to_string(lo);
            if (hi != lo) out += "-" + std::to_string(hi);
        }
        out += ")";
    }
    return out;
}

/// Maps a clause's domain name to a domain label: its position in `names`
/// when given, otherwise "dN" or "N".
inline int resolve_domain(const std::string& name, const std::vector<std::string>& names = {}) {
    if (!names.empty()) {
        for (std::size_t d = 0; d < names.size(); ++d)
            if (names[d] == name) return static_cast<int>(d);
        throw Error("unknown domain name '" + name + "'");
    }
    std::string digits = name;
    if (!digits.empty() && digits.front() == 'd') digits.erase(0, 1);
    if (digits.empty() || digits.size() > 6 || !std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
        throw Error("unknown domain name '" + name + "' (expected dN or a name from domain_names)");
    return std::stoi(digits);
}

/// Sets visibility flags; ground-truth labels are copied untouched.
inline GdaDataset apply_scenario(const GdaDataset& dataset, const ScenarioSpec& spec, std::uint64_t seed,
                                 const std::vector<std::string>& domain_names = {}) {
    spec.validate();
    std::set<int> domains;
    for (const auto& s : dataset) domains.insert(s.domain_label);
    std::map<int, std::set<int>> labeled;
    for (const auto& clause : spec.clauses) {
        const int d = resolve_domain(clause.domain, domain_names);
        if (!domains.count(d)) throw Error("scenario domain '" + clause.domain + "' does not occur in the dataset");
        labeled[d] = clause.classes();
    }

    GdaDataset out = dataset;
    std::map<std::pair<int, int>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto& s = out[i];
        s.class_visible = false;
        s.domain_visible = !spec.hide_domain_labels;
        const auto it = labeled.find(s.domain_label);
        if (it != labeled.end() && it->second.count(s.class_label)) groups[{s.domain_label, s.class_label}].push_back(i);
    }
    for (const auto& [key, members] : groups) {
        const auto take = static_cast<std::size_t>(std::llround(spec.labeled_fraction * static_cast<double>(members.size())));
        Rng rng = Rng::stream(seed, 0x5ce7ULL, static_cast<std::uint64_t>(key.first), static_cast<std::uint64_t>(key.second));
        const auto perm = rng.permutation(static_cast<int>(members.size()));
        for (std::size_t j = 0; j < take; ++j) out[members[static_cast<std::size_t>(perm[j])]].class_visible = true;
    }
    return out;
}

/// Sets every visibility flag to 1.
inline GdaDataset reveal_all(GdaDataset dataset) {
    for (auto& s : dataset) s.class_visible = s.domain_visible = true;
    return dataset;
}

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Stratified by (domain, class); each stratum sends round(test_fraction * n)
/// samples to the test side. Index lists are sorted.
inline Split stratified_split(const GdaDataset& dataset, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw Error("split: test_fraction must be in (0, 1)");
    std::map<std::pair<int, int>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < dataset.size(); ++i) groups[{dataset[i].domain_label, dataset[i].class_label}].push_back(i);
    std::vector<bool> is_test(dataset.size(), false);
    for (const auto& [key, members] : groups) {
        const auto take = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(members.size())));
        Rng rng = Rng::stream(seed, 0x5b117ULL, static_cast<std::uint64_t>(key.first), static_cast<std::uint64_t>(key.second));
        const auto perm = rng.permutation(static_cast<int>(members.size()));
        for (std::size_t j = 0; j < take; ++j) is_test[members[static_cast<std::size_t>(perm[j])]] = true;
    }
    Split s;
    for (std::size_t i = 0; i < dataset.size(); ++i) (is_test[i] ? s.test : s.train).push_back(i);
    return s;
}

inline GdaDataset subset(const GdaDataset& dataset, const std::vector<std::size_t>& indices) {
    GdaDataset out;
    out.reserve(indices.size());
    for (auto i : indices) out.push_back(dataset.at(i));
    return out;
}

}  // namespace gda
