#pragma once

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "gda/image.hpp"

namespace gda::toml {

// Subset understood: [table], [a.b], [[array.of.tables]], key = value with
// strings ("..." with \" \\ \n \t escapes), integers, floats, booleans and
// (nested, multi-line) arrays; '#' comments. Dotted keys, inline tables and
// dates are not supported.

class TomlError : public Error {
public:
    TomlError(const std::string& what, std::size_t line) : Error("config line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

namespace detail {

class Parser {
public:
    explicit Parser(const std::string& text) : s_(text) {}

    nlohmann::json parse() {
        nlohmann::json root = nlohmann::json::object();
        nlohmann::json* table = &root;
        while (true) {
            skip_blank_lines();
            if (at_end()) break;
            if (peek() == '[') {
                table = open_table(root);
            } else {
                const std::string key = parse_key();
                skip_spaces();
                if (at_end() || peek() != '=') fail("expected '=' after key '" + key + "'");
                ++i_;
                skip_spaces();
                nlohmann::json value = parse_value();
                if (table->contains(key)) fail("duplicate key '" + key + "'");
                (*table)[key] = std::move(value);
            }
            end_of_line();
        }
        return root;
    }

private:
    bool at_end() const { return i_ >= s_.size(); }
    char peek() const { return s_[i_]; }
    [[noreturn]] void fail(const std::string& what) const { throw TomlError(what, line_); }

    void skip_spaces() {
        while (!at_end() && (peek() == ' ' || peek() == '\t')) ++i_;
    }
    void skip_comment() {
        if (!at_end() && peek() == '#')
            while (!at_end() && peek() != '\n') ++i_;
    }
    void skip_blank_lines() {
        while (true) {
            skip_spaces();
            skip_comment();
            if (!at_end() && (peek() == '\n' || peek() == '\r')) {
                if (peek() == '\n') ++line_;
                ++i_;
                continue;
            }
            return;
        }
    }
    /// Skips whitespace, comments and newlines inside arrays.
    void skip_array_space() { skip_blank_lines(); }

    void end_of_line() {
        skip_spaces();
        skip_comment();
        if (at_end()) return;
        if (peek() == '\r') ++i_;
        if (at_end()) return;
        if (peek() != '\n') fail(std::string("unexpected '") + peek() + "' after value");
        ++i_;
        ++line_;
    }

    std::string parse_key() {
        skip_spaces();
        if (!at_end() && peek() == '"') return parse_string();
        const std::size_t start = i_;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) ++i_;
        if (start == i_) fail("expected a key");
        return s_.substr(start, i_ - start);
    }

    nlohmann::json* open_table(nlohmann::json& root) {
        ++i_;
        const bool array = !at_end() && peek() == '[';
        if (array) ++i_;
        std::vector<std::string> path;
        while (true) {
            path.push_back(parse_key());
            skip_spaces();
            if (!at_end() && peek() == '.') {
                ++i_;
                continue;
            }
            break;
        }
        for (int k = 0; k < (array ? 2 : 1); ++k) {
            if (at_end() || peek() != ']') fail("expected ']' closing table header");
            ++i_;
        }
        nlohmann::json* node = &root;
        for (std::size_t p = 0; p + 1 < path.size(); ++p) {
            nlohmann::json& next = (*node)[path[p]];
            if (next.is_null()) next = nlohmann::json::object();
            if (next.is_array()) node = &next.back();
            else if (next.is_object()) node = &next;
            else fail("'" + path[p] + "' is not a table");
        }
        nlohmann::json& leaf = (*node)[path.back()];
        if (array) {
            if (leaf.is_null()) leaf = nlohmann::json::array();
            if (!leaf.is_array()) fail("'" + path.back() + "' is not an array of tables");
            leaf.push_back(nlohmann::json::object());
            return &leaf.back();
        }
        if (leaf.is_null()) leaf = nlohmann::json::object();
        else if (!leaf.is_object() || opened_.count(&leaf)) fail("table '" + path.back() + "' defined twice");
        opened_.insert(&leaf);
        return &leaf;
    }

    std::string parse_string() {
        ++i_;
        std::string out;
        while (true) {
            if (at_end() || peek() == '\n') fail("unterminated string");
            char c = s_[i_++];
            if (c == '"') return out;
            if (c == '\\') {
                if (at_end()) fail("unterminated escape");
                const char e = s_[i_++];
                switch (e) {
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    default: fail(std::string("unsupported escape '\\") + e + "'");
                }
            } else {
                out += c;
            }
        }
    }

    nlohmann::json parse_value() {
        if (at_end()) fail("missing value");
        const char c = peek();
        if (c == '"') return parse_string();
        if (c == '[') {
            ++i_;
            nlohmann::json arr = nlohmann::json::array();
            while (true) {
                skip_array_space();
                if (at_end()) fail("unterminated array");
                if (peek() == ']') {
                    ++i_;
                    return arr;
                }
                arr.push_back(parse_value());
                skip_array_space();
                if (!at_end() && peek() == ',') {
                    ++i_;
                    continue;
                }
                skip_array_space();
                if (at_end() || peek() != ']') fail("expected ',' or ']' in array");
            }
        }
        const std::size_t start = i_;
        while (!at_end() && !std::isspace(static_cast<unsigned char>(peek())) && peek() != ',' && peek() != ']' && peek() != '#') ++i_;
        std::string tok = s_.substr(start, i_ - start);
        if (tok == "true") return true;
        if (tok == "false") return false;
        std::string clean;
        for (char ch : tok)
            if (ch != '_') clean += ch;
        if (clean.empty()) fail("missing value");
        try {
            std::size_t used = 0;
            const bool is_float = clean.find_first_of(".eE") != std::string::npos || clean == "inf" || clean == "nan";
            if (!is_float) {
                const long long v = std::stoll(clean, &used);
                if (used == clean.size()) return v;
            } else {
                const double v = std::stod(clean, &used);
                if (used == clean.size()) return v;
            }
        } catch (const std::exception&) {
        }
        fail("cannot parse value '" + tok + "'");
    }

    const std::string& s_;
    std::size_t i_ = 0;
    std::size_t line_ = 1;
    std::set<const nlohmann::json*> opened_;
};

}  // namespace detail

inline nlohmann::json parse(const std::string& text) { return detail::Parser(text).parse(); }

inline nlohmann::json parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open config " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    try {
        return parse(ss.str());
    } catch (const TomlError& e) {
        throw Error(path + ": " + e.what());
    }
}

}  // namespace gda::toml
