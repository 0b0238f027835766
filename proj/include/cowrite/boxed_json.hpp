#pragma once

// Pulls a JSON object out of free-form model output: the first \boxed{...}
// block when present, otherwise the first balanced {...} that parses.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "cowrite/errors.hpp"

namespace cowrite {

namespace detail {

/// Index one past the brace matching s[open], skipping braces inside JSON strings.
inline std::optional<std::size_t> match_brace(std::string_view s, std::size_t open) {
    int depth = 0;
    bool in_str = false;
    for (std::size_t k = open; k < s.size(); ++k) {
        const char c = s[k];
        if (in_str) {
            if (c == '\\') ++k;
            else if (c == '"') in_str = false;
            continue;
        }
        if (c == '"') in_str = true;
        else if (c == '{') ++depth;
        else if (c == '}' && --depth == 0) return k + 1;
    }
    return std::nullopt;
}

/// Drops commas that directly precede a closing bracket, outside strings.
inline std::string strip_trailing_commas(std::string_view s) {
    std::string out;
    bool in_str = false;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const char c = s[k];
        if (in_str) {
            out += c;
            if (c == '\\' && k + 1 < s.size()) out += s[++k];
            else if (c == '"') in_str = false;
            continue;
        }
        if (c == '"') in_str = true;
        if (c == ',') {
            std::size_t j = k + 1;
            while (j < s.size() && (s[j] == ' ' || s[j] == '\t' || s[j] == '\n' || s[j] == '\r')) ++j;
            if (j < s.size() && (s[j] == '}' || s[j] == ']')) continue;
        }
        out += c;
    }
    return out;
}

inline std::optional<nlohmann::json> try_object(std::string_view text) {
    auto j = nlohmann::json::parse(strip_trailing_commas(text), nullptr, false, true);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    return j;
}

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

inline std::string undouble_braces(std::string_view s) {
    std::string out;
    for (std::size_t k = 0; k < s.size(); ++k) {
        out += s[k];
        if ((s[k] == '{' || s[k] == '}') && k + 1 < s.size() && s[k + 1] == s[k]) ++k;
    }
    return out;
}

}  // namespace detail

/// For the boxed block, tries the block and then each layer obtained by peeling
/// one pair of outer braces (covers `\boxed{{...}}` and `\boxed{ {...} }`), then
/// the block with every doubled brace collapsed. `//` comments and trailing
/// commas are tolerated.
inline nlohmann::json extract_json_object(std::string_view response) {
    const std::string_view marker = "\\boxed{";
    if (auto at = response.find(marker); at != std::string_view::npos) {
        const std::size_t open = at + marker.size() - 1;
        if (auto end = detail::match_brace(response, open)) {
            const std::string_view block = response.substr(open, *end - open);
            std::string_view peel = block;
            while (peel.size() >= 2 && peel.front() == '{' && peel.back() == '}') {
                if (auto j = detail::try_object(peel)) return *j;
                peel = detail::trim(peel.substr(1, peel.size() - 2));
            }
            if (auto j = detail::try_object(detail::undouble_braces(block))) return *j;
        }
    }
    for (std::size_t k = response.find('{'); k != std::string_view::npos; k = response.find('{', k + 1)) {
        if (auto end = detail::match_brace(response, k)) {
            if (auto j = detail::try_object(response.substr(k, *end - k))) return *j;
        }
    }
    throw ParseError("no JSON object found in model response", std::string(response));
}

}  // namespace cowrite
