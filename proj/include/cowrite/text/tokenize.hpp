#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cowrite/unicode.hpp"

namespace cowrite::text {

struct TokenizeOptions {
    bool keep_punct = true;  // emit punctuation marks as single-codepoint tokens
    bool fold_case = false;
};

/// The shared word tokenizer: splits on whitespace and punctuation; Han, kana
/// and Thai codepoints become one token each.
inline std::vector<std::string> tokenize(std::string_view text, TokenizeOptions opts = {}) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    };
    for (char32_t c : utf8::decode(text)) {
        if (uchar::is_space(c)) {
            flush();
        } else if (uchar::is_punct(c)) {
            flush();
            if (opts.keep_punct) {
                std::string p;
                utf8::append(p, c);
                out.push_back(std::move(p));
            }
        } else if (uchar::is_unsegmented(c)) {
            flush();
            std::string t;
            utf8::append(t, c);
            out.push_back(std::move(t));
        } else {
            utf8::append(cur, opts.fold_case ? uchar::fold(c) : c);
        }
    }
    flush();
    return out;
}

/// Case-folded tokens with punctuation removed; used by the overlap checks.
inline std::vector<std::string> normalized_tokens(std::string_view text) {
    return tokenize(text, {.keep_punct = false, .fold_case = true});
}

}  // namespace cowrite::text
