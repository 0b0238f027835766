#pragma once

// Mechanically checkable parts of the acceptance checklist: script detection,
// delimiter closure, start repetition and early overlap with the reference.

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "cowrite/errors.hpp"
#include "cowrite/text/han_variants.hpp"
#include "cowrite/text/tokenize.hpp"
#include "cowrite/unicode.hpp"

namespace cowrite::text {

enum class Script { latin, han_simplified, han_traditional, mixed, other };

inline const char* to_string(Script s) {
    switch (s) {
        case Script::latin: return "latin";
        case Script::han_simplified: return "han_simplified";
        case Script::han_traditional: return "han_traditional";
        case Script::mixed: return "mixed";
        case Script::other: return "other";
    }
    return "other";
}

struct ScriptClass {
    Script script = Script::other;
    double confidence = 0.0;  // share of letter codepoints held by the dominant class
};

inline constexpr double kScriptMajority = 0.70;

inline ScriptClass detect_script(std::string_view text) {
    if (text.empty()) throw DomainError("detect_script: empty text");
    std::size_t latin = 0, han = 0, other = 0, simp = 0, trad = 0;
    for (char32_t c : utf8::decode(text)) {
        if (uchar::is_latin_letter(c)) {
            ++latin;
        } else if (uchar::is_han(c)) {
            ++han;
            if (std::binary_search(han::simplified_only.begin(), han::simplified_only.end(), c)) ++simp;
            if (std::binary_search(han::traditional_only.begin(), han::traditional_only.end(), c)) ++trad;
        } else if (uchar::is_other_letter(c)) {
            ++other;
        }
    }
    const std::size_t total = latin + han + other;
    if (total == 0) return {Script::other, 0.0};
    const double t = static_cast<double>(total);
    const double sl = static_cast<double>(latin) / t;
    const double sh = static_cast<double>(han) / t;
    const double so = static_cast<double>(other) / t;
    const double top = std::max({sl, sh, so});
    if (top < kScriptMajority) return {Script::mixed, top};
    if (sl == top) return {Script::latin, sl};
    if (sh == top) return {trad > simp ? Script::han_traditional : Script::han_simplified, sh};
    return {Script::other, so};
}

enum class FenceKind { code_fence, inline_code, latex_display, latex_inline, markdown_emphasis };

inline const char* to_string(FenceKind k) {
    switch (k) {
        case FenceKind::code_fence: return "code-fence";
        case FenceKind::inline_code: return "inline-code";
        case FenceKind::latex_display: return "latex-display";
        case FenceKind::latex_inline: return "latex-inline";
        case FenceKind::markdown_emphasis: return "markdown-emphasis";
    }
    return "code-fence";
}

struct OpenPair {
    char32_t opener;
    std::size_t position;  // codepoint offset in context followed by completion
};

struct OpenFence {
    FenceKind kind;
    std::size_t position;
};

struct ClosureReport {
    std::vector<OpenPair> unclosed_pairs;
    std::vector<OpenFence> unclosed_fences;
    bool closed_ok = true;
};

namespace detail {

inline char32_t closer_for(char32_t opener) {
    switch (opener) {
        case U'(': return U')';
        case U'[': return U']';
        case U'{': return U'}';
        case U'“': return U'”';
        case U'「': return U'」';
        case U'『': return U'』';
        case U'（': return U'）';
        case U'【': return U'】';
        case U'《': return U'》';
        case U'"': return U'"';
        default: return 0;
    }
}

inline bool is_closer(char32_t c) {
    switch (c) {
        case U')': case U']': case U'}': case U'”': case U'」':
        case U'』': case U'）': case U'】': case U'》':
            return true;
        default:
            return false;
    }
}

inline bool starts_with(const std::u32string& s, std::size_t k, std::u32string_view what) {
    return s.compare(k, what.size(), what) == 0;
}

/// Emphasis markers are only tracked once the context shows a balanced `**` pair.
inline bool context_uses_emphasis(const std::u32string& ctx) {
    std::size_t count = 0;
    for (std::size_t k = 0; k + 1 < ctx.size(); ++k) {
        if (ctx[k] == U'*' && ctx[k + 1] == U'*') {
            ++count;
            ++k;
        }
    }
    return count >= 2;
}

}  // namespace detail

/// Scans the context and then the completion as one stream and reports every
/// quote, bracket, code fence, math span or emphasis run still open at the end.
/// Bracket tracking is suspended inside code and math. A `$` opens inline math
/// only when followed by a non-space, non-digit character and closes only after
/// a non-space character.
inline ClosureReport check_closure(std::string_view context, std::string_view completion) {
    const std::u32string ctx = utf8::decode(context);
    std::u32string s = ctx + utf8::decode(completion);
    const bool track_emphasis = detail::context_uses_emphasis(ctx);

    std::vector<OpenPair> stack;
    std::vector<OpenPair> abandoned;
    enum class Math { none, dollar, paren };
    long code_fence = -1, inline_code = -1, display = -1, inline_math = -1, emphasis = -1;
    Math display_kind = Math::none, inline_kind = Math::none;

    std::size_t k = 0;
    while (k < s.size()) {
        const char32_t c = s[k];
        if (code_fence >= 0) {
            if (detail::starts_with(s, k, U"```")) {
                code_fence = -1;
                k += 3;
            } else {
                ++k;
            }
            continue;
        }
        if (inline_code >= 0) {
            if (c == U'`') inline_code = -1;
            ++k;
            continue;
        }
        if (detail::starts_with(s, k, U"```")) {
            code_fence = static_cast<long>(k);
            k += 3;
            continue;
        }
        if (c == U'`') {
            inline_code = static_cast<long>(k);
            ++k;
            continue;
        }
        if (c == U'\\' && k + 1 < s.size()) {
            const char32_t n = s[k + 1];
            if (n == U'(' && display < 0 && inline_math < 0) {
                inline_math = static_cast<long>(k);
                inline_kind = Math::paren;
            } else if (n == U')' && inline_math >= 0 && inline_kind == Math::paren) {
                inline_math = -1;
            } else if (n == U'[' && display < 0 && inline_math < 0) {
                display = static_cast<long>(k);
                display_kind = Math::paren;
            } else if (n == U']' && display >= 0 && display_kind == Math::paren) {
                display = -1;
            }
            k += 2;
            continue;
        }
        if (display >= 0) {
            if (display_kind == Math::dollar && detail::starts_with(s, k, U"$$")) {
                display = -1;
                k += 2;
            } else {
                ++k;
            }
            continue;
        }
        if (inline_math >= 0) {
            if (inline_kind == Math::dollar && c == U'$' && k > 0 && !uchar::is_space(s[k - 1]))
                inline_math = -1;
            ++k;
            continue;
        }
        if (detail::starts_with(s, k, U"$$")) {
            display = static_cast<long>(k);
            display_kind = Math::dollar;
            k += 2;
            continue;
        }
        if (c == U'$') {
            if (k + 1 < s.size() && !uchar::is_space(s[k + 1]) && !uchar::is_digit(s[k + 1])) {
                inline_math = static_cast<long>(k);
                inline_kind = Math::dollar;
            }
            ++k;
            continue;
        }
        if (track_emphasis && detail::starts_with(s, k, U"**")) {
            emphasis = emphasis >= 0 ? -1 : static_cast<long>(k);
            k += 2;
            continue;
        }
        if (c == U'"') {
            if (!stack.empty() && stack.back().opener == U'"')
                stack.pop_back();
            else
                stack.push_back({c, k});
        } else if (detail::closer_for(c) != 0) {
            stack.push_back({c, k});
        } else if (detail::is_closer(c)) {
            auto it = std::find_if(stack.rbegin(), stack.rend(),
                                   [c](const OpenPair& p) { return detail::closer_for(p.opener) == c; });
            if (it != stack.rend()) {
                auto base = it.base() - 1;
                abandoned.insert(abandoned.end(), base + 1, stack.end());
                stack.erase(base, stack.end());
            }
        }
        ++k;
    }

    ClosureReport report;
    report.unclosed_pairs = std::move(abandoned);
    report.unclosed_pairs.insert(report.unclosed_pairs.end(), stack.begin(), stack.end());
    std::sort(report.unclosed_pairs.begin(), report.unclosed_pairs.end(),
              [](const OpenPair& a, const OpenPair& b) { return a.position < b.position; });
    auto fence = [&](long pos, FenceKind kind) {
        if (pos >= 0) report.unclosed_fences.push_back({kind, static_cast<std::size_t>(pos)});
    };
    fence(code_fence, FenceKind::code_fence);
    fence(inline_code, FenceKind::inline_code);
    fence(display, FenceKind::latex_display);
    fence(inline_math, FenceKind::latex_inline);
    fence(emphasis, FenceKind::markdown_emphasis);
    report.closed_ok = report.unclosed_pairs.empty() && report.unclosed_fences.empty();
    return report;
}

/// Number of tokens in the longest suffix of the context that the completion
/// starts with (case-folded, punctuation dropped).
inline std::size_t repeated_prefix_tokens(std::string_view context, std::string_view completion) {
    const auto ctx = normalized_tokens(context);
    const auto comp = normalized_tokens(completion);
    for (std::size_t k = std::min(ctx.size(), comp.size()); k > 0; --k) {
        if (std::equal(ctx.end() - static_cast<std::ptrdiff_t>(k), ctx.end(), comp.begin())) return k;
    }
    return 0;
}

inline double prefix_repetition_ratio(std::string_view context, std::string_view completion) {
    if (completion.empty()) throw DomainError("prefix_repetition_ratio: empty completion");
    const auto n = normalized_tokens(completion).size();
    if (n == 0) return 0.0;
    return static_cast<double>(repeated_prefix_tokens(context, completion)) / static_cast<double>(n);
}

/// Share of completion tokens covered by its longest common prefix with the reference.
inline double early_overlap_ratio(std::string_view completion, std::string_view reference) {
    if (completion.empty()) throw DomainError("early_overlap_ratio: empty completion");
    const auto comp = normalized_tokens(completion);
    const auto ref = normalized_tokens(reference);
    if (comp.empty()) return 0.0;
    std::size_t k = 0;
    while (k < comp.size() && k < ref.size() && comp[k] == ref[k]) ++k;
    return static_cast<double>(k) / static_cast<double>(comp.size());
}

}  // namespace cowrite::text
