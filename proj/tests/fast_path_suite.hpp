#pragma once

// Thirty hand-built checklist cases that the deterministic shortcuts must
// decide, each with the rule it should cite and an oracle for that rule.

#include <string>
#include <vector>

#include "cowrite/text/tokenize.hpp"
#include "cowrite/unicode.hpp"

namespace cowrite::testing_support {

struct FastPathCase {
    std::string context;
    std::string reference;
    std::string completion;
    int rule;  // 1 repetition, 4 early overlap, 5 unclosed pair, 6 unclosed fence
};

inline const std::vector<FastPathCase>& fast_path_cases() {
    static const std::vector<FastPathCase> cases = {
        // unclosed pairs opened in the context
        {"He said (", "goodbye now", "hello there", 5},
        {"The values [1, 2", "3, 4] were kept.", "and three follow.", 5},
        {"She wrote {alpha", "delta}", "beta gamma", 5},
        {"他说：「今天", "下雨了」", "阳光明媚", 5},
        {"Results (see Table 2", "were mixed).", "show a clear trend.", 5},
        {"The so-called “model", "fails”", "works well", 5},
        {"The function f(x", "= x^2) is smooth", "is smooth", 5},
        {"Note [1", "] refers", "points to the appendix", 5},
        // unclosed fences opened in the context
        {"```python\nx = 1", "\nprint(x)\n```", "\ny = 2", 6},
        {"Let $a + b", "= d$ holds", " + c", 6},
        {"$$\n\\int_0^1 f", "\\, dt\n$$", "(x) dx", 6},
        {"where \\(x", "\\) is positive", " > 0 holds", 6},
        {"A **bold** claim and **another", "point**.", " one", 6},
        {"Code: `foo(", "x)` done", "bar", 6},
        {"```\nfirst line", "\n```", "\nsecond line", 6},
        {"Inline $x", "^2$ term", " squared", 6},
        // completion restarts by repeating the end of the context
        {"Although it may", "seem odd", "Although it may appear quite primitive", 1},
        {"we saw that it may", "be true", "it may rain", 1},
        {"The model performs well", "on benchmarks", "performs well on all benchmarks", 1},
        {"In this paper we propose", "a new method", "we propose a new method", 1},
        {"机器学习", "是一种方法", "学习是一种方法", 1},
        {"Once upon a time", "there lived", "upon a time there lived a king", 1},
        {"The results, however, were", "surprising", "however were surprising", 1},
        {"He ran fast. He ran", "home", "He ran again", 1},
        // completion is mostly a prefix of the reference
        {"We used", "PVDF membrane, transfer tank, shaker", "PVDF membrane, transfer", 4},
        {"The cat", "sat on the mat today", "sat on the mat", 4},
        {"Proteins were", "separated by SDS-PAGE and stained", "separated by SDS-PAGE", 4},
        {"She opened", "the door slowly, then left", "the door slowly and", 4},
        {"In 2020,", "The team released a model", "the team released", 4},
        {"Water boils", "at 100 degrees Celsius", "at 100 degrees", 4},
    };
    return cases;
}

// Rule 1: the completion's first k >= min_tokens tokens equal the context's last k.
inline bool repetition_oracle(const std::string& context, const std::string& completion, std::size_t min_tokens = 2) {
    const auto c = text::normalized_tokens(context), s = text::normalized_tokens(completion);
    for (std::size_t k = min_tokens; k <= c.size() && k <= s.size(); ++k) {
        bool same = true;
        for (std::size_t i = 0; i < k && same; ++i) same = c[c.size() - k + i] == s[i];
        if (same) return true;
    }
    return false;
}

// Rule 4: the shared leading run of tokens covers more than half the completion.
inline bool overlap_oracle(const std::string& completion, const std::string& reference, double threshold = 0.5) {
    const auto s = text::normalized_tokens(completion), r = text::normalized_tokens(reference);
    std::size_t k = 0;
    for (; k < s.size() && k < r.size(); ++k)
        if (s[k] != r[k]) break;
    return !s.empty() && static_cast<double>(k) > threshold * static_cast<double>(s.size());
}

// Rule 5: some bracket or quote opened inside the context is still open after
// context + completion. Plain stack over the concatenation.
inline bool open_pair_oracle(const std::string& context, const std::string& completion) {
    const std::u32string all = utf8::decode(context + completion);
    const std::size_t ctx_len = utf8::decode(context).size();
    const std::u32string open = U"([{「『“", close = U")]}」』”";
    std::vector<std::pair<char32_t, std::size_t>> st;
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (auto o = open.find(all[i]); o != std::u32string::npos) st.push_back({all[i], i});
        if (auto c = close.find(all[i]); c != std::u32string::npos && !st.empty() && st.back().first == open[c])
            st.pop_back();
    }
    for (const auto& [ch, at] : st)
        if (at < ctx_len) return true;
    return false;
}

// Rule 6: an odd count of some fence marker in the concatenation.
inline bool open_fence_oracle(const std::string& context, const std::string& completion) {
    std::string s = context + completion;
    auto count_and_strip = [&s](const std::string& marker) {
        std::size_t n = 0;
        for (std::size_t p = s.find(marker); p != std::string::npos; p = s.find(marker)) {
            s.replace(p, marker.size(), " ");
            ++n;
        }
        return n;
    };
    if (count_and_strip("```") % 2) return true;
    if (count_and_strip("`") % 2) return true;
    if (count_and_strip("$$") % 2) return true;
    if (count_and_strip("**") % 2) return true;
    if (count_and_strip("\\(") != count_and_strip("\\)")) return true;
    return count_and_strip("$") % 2 == 1;
}

}  // namespace cowrite::testing_support
