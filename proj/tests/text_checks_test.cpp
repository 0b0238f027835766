#include <gtest/gtest.h>

#include <regex>
#include <string>
#include <utility>
#include <vector>

#include "cowrite/text/checks.hpp"

namespace cowrite::text {
namespace {

TEST(DetectScript, Latin) {
    auto s = detect_script("Hello world");
    EXPECT_EQ(s.script, Script::latin);
    EXPECT_DOUBLE_EQ(s.confidence, 1.0);
}

TEST(DetectScript, HanSimplifiedAndTraditional) {
    EXPECT_EQ(detect_script("机器学习").script, Script::han_simplified);
    EXPECT_EQ(detect_script("機器學習").script, Script::han_traditional);
}

TEST(DetectScript, MixedBelowMajority) {
    auto s = detect_script("Hello 世界你好吗");  // 5 latin, 5 han
    EXPECT_EQ(s.script, Script::mixed);
    EXPECT_DOUBLE_EQ(s.confidence, 0.5);
    // Latin still holds >= 70% of the letters here.
    EXPECT_EQ(detect_script("Hello 世界 mixed half-and-half").script, Script::latin);
}

TEST(DetectScript, WhitespaceOnlyIsOther) {
    auto s = detect_script("   \n\t");
    EXPECT_EQ(s.script, Script::other);
    EXPECT_DOUBLE_EQ(s.confidence, 0.0);
    EXPECT_THROW(detect_script(""), DomainError);
}

TEST(CheckClosure, SpecExamples) {
    auto r = check_closure("He said (", "hello");
    ASSERT_FALSE(r.closed_ok);
    ASSERT_EQ(r.unclosed_pairs.size(), 1u);
    EXPECT_EQ(r.unclosed_pairs[0].opener, U'(');
    EXPECT_EQ(r.unclosed_pairs[0].position, 8u);

    EXPECT_TRUE(check_closure("```code", "x=1\n```").closed_ok);
    EXPECT_TRUE(check_closure("$a +", "b$ done").closed_ok);
}

TEST(CheckClosure, FenceKinds) {
    auto r = check_closure("```python\nx = (1", "");
    ASSERT_EQ(r.unclosed_fences.size(), 1u);
    EXPECT_EQ(r.unclosed_fences[0].kind, FenceKind::code_fence);
    EXPECT_TRUE(r.unclosed_pairs.empty());  // brackets inside code are not tracked

    r = check_closure("Use `grep", " -r");
    ASSERT_EQ(r.unclosed_fences.size(), 1u);
    EXPECT_EQ(r.unclosed_fences[0].kind, FenceKind::inline_code);

    r = check_closure("$$\\int_0^1", " x dx");
    ASSERT_EQ(r.unclosed_fences.size(), 1u);
    EXPECT_EQ(r.unclosed_fences[0].kind, FenceKind::latex_display);

    r = check_closure("where \\(x", " > 0");
    ASSERT_EQ(r.unclosed_fences.size(), 1u);
    EXPECT_EQ(r.unclosed_fences[0].kind, FenceKind::latex_inline);
}

TEST(CheckClosure, CurrencyIsNotMath) {
    EXPECT_TRUE(check_closure("It costs $5 and", " $10 more.").closed_ok);
}

TEST(CheckClosure, EmphasisOnlyWhenContextUsesIt) {
    EXPECT_TRUE(check_closure("compute 2**3", " and 4**2").closed_ok);
    auto r = check_closure("A **bold** claim and **another", " one");
    ASSERT_EQ(r.unclosed_fences.size(), 1u);
    EXPECT_EQ(r.unclosed_fences[0].kind, FenceKind::markdown_emphasis);
    EXPECT_TRUE(check_closure("A **bold** claim and **another", " one**.").closed_ok);
}

TEST(CheckClosure, CjkQuotesAndCompletionOpeners) {
    EXPECT_FALSE(check_closure("他说「你好", "吗").closed_ok);
    EXPECT_TRUE(check_closure("他说「你好", "吗」").closed_ok);
    auto r = check_closure("fine", " then [a");
    ASSERT_EQ(r.unclosed_pairs.size(), 1u);
    EXPECT_EQ(r.unclosed_pairs[0].position, 10u);
}

TEST(CheckClosure, MismatchedCloserReportsInnerOpeners) {
    auto r = check_closure("f(a[b", ") done");
    ASSERT_EQ(r.unclosed_pairs.size(), 1u);
    EXPECT_EQ(r.unclosed_pairs[0].opener, U'[');
}

// Independent oracle over the concatenated string: strip code and math spans
// with regular expressions, then balance what remains with a plain stack.
bool closure_oracle(const std::string& s_in) {
    std::string s = s_in;
    auto count = [](const std::string& str, const std::string& pat) {
        std::size_t n = 0;
        for (std::size_t p = str.find(pat); p != std::string::npos; p = str.find(pat, p + pat.size())) ++n;
        return n;
    };
    if (count(s, "```") % 2) return false;
    s = std::regex_replace(s, std::regex("```[\\s\\S]*?```"), " ");
    if (count(s, "`") % 2) return false;
    s = std::regex_replace(s, std::regex("`[^`]*`"), " ");
    if (count(s, "$$") % 2) return false;
    s = std::regex_replace(s, std::regex("\\$\\$[\\s\\S]*?\\$\\$"), " ");
    s = std::regex_replace(s, std::regex("\\$[^\\s\\d$][^$]*?[^\\s$]\\$|\\$[^\\s\\d$]\\$"), " ");
    if (std::regex_search(s, std::regex("\\$[^\\s\\d]"))) return false;
    std::vector<char> st;
    for (char c : s) {
        if (c == '(' || c == '[' || c == '{') st.push_back(c);
        if (c == '"') {
            if (!st.empty() && st.back() == '"') st.pop_back();
            else st.push_back(c);
        }
        if (c == ')' || c == ']' || c == '}') {
            char want = c == ')' ? '(' : c == ']' ? '[' : '{';
            if (!st.empty() && st.back() == want) st.pop_back();
            else if (std::find(st.begin(), st.end(), want) != st.end()) return false;
        }
    }
    return st.empty();
}

TEST(CheckClosure, AgreesWithConcatenationOracle) {
    const std::vector<std::pair<std::string, std::string>> cases = {
        {"He said (", "hello"},
        {"He said (", "hello)"},
        {"```code", "x=1\n```"},
        {"```code", "x=1"},
        {"$a +", "b$ done"},
        {"$a +", "b done"},
        {"list [1, 2", ", 3]"},
        {"list [1, 2", ", 3"},
        {"map {a: (b", ")}"},
        {"map {a: (b", "}"},
        {"\"quoted", " text\""},
        {"\"quoted", " text"},
        {"plain", " text"},
        {"", "(a)"},
        {"", "(a"},
        {"`code", "` after"},
        {"`code", " after"},
        {"$$x", "+y$$"},
        {"$$x", "+y"},
        {"price $5", " total"},
        {"f(g(h(", ")))"},
        {"f(g(h(", "))"},
        {"```\n(", "\n```"},
        {"a ) b", " c"},
        {"[link](", "http://x)"},
        {"[link](", "http://x"},
        {"math $x$ and (", "y)"},
        {"math $x$ and (", "y"},
        {"{", "}"},
        {"{[", "]}"},
    };
    ASSERT_EQ(cases.size(), 30u);
    for (const auto& [ctx, comp] : cases) {
        EXPECT_EQ(check_closure(ctx, comp).closed_ok, closure_oracle(ctx + comp)) << ctx << " | " << comp;
    }
}

TEST(PrefixRepetition, Examples) {
    EXPECT_DOUBLE_EQ(prefix_repetition_ratio("Although it may", "Although it may appear quite primitive"), 0.5);
    EXPECT_DOUBLE_EQ(prefix_repetition_ratio("The results were", "clear and convincing"), 0.0);
    EXPECT_DOUBLE_EQ(prefix_repetition_ratio("we saw that it may", "it may"), 1.0);
    EXPECT_THROW(prefix_repetition_ratio("x", ""), DomainError);
}

TEST(EarlyOverlap, Examples) {
    EXPECT_DOUBLE_EQ(early_overlap_ratio("PVDF membrane, transfer", "PVDF membrane, transfer tank, shaker"), 1.0);
    EXPECT_DOUBLE_EQ(early_overlap_ratio("alpha beta", "gamma delta"), 0.0);
    EXPECT_DOUBLE_EQ(
        early_overlap_ratio("PVDF membrane.", "PVDF membrane, transfer tank, electrophoretic transfer apparatus, shaker"),
        1.0);
    EXPECT_DOUBLE_EQ(early_overlap_ratio("The cat sat down", "the cat ran"), 0.5);
}

TEST(Ratios, StayInUnitInterval) {
    const std::vector<std::string> texts = {"a b c", "c d", "a", "x y z a b", "机器 学习", "b c d e"};
    for (const auto& x : texts)
        for (const auto& y : texts) {
            double p = prefix_repetition_ratio(x, y);
            double e = early_overlap_ratio(x, y);
            EXPECT_GE(p, 0.0);
            EXPECT_LE(p, 1.0);
            EXPECT_GE(e, 0.0);
            EXPECT_LE(e, 1.0);
        }
}

}  // namespace
}  // namespace cowrite::text
