#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "cowrite/text/metrics.hpp"

namespace cowrite::text {
namespace {

// Full-matrix DP over codepoints, written independently of the rolling-row version.
std::size_t levenshtein_oracle(const std::u32string& a, const std::u32string& b) {
    std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t best = d[i - 1][j - 1] + (a[i - 1] != b[j - 1]);
            best = std::min(best, d[i - 1][j] + 1);
            best = std::min(best, d[i][j - 1] + 1);
            d[i][j] = best;
        }
    return d[a.size()][b.size()];
}

std::u32string random_u32(std::mt19937& rng, std::size_t max_len) {
    static const std::u32string alphabet = U"abcdé世";
    std::uniform_int_distribution<std::size_t> len(0, max_len);
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::u32string s(len(rng), U'a');
    for (auto& c : s) c = alphabet[pick(rng)];
    return s;
}

TEST(Levenshtein, Basics) {
    EXPECT_EQ(levenshtein("abc", "abc"), 0u);
    EXPECT_EQ(levenshtein("", "abc"), 3u);
    EXPECT_EQ(levenshtein("kitten", "sitting"), 3u);
    // Counted in codepoints, not bytes.
    EXPECT_EQ(levenshtein("机器", "机械"), 1u);
}

TEST(Levenshtein, MatchesDpOracleOnRandomPairs) {
    std::mt19937 rng(7);
    for (int t = 0; t < 1000; ++t) {
        auto a = random_u32(rng, 12);
        auto b = random_u32(rng, 12);
        ASSERT_EQ(levenshtein(utf8::encode(a), utf8::encode(b)), levenshtein_oracle(a, b));
    }
}

TEST(Levenshtein, MetricProperties) {
    std::mt19937 rng(11);
    for (int t = 0; t < 300; ++t) {
        auto x = utf8::encode(random_u32(rng, 10));
        auto y = utf8::encode(random_u32(rng, 10));
        auto z = utf8::encode(random_u32(rng, 10));
        EXPECT_EQ(levenshtein(x, x), 0u);
        EXPECT_EQ(levenshtein(x, y), levenshtein(y, x));
        EXPECT_LE(levenshtein(x, z), levenshtein(x, y) + levenshtein(y, z));
        EXPECT_LE(levenshtein(x, y), std::max(utf8::length(x), utf8::length(y)));
    }
}

TEST(Ncd, PhraseCounts) {
    EXPECT_EQ(lz77_phrase_count(U""), 0u);
    EXPECT_EQ(lz77_phrase_count(U"ab"), 2u);
    EXPECT_EQ(lz77_phrase_count(U"abab"), 3u);
    EXPECT_EQ(lz77_phrase_count(std::u32string(64, U'a')), 2u);
    EXPECT_EQ(lz77_phrase_count(U"abcabcabcx"), 5u);  // a b c abcabc x
}

TEST(Ncd, RepeatedCharacters) {
    std::string a(64, 'a');
    EXPECT_LE(ncd(a, a), 0.15);
}

TEST(Ncd, ShortDegenerate) {
    double d = ncd("ab", "ab");
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 0.5);
}

TEST(Ncd, SelfCloserThanUnrelated) {
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> ch('a', 'z');
    for (int t = 0; t < 100; ++t) {
        std::string x(64, 'a'), y(64, 'a');
        for (auto& c : x) c = static_cast<char>(ch(rng));
        for (auto& c : y) c = static_cast<char>(ch(rng));
        ASSERT_LT(ncd(x, x), ncd(x, y));
    }
}

TEST(Ncd, SymmetricAndBounded) {
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> ch('a', 'e');
    std::uniform_int_distribution<int> len(1, 30);
    for (int t = 0; t < 200; ++t) {
        std::string x(static_cast<std::size_t>(len(rng)), 'a'), y(static_cast<std::size_t>(len(rng)), 'a');
        for (auto& c : x) c = static_cast<char>(ch(rng));
        for (auto& c : y) c = static_cast<char>(ch(rng));
        double d = ncd(x, y);
        EXPECT_DOUBLE_EQ(d, ncd(y, x));
        EXPECT_GE(d, 0.0);
        EXPECT_LE(d, 1.2);
    }
}

TEST(Ncd, EmptyInputIsDomainError) {
    EXPECT_THROW(ncd("", "a"), DomainError);
    EXPECT_THROW(ncd("a", ""), DomainError);
}

TEST(RevisionDistance, Examples) {
    EXPECT_EQ(revision_distance("the red cat", "the red cat"), 0u);
    EXPECT_EQ(revision_distance("the red cat", "the blue cat"), 1u);
    EXPECT_EQ(revision_distance("a b c", "a b c d e"), 1u);
    EXPECT_EQ(revision_distance("a b c", "x b y"), 2u);
    EXPECT_EQ(revision_distance("These results suggest that the model improves performance.",
                                "These results suggest that the model improves performance only under low-noise "
                                "conditions."),
              1u);
}

TEST(RougeL, Examples) {
    EXPECT_DOUBLE_EQ(rouge_l("the cat sat", "the cat sat"), 1.0);
    EXPECT_DOUBLE_EQ(rouge_l("alpha beta", "gamma delta"), 0.0);
    EXPECT_NEAR(rouge_l("the cat sat", "the cat ran fast"), 4.0 / 7.0, 1e-9);
    EXPECT_DOUBLE_EQ(rouge_l("", ""), 0.0);
}

TEST(Bleu, IdenticalAndEmpty) {
    EXPECT_NEAR(bleu("the quick brown fox jumps", "the quick brown fox jumps"), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(bleu("", "the quick brown fox"), 0.0);
}

TEST(Bleu, HandComputedSharedBigram) {
    // candidate a b c d e / reference a b x y z w:
    // p1 = 2/5, p2 = 1/4 (bigram "a b"), p3 = 0 -> 1/(3+1), p4 = 0 -> 1/(2+1); BP = exp(1 - 6/5).
    double expected = std::exp(1.0 - 6.0 / 5.0) *
                      std::exp((std::log(2.0 / 5.0) + std::log(1.0 / 4.0) + std::log(1.0 / 4.0) + std::log(1.0 / 3.0)) /
                               4.0);
    EXPECT_NEAR(bleu("a b c d e", "a b x y z w"), expected, 1e-9);
}

TEST(Bleu, SmoothingCanBeDisabled) {
    EXPECT_DOUBLE_EQ(bleu("a b c d e", "a b x y z w", {.max_order = 4, .smoothing = false}), 0.0);
}

TEST(Bleu, ClippedCounts) {
    // "the the the" against "the cat": unigram matches clipped to 1 -> p1 = 1/3; no
    // higher-order matches, so p2 = 1/3, p3 = 1/2, p4 = 1/1 after add-one; BP = 1.
    double expected = std::exp((std::log(1.0 / 3.0) + std::log(1.0 / 3.0) + std::log(1.0 / 2.0) + std::log(1.0)) / 4.0);
    EXPECT_NEAR(bleu("the the the", "the cat"), expected, 1e-9);
}

TEST(Meteor, Examples) {
    // Six identical tokens: one chunk, penalty 0.5 / 6^3.
    EXPECT_NEAR(meteor("the cat sat on the mat", "the cat sat on the mat"), 1.0 - 0.5 / 216.0, 1e-9);
    EXPECT_DOUBLE_EQ(meteor("alpha beta", "gamma delta"), 0.0);
    EXPECT_NEAR(meteor("world hello", "hello world"), 0.5, 1e-9);
}

TEST(Scores, StayInUnitInterval) {
    std::mt19937 rng(13);
    const std::vector<std::string> words = {"a", "b", "c", "d", "the", "cat", ",", "."};
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
    std::uniform_int_distribution<int> len(0, 10);
    for (int t = 0; t < 300; ++t) {
        std::string x, y;
        for (int i = len(rng); i > 0; --i) x += words[pick(rng)] + " ";
        for (int i = len(rng); i > 0; --i) y += words[pick(rng)] + " ";
        for (double v : {rouge_l(x, y), bleu(x, y), meteor(x, y)}) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0 + 1e-12);
        }
        if (!tokenize(x).empty()) {
            EXPECT_DOUBLE_EQ(rouge_l(x, x), 1.0);
        }
    }
}

}  // namespace
}  // namespace cowrite::text
