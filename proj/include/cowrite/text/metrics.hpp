#pragma once

// Output-only baseline metrics: character edit distance, compression distance,
// word-level revision distance and the n-gram / alignment similarity scores.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cowrite/errors.hpp"
#include "cowrite/text/tokenize.hpp"
#include "cowrite/unicode.hpp"

namespace cowrite::text {

/// Unit-cost edit distance over Unicode scalar values.
inline std::size_t levenshtein(std::string_view a, std::string_view b) {
    const std::u32string x = utf8::decode(a);
    const std::u32string y = utf8::decode(b);
    if (x.empty()) return y.size();
    if (y.empty()) return x.size();
    std::vector<std::size_t> row(y.size() + 1);
    for (std::size_t j = 0; j <= y.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= x.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= y.size(); ++j) {
            std::size_t up = row[j];
            std::size_t sub = diag + (x[i - 1] == y[j - 1] ? 0 : 1);
            row[j] = std::min({up + 1, row[j - 1] + 1, sub});
            diag = up;
        }
    }
    return row[y.size()];
}

/// Phrase count of the self-referential LZ77 factorization: each phrase is the
/// longest prefix of the remainder that also starts at an earlier position
/// (overlap allowed), or a single fresh codepoint when no such prefix exists.
inline std::size_t lz77_phrase_count(std::u32string_view s) {
    const std::size_t n = s.size();
    std::size_t phrases = 0;
    std::size_t i = 0;
    std::vector<std::size_t> z;
    std::u32string buf;
    while (i < n) {
        // Z-function of (s[i..] + sentinel + s[0..i)) gives LCP(s[i..], s[j..]) for j < i.
        const std::size_t m = n - i;
        buf.assign(s.substr(i));
        buf.push_back(static_cast<char32_t>(0x110000));
        buf.append(s.substr(0, n));
        const std::size_t len = buf.size();
        z.assign(len, 0);
        std::size_t l = 0, r = 0;
        for (std::size_t k = 1; k < len; ++k) {
            if (k < r) z[k] = std::min(r - k, z[k - l]);
            while (k + z[k] < len && buf[z[k]] == buf[k + z[k]]) ++z[k];
            if (k + z[k] > r) {
                l = k;
                r = k + z[k];
            }
        }
        std::size_t best = 0;
        for (std::size_t j = 0; j < i; ++j) best = std::max(best, std::min(z[m + 1 + j], m));
        i += best == 0 ? 1 : best;
        ++phrases;
    }
    return phrases;
}

/// Normalized compression distance with the LZ77 phrase count as compressor.
/// The joint term takes the smaller of both concatenation orders, so the result
/// is symmetric. Clamped to [0, 1.2].
inline double ncd(std::string_view a, std::string_view b) {
    if (a.empty() || b.empty()) throw DomainError("ncd: inputs must be non-empty");
    const std::u32string x = utf8::decode(a);
    const std::u32string y = utf8::decode(b);
    const double cx = static_cast<double>(lz77_phrase_count(x));
    const double cy = static_cast<double>(lz77_phrase_count(y));
    const double cxy = static_cast<double>(std::min(lz77_phrase_count(x + y), lz77_phrase_count(y + x)));
    const double d = (cxy - std::min(cx, cy)) / std::max(cx, cy);
    return std::clamp(d, 0.0, 1.2);
}

namespace detail {

template <class T>
std::vector<std::vector<std::size_t>> lcs_table(const std::vector<T>& a, const std::vector<T>& b) {
    std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
    for (std::size_t i = a.size(); i-- > 0;)
        for (std::size_t j = b.size(); j-- > 0;)
            t[i][j] = a[i] == b[j] ? t[i + 1][j + 1] + 1 : std::max(t[i + 1][j], t[i][j + 1]);
    return t;
}

}  // namespace detail

/// Length of the longest common subsequence of two token lists.
inline std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

enum class DiffOp { keep, insert, remove };

/// Word-level LCS diff script turning `a` into `b`.
inline std::vector<DiffOp> word_diff(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    const auto t = detail::lcs_table(a, b);
    std::vector<DiffOp> ops;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) {
            ops.push_back(DiffOp::keep);
            ++i;
            ++j;
        } else if (t[i + 1][j] >= t[i][j + 1]) {
            ops.push_back(DiffOp::remove);
            ++i;
        } else {
            ops.push_back(DiffOp::insert);
            ++j;
        }
    }
    for (; i < a.size(); ++i) ops.push_back(DiffOp::remove);
    for (; j < b.size(); ++j) ops.push_back(DiffOp::insert);
    return ops;
}

/// Number of contiguous ADD / DELETE / REPLACE blocks in the word diff of a vs b.
/// A deletion run adjacent to an insertion run counts once, as a REPLACE.
inline std::size_t revision_distance(std::string_view a, std::string_view b) {
    const auto ops = word_diff(tokenize(a), tokenize(b));
    std::size_t blocks = 0;
    bool in_block = false;
    for (DiffOp op : ops) {
        if (op == DiffOp::keep) {
            in_block = false;
        } else if (!in_block) {
            ++blocks;
            in_block = true;
        }
    }
    return blocks;
}

/// ROUGE-L F1 (beta = 1) over word tokens.
inline double rouge_l(std::string_view candidate, std::string_view reference) {
    const auto c = tokenize(candidate);
    const auto r = tokenize(reference);
    if (c.empty() || r.empty()) return 0.0;
    const double lcs = static_cast<double>(lcs_length(c, r));
    if (lcs == 0.0) return 0.0;
    const double p = lcs / static_cast<double>(c.size());
    const double rec = lcs / static_cast<double>(r.size());
    return 2.0 * p * rec / (p + rec);
}

struct BleuOptions {
    int max_order = 4;
    bool smoothing = true;  // add-one on zero match counts for orders >= 2
};

/// Sentence BLEU with clipped n-gram counts, uniform weights and brevity penalty.
inline double bleu(std::string_view candidate, std::string_view reference, BleuOptions opts = {}) {
    const auto c = tokenize(candidate);
    const auto r = tokenize(reference);
    if (c.empty()) return 0.0;
    auto ngrams = [](const std::vector<std::string>& toks, std::size_t n) {
        std::map<std::vector<std::string>, std::size_t> counts;
        for (std::size_t i = 0; i + n <= toks.size(); ++i)
            ++counts[std::vector<std::string>(toks.begin() + static_cast<std::ptrdiff_t>(i),
                                              toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
        return counts;
    };
    double log_sum = 0.0;
    for (int n = 1; n <= opts.max_order; ++n) {
        const auto cn = ngrams(c, static_cast<std::size_t>(n));
        const auto rn = ngrams(r, static_cast<std::size_t>(n));
        std::size_t total = c.size() >= static_cast<std::size_t>(n) ? c.size() - static_cast<std::size_t>(n) + 1 : 0;
        std::size_t matched = 0;
        for (const auto& [gram, count] : cn) {
            auto it = rn.find(gram);
            if (it != rn.end()) matched += std::min(count, it->second);
        }
        double p = 0.0;
        if (matched > 0) {
            p = static_cast<double>(matched) / static_cast<double>(total);
        } else if (n >= 2 && opts.smoothing) {
            p = 1.0 / static_cast<double>(total + 1);
        } else {
            return 0.0;
        }
        log_sum += std::log(p);
    }
    const double cl = static_cast<double>(c.size());
    const double rl = static_cast<double>(r.size());
    const double bp = cl < rl ? std::exp(1.0 - rl / cl) : 1.0;
    return bp * std::exp(log_sum / opts.max_order);
}

struct MeteorAlignment {
    std::size_t matches = 0;
    std::size_t chunks = 0;
};

/// Exact-match unigram alignment. Each candidate token takes the reference
/// occurrence that extends the current chunk when one is free, otherwise the
/// earliest unused occurrence.
inline MeteorAlignment meteor_align(const std::vector<std::string>& c, const std::vector<std::string>& r) {
    std::vector<bool> used(r.size(), false);
    std::vector<long> align(c.size(), -1);
    for (std::size_t i = 0; i < c.size(); ++i) {
        long pick = -1;
        if (i > 0 && align[i - 1] >= 0) {
            auto next = static_cast<std::size_t>(align[i - 1] + 1);
            if (next < r.size() && !used[next] && r[next] == c[i]) pick = static_cast<long>(next);
        }
        if (pick < 0) {
            for (std::size_t j = 0; j < r.size(); ++j) {
                if (!used[j] && r[j] == c[i]) {
                    pick = static_cast<long>(j);
                    break;
                }
            }
        }
        if (pick >= 0) {
            used[static_cast<std::size_t>(pick)] = true;
            align[i] = pick;
        }
    }
    MeteorAlignment out;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (align[i] < 0) continue;
        ++out.matches;
        bool continues = i > 0 && align[i - 1] >= 0 && align[i] == align[i - 1] + 1;
        if (!continues) ++out.chunks;
    }
    return out;
}

/// METEOR with exact matching only: Fmean = 10PR / (R + 9P), fragmentation
/// penalty 0.5 * (chunks / matches)^3.
inline double meteor(std::string_view candidate, std::string_view reference) {
    const auto c = tokenize(candidate);
    const auto r = tokenize(reference);
    if (c.empty() || r.empty()) return 0.0;
    const auto a = meteor_align(c, r);
    if (a.matches == 0) return 0.0;
    const double m = static_cast<double>(a.matches);
    const double p = m / static_cast<double>(c.size());
    const double rec = m / static_cast<double>(r.size());
    const double fmean = 10.0 * p * rec / (rec + 9.0 * p);
    const double frag = static_cast<double>(a.chunks) / m;
    const double penalty = 0.5 * frag * frag * frag;
    return fmean * (1.0 - penalty);
}

}  // namespace cowrite::text
