#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "cowrite/stats.hpp"

namespace cowrite::stats {
namespace {

// Closed-form product-moment correlation in long double.
long double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    long double n = x.size(), sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += (long double)x[i] * x[i];
        syy += (long double)y[i] * y[i];
        sxy += (long double)x[i] * y[i];
    }
    return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

// Rank correlation for tie-free data via the squared rank differences.
double spearman_d2_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    auto rank = [&](const std::vector<double>& v) {
        std::vector<std::size_t> r(n);
        for (std::size_t i = 0; i < n; ++i)
            r[i] = 1 + std::count_if(v.begin(), v.end(), [&](double o) { return o < v[i]; });
        return r;
    };
    const auto rx = rank(x), ry = rank(y);
    long long d2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const long long d = (long long)rx[i] - (long long)ry[i];
        d2 += d * d;
    }
    return 1.0 - 6.0 * (double)d2 / ((double)n * ((double)n * n - 1));
}

TEST(Correlation, PerfectLinearity) {
    const std::vector<double> xs = {1, 2, 3, 4, 5.5};
    std::vector<double> up, down;
    for (double x : xs) {
        up.push_back(2 * x + 1);
        down.push_back(-x);
    }
    EXPECT_NEAR(pearson(xs, up), 1.0, 1e-12);
    EXPECT_NEAR(spearman(xs, up), 1.0, 1e-12);
    EXPECT_NEAR(pearson(xs, down), -1.0, 1e-12);
}

TEST(Correlation, HandRankedExample) {
    EXPECT_NEAR(spearman({1, 2, 3, 4}, {1, 3, 2, 4}), 0.8, 1e-12);
}

TEST(Correlation, AverageRanksForTies) {
    EXPECT_EQ(average_ranks({10, 20, 20, 30}), (std::vector<double>{1, 2.5, 2.5, 4}));
    EXPECT_EQ(average_ranks({5, 5, 5}), (std::vector<double>{2, 2, 2}));
}

TEST(Correlation, Errors) {
    EXPECT_THROW(pearson({1, 1, 1}, {1, 2, 3}), UndefinedCorrelationError);
    EXPECT_THROW(spearman({1, 2, 3}, {4, 4, 4}), UndefinedCorrelationError);
    EXPECT_THROW(pearson({1, 2}, {1, 2, 3}), LengthMismatchError);
    EXPECT_THROW(pearson({1}, {1}), DomainError);
}

TEST(Correlation, MatchesClosedFormsOnRandomData) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> z(0, 1);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 5 + t % 40;
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = z(rng);
            y[i] = 0.3 * x[i] + z(rng);
        }
        EXPECT_NEAR(pearson(x, y), (double)pearson_oracle(x, y), 1e-9);
        EXPECT_NEAR(spearman(x, y), pearson(average_ranks(x), average_ranks(y)), 1e-9);
        EXPECT_NEAR(spearman(x, y), spearman_d2_oracle(x, y), 1e-9);
        const double r = spearman(x, y);
        EXPECT_GE(r, -1.0);
        EXPECT_LE(r, 1.0);
    }
}

std::vector<bool> labels(std::initializer_list<std::pair<int, bool>> runs) {
    std::vector<bool> out;
    for (auto [count, v] : runs) out.insert(out.end(), count, v);
    return out;
}

TEST(Kappa, ConfusionCase) {
    // yes/yes 20, yes/no 5, no/yes 10, no/no 15
    const auto a = labels({{20, true}, {5, true}, {10, false}, {15, false}});
    const auto b = labels({{20, true}, {5, false}, {10, true}, {15, false}});
    const auto k = cohen_kappa(a, b);
    EXPECT_EQ(k.kappa, 0.4);
    EXPECT_NEAR(k.observed, 0.7, 1e-15);
    EXPECT_NEAR(k.expected, 0.5, 1e-15);
    EXPECT_FALSE(k.degenerate);
}

TEST(Kappa, IdenticalAndDegenerate) {
    const std::vector<bool> a = {true, false, true, true};
    EXPECT_EQ(cohen_kappa(a, a).kappa, 1.0);
    const std::vector<bool> c(6, true);
    const auto k = cohen_kappa(c, c);
    EXPECT_TRUE(k.degenerate);
    EXPECT_EQ(k.kappa, 0.0);
    EXPECT_THROW(cohen_kappa({true}, {true, false}), LengthMismatchError);
    EXPECT_THROW(cohen_kappa({}, {}), DomainError);
}

TEST(Kappa, IndependentLabelsNearZero) {
    std::mt19937_64 rng(2024);
    std::bernoulli_distribution coin(0.5);
    std::vector<bool> a(10000), b(10000);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = coin(rng);
        b[i] = coin(rng);
    }
    EXPECT_NEAR(cohen_kappa(a, b).kappa, 0.0, 0.05);
}

TEST(Quantile, TypeSeven) {
    const std::vector<double> s = {1, 2, 3, 4};
    EXPECT_DOUBLE_EQ(quantile_sorted(s, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(quantile_sorted(s, 0.25), 1.75);
    EXPECT_DOUBLE_EQ(quantile_sorted(s, 0.5), 2.5);
    EXPECT_DOUBLE_EQ(quantile_sorted(s, 1.0), 4.0);
    EXPECT_DOUBLE_EQ(quantile_sorted({7}, 0.3), 7.0);
}

TEST(Bootstrap, ConstantDifferences) {
    std::vector<std::pair<double, double>> same, shifted;
    for (int i = 0; i < 30; ++i) {
        same.emplace_back(i, i);
        shifted.emplace_back(i, i + 1);
    }
    auto z = bootstrap_delta_ci(same);
    EXPECT_EQ(z.delta, 0.0);
    EXPECT_EQ(z.lo, 0.0);
    EXPECT_EQ(z.hi, 0.0);
    auto one = bootstrap_delta_ci(shifted);
    EXPECT_EQ(one.delta, 1.0);
    EXPECT_EQ(one.lo, 1.0);
    EXPECT_EQ(one.hi, 1.0);
    EXPECT_THROW(bootstrap_delta_ci({}), DomainError);
}

TEST(Bootstrap, MatchesIndependentResampler) {
    std::vector<std::pair<double, double>> pairs;
    std::mt19937 data(5);
    std::uniform_int_distribution<int> d(0, 10);
    for (int i = 0; i < 40; ++i) pairs.emplace_back(d(data), d(data));

    // Straight re-derivation: same generator and index rule, percentile by type-7 formula.
    std::mt19937_64 rng(42);
    std::vector<double> means;
    for (int r = 0; r < 1000; ++r) {
        double s = 0;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const auto& p = pairs[rng() % pairs.size()];
            s += p.second - p.first;
        }
        means.push_back(s / pairs.size());
    }
    std::sort(means.begin(), means.end());
    auto q7 = [&](double p) {
        const double h = 999 * p;
        const int lo = (int)h;
        return means[lo] + (h - lo) * (means[std::min(lo + 1, 999)] - means[lo]);
    };
    const auto ci = bootstrap_delta_ci(pairs, 1000, 0.95, 42);
    EXPECT_DOUBLE_EQ(ci.lo, q7(0.025));
    EXPECT_DOUBLE_EQ(ci.hi, q7(0.975));
    EXPECT_LE(ci.lo, ci.delta);
    EXPECT_GE(ci.hi, ci.delta);

    const auto again = bootstrap_delta_ci(pairs, 1000, 0.95, 42);
    EXPECT_EQ(ci.lo, again.lo);
    EXPECT_EQ(ci.hi, again.hi);
    const auto other = bootstrap_delta_ci(pairs, 1000, 0.95, 43);
    EXPECT_TRUE(other.lo != ci.lo || other.hi != ci.hi);
}

}  // namespace
}  // namespace cowrite::stats
