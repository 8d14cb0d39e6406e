#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "prognosis/common.hpp"
#include "prognosis/metrics.hpp"

using namespace prognosis;

TEST_CASE("auc basics: separation, ties, the worked example") {
    CHECK(auc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}) == 1.0);
    CHECK(auc({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}) == 0.5);
    CHECK(auc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}) == 0.75);
    CHECK_THROWS_AS(auc({0.1, 0.2}, {1, 1}), MetricError);
}

TEST_CASE("auc equals the pair-counting oracle exactly on random instances") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Rng rng(seed);
        const std::size_t n = 2 + bounded(rng, 48);
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        bool pos = false, neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            // quantized scores so ties actually occur
            scores[i] = std::round(uniform01(rng) * 10.0) / 10.0;
            labels[i] = bernoulli(rng, 0.5) ? 1 : 0;
            (labels[i] ? pos : neg) = true;
        }
        if (!pos || !neg) continue;
        CHECK(auc(scores, labels) == oracle::auc_pairs(scores, labels));
    }
}

TEST_CASE("auc symmetry properties") {
    Rng rng(77);
    std::vector<double> scores(40);
    std::vector<int> labels(40);
    for (std::size_t i = 0; i < 40; ++i) {
        scores[i] = uniform01(rng);
        labels[i] = i % 3 == 0 ? 1 : 0;
    }
    std::vector<int> flipped;
    for (int v : labels) flipped.push_back(1 - v);
    CHECK(auc(scores, labels) == doctest::Approx(1.0 - auc(scores, flipped)).epsilon(1e-12));

    // invariance under strictly increasing transforms
    std::vector<double> warped;
    for (double s : scores) warped.push_back(std::exp(3.0 * s) + 1.0);
    CHECK(auc(warped, labels) == auc(scores, labels));
}

TEST_CASE("sens_spec worked cases") {
    CHECK(sens_spec({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}, 0.5) ==
          std::pair<double, double>{1.0, 1.0});
    const auto degenerate = sens_spec({0.1, 0.4, 0.45}, {0, 1, 0}, 0.7);
    CHECK(degenerate.first == 0.0);
    CHECK(degenerate.second == 1.0);
    const auto mixed = sens_spec({0.2, 0.6, 0.7}, {0, 1, 0}, 0.5);
    CHECK(mixed.first == 1.0);
    CHECK(mixed.second == 0.5);
}

TEST_CASE("youden_threshold degenerate and separated cases") {
    // perfectly separated: the lowest positive score is the maximizer
    CHECK(youden_threshold({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}) == 0.8);
    // all scores equal: J = 0 at that value
    CHECK(youden_threshold({0.4, 0.4, 0.4}, {0, 1, 0}) == 0.4);
}

TEST_CASE("youden_threshold matches an exhaustive scan oracle") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed + 500);
        std::vector<double> scores(20);
        std::vector<int> labels(20);
        bool pos = false, neg = false;
        for (std::size_t i = 0; i < 20; ++i) {
            scores[i] = std::round(uniform01(rng) * 20.0) / 20.0;
            labels[i] = bernoulli(rng, 0.4) ? 1 : 0;
            (labels[i] ? pos : neg) = true;
        }
        if (!pos || !neg) continue;

        double best_j = -2.0, best_t = 0.0;
        std::vector<double> cuts = scores;
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        for (double t : cuts) {
            int tp = 0, fn = 0, tn = 0, fp = 0;
            for (std::size_t i = 0; i < 20; ++i) {
                const bool predicted = scores[i] >= t;
                if (labels[i]) (predicted ? tp : fn)++;
                else (predicted ? fp : tn)++;
            }
            const double j = double(tp) / (tp + fn) + double(tn) / (tn + fp) - 1.0;
            if (j > best_j) {
                best_j = j;
                best_t = t;
            }
        }
        CHECK(youden_threshold(scores, labels) == best_t);
    }
}

TEST_CASE("wilcoxon: identical samples yield p ~ 1") {
    const std::vector<double> a{1, 2, 3, 4, 5};
    CHECK(wilcoxon_rank_sum(a, a) >= 0.99);
}

TEST_CASE("wilcoxon: the fully separated 3-vs-3 case is exactly 0.1") {
    CHECK(wilcoxon_rank_sum({1, 2, 3}, {4, 5, 6}) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("wilcoxon exact path matches the enumeration oracle for all shapes up to 12") {
    for (int n = 1; n <= 6; ++n) {
        for (int m = 1; m <= 12 - n; ++m) {
            for (std::uint64_t seed = 0; seed < 5; ++seed) {
                Rng rng(seed * 131 + n * 17 + m);
                std::vector<double> pool(n + m);
                // distinct values, no ties
                for (int i = 0; i < n + m; ++i) pool[i] = i + uniform01(rng) * 0.5;
                for (std::size_t i = pool.size(); i > 1; --i)
                    std::swap(pool[i - 1], pool[bounded(rng, i)]);
                std::vector<double> a(pool.begin(), pool.begin() + n);
                std::vector<double> b(pool.begin() + n, pool.end());

                // rank sum of a within the pooled sample
                double w = 0.0;
                for (double va : a) {
                    int rank = 1;
                    for (double v : pool) rank += v < va;
                    w += rank;
                }
                const double expected = oracle::wilcoxon_exact(n, m, w);
                CHECK(wilcoxon_rank_sum(a, b) == doctest::Approx(expected).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("wilcoxon symmetry and the approximation's accuracy at n=12,m=13") {
    Rng rng(9);
    std::vector<double> a(12), b(13);
    for (auto& v : a) v = normal_draw(rng);
    for (auto& v : b) v = 0.8 + normal_draw(rng);
    CHECK(wilcoxon_rank_sum(a, b) == doctest::Approx(wilcoxon_rank_sum(b, a)).epsilon(1e-12));

    double w = 0.0;
    std::vector<double> pool = a;
    pool.insert(pool.end(), b.begin(), b.end());
    for (double va : a) {
        int rank = 1;
        for (double v : pool) rank += v < va;
        w += rank;
    }
    const double exact = oracle::wilcoxon_exact(12, 13, w);
    CHECK(std::abs(wilcoxon_rank_sum(a, b) - exact) < 0.02);
}

TEST_CASE("wilcoxon rejects empty samples") {
    CHECK_THROWS_AS(wilcoxon_rank_sum({}, {1.0}), MetricError);
}
