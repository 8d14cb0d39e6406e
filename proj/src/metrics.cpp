#include "prognosis/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prognosis/common.hpp"

namespace prognosis {

namespace {

// Mid-ranks (1-based) of the pooled values.
std::vector<double> midranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

void check_both_classes(const std::vector<int>& labels) {
    bool pos = false, neg = false;
    for (int v : labels) {
        if (v == 1) pos = true;
        else if (v == 0) neg = true;
        else throw MetricError("labels must be 0 or 1");
    }
    if (!pos || !neg) throw MetricError("metric undefined: both classes must be present");
}

// Number of size-n subsets of ranks {1..total} with each possible rank sum,
// by dynamic programming; used for the exact rank-sum distribution.
std::vector<std::vector<double>> ranksum_counts(int total, int n) {
    const int max_sum = total * (total + 1) / 2;
    std::vector<std::vector<double>> dp(n + 1, std::vector<double>(max_sum + 1, 0.0));
    dp[0][0] = 1.0;
    for (int v = 1; v <= total; ++v)
        for (int k = std::min(n, v); k >= 1; --k)
            for (int s = max_sum; s >= v; --s)
                if (dp[k - 1][s - v] > 0.0) dp[k][s] += dp[k - 1][s - v];
    return dp;
}

}  // namespace

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw MetricError("auc: scores/labels length mismatch");
    check_both_classes(labels);
    const auto ranks = midranks(scores);
    double rank_sum_pos = 0.0;
    std::size_t n1 = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) {
            rank_sum_pos += ranks[i];
            ++n1;
        }
    }
    const std::size_t n0 = labels.size() - n1;
    const double u = rank_sum_pos - static_cast<double>(n1) * (static_cast<double>(n1) + 1.0) / 2.0;
    return u / (static_cast<double>(n1) * static_cast<double>(n0));
}

std::pair<double, double> sens_spec(const std::vector<double>& scores,
                                    const std::vector<int>& labels, double threshold) {
    if (scores.size() != labels.size())
        throw MetricError("sens_spec: scores/labels length mismatch");
    check_both_classes(labels);
    std::size_t tp = 0, fn = 0, tn = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted_positive = scores[i] >= threshold;
        if (labels[i] == 1) (predicted_positive ? tp : fn) += 1;
        else (predicted_positive ? fp : tn) += 1;
    }
    return {static_cast<double>(tp) / static_cast<double>(tp + fn),
            static_cast<double>(tn) / static_cast<double>(tn + fp)};
}

double youden_threshold(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw MetricError("youden_threshold: scores/labels length mismatch");
    check_both_classes(labels);
    std::vector<double> cuts = scores;
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double best_threshold = cuts.front();
    double best_j = -2.0;
    for (double t : cuts) {
        const auto [sens, spec] = sens_spec(scores, labels, t);
        const double j = sens + spec - 1.0;
        if (j > best_j) {
            best_j = j;
            best_threshold = t;
        }
    }
    return best_threshold;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double wilcoxon_rank_sum(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw MetricError("wilcoxon_rank_sum: empty sample");
    const int n = static_cast<int>(a.size());
    const int m = static_cast<int>(b.size());
    const int total = n + m;

    std::vector<double> pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto ranks = midranks(pooled);

    bool has_ties = false;
    {
        std::vector<double> sorted = pooled;
        std::sort(sorted.begin(), sorted.end());
        for (int i = 0; i + 1 < total; ++i)
            if (sorted[i] == sorted[i + 1]) {
                has_ties = true;
                break;
            }
    }

    double w = 0.0;
    for (int i = 0; i < n; ++i) w += ranks[i];
    const double mu = static_cast<double>(n) * (total + 1) / 2.0;

    if (!has_ties && total <= 16) {
        // exact two-sided tail: P(|W - mu| >= |w - mu|)
        const auto dp = ranksum_counts(total, n);
        const double observed = std::abs(w - mu);
        double extreme = 0.0, all = 0.0;
        const int max_sum = total * (total + 1) / 2;
        for (int s = 0; s <= max_sum; ++s) {
            const double c = dp[n][s];
            if (c == 0.0) continue;
            all += c;
            if (std::abs(static_cast<double>(s) - mu) >= observed - 1e-12) extreme += c;
        }
        return extreme / all;
    }

    // normal approximation, tie-corrected variance
    double tie_term = 0.0;
    {
        std::vector<double> sorted = pooled;
        std::sort(sorted.begin(), sorted.end());
        int i = 0;
        while (i < total) {
            int j = i;
            while (j + 1 < total && sorted[j + 1] == sorted[i]) ++j;
            const double t = static_cast<double>(j - i + 1);
            tie_term += t * t * t - t;
            i = j + 1;
        }
    }
    const double nm = static_cast<double>(n) * m;
    double sigma_sq = nm / 12.0 *
                      (static_cast<double>(total + 1) -
                       tie_term / (static_cast<double>(total) * (total - 1)));
    if (sigma_sq <= 0.0) return 1.0;  // all values identical
    const double corrected = std::max(0.0, std::abs(w - mu) - 0.5);
    const double z = corrected / std::sqrt(sigma_sq);
    return std::min(1.0, 2.0 * (1.0 - normal_cdf(z)));
}

}  // namespace prognosis
