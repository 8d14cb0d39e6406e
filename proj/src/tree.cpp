#include "prognosis/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prognosis/common.hpp"

namespace prognosis {

int Tree::descend(const double* row, std::size_t stride) const {
    (void)stride;
    int idx = 0;
    while (nodes[idx].feature >= 0)
        idx = row[nodes[idx].feature] <= nodes[idx].threshold ? nodes[idx].left : nodes[idx].right;
    return idx;
}

int Tree::max_depth() const {
    int d = 0;
    for (const auto& n : nodes) d = std::max(d, n.depth);
    return d;
}

namespace {

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double decrease = 0.0;
};

double gini_impurity(const std::vector<double>& counts, double total) {
    double acc = 0.0;
    for (double c : counts) {
        const double p = c / total;
        acc += p * p;
    }
    return 1.0 - acc;
}

// Scans sorted (value, target) pairs for the best boundary of one feature.
// Classification impurity is Gini; regression uses within-node variance.
void scan_feature(const MatrixView& x, const std::vector<double>& targets,
                  const std::vector<std::uint32_t>& rows, int feature, const TreeParams& params,
                  double parent_impurity, std::vector<std::pair<double, double>>& scratch,
                  SplitChoice& best) {
    const std::size_t n = rows.size();
    scratch.clear();
    for (std::uint32_t r : rows) scratch.emplace_back(x.at(r, feature), targets[r]);
    std::sort(scratch.begin(), scratch.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (scratch.front().first == scratch.back().first) return;

    const double total = static_cast<double>(n);
    if (params.task == TreeTask::classification) {
        std::vector<double> left_counts(params.n_classes, 0.0);
        std::vector<double> right_counts(params.n_classes, 0.0);
        for (const auto& [v, t] : scratch) right_counts[static_cast<int>(t)] += 1.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const int cls = static_cast<int>(scratch[i].second);
            left_counts[cls] += 1.0;
            right_counts[cls] -= 1.0;
            if (scratch[i].first == scratch[i + 1].first) continue;
            const double n_left = static_cast<double>(i + 1);
            const double n_right = total - n_left;
            if (n_left < params.min_leaf || n_right < params.min_leaf) continue;
            const double child =
                (n_left * gini_impurity(left_counts, n_left) +
                 n_right * gini_impurity(right_counts, n_right)) / total;
            const double decrease = parent_impurity - child;
            if (decrease > best.decrease) {
                best.found = true;
                best.feature = feature;
                best.threshold = scratch[i].first + (scratch[i + 1].first - scratch[i].first) / 2.0;
                best.decrease = decrease;
            }
        }
    } else {
        double left_sum = 0.0, left_sq = 0.0;
        double right_sum = 0.0, right_sq = 0.0;
        for (const auto& [v, t] : scratch) {
            right_sum += t;
            right_sq += t * t;
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double t = scratch[i].second;
            left_sum += t;
            left_sq += t * t;
            right_sum -= t;
            right_sq -= t * t;
            if (scratch[i].first == scratch[i + 1].first) continue;
            const double n_left = static_cast<double>(i + 1);
            const double n_right = total - n_left;
            if (n_left < params.min_leaf || n_right < params.min_leaf) continue;
            const double child = ((left_sq - left_sum * left_sum / n_left) +
                                  (right_sq - right_sum * right_sum / n_right)) / total;
            const double decrease = parent_impurity - child;
            if (decrease > best.decrease) {
                best.found = true;
                best.feature = feature;
                best.threshold = scratch[i].first + (scratch[i + 1].first - scratch[i].first) / 2.0;
                best.decrease = decrease;
            }
        }
    }
}

struct Builder {
    const MatrixView& x;
    const std::vector<double>& targets;
    const TreeParams& params;
    Rng& rng;
    Tree tree;
    std::vector<std::pair<double, double>> scratch;
    std::vector<int> feature_pool;

    Builder(const MatrixView& x_, const std::vector<double>& targets_, const TreeParams& params_,
            Rng& rng_)
        : x(x_), targets(targets_), params(params_), rng(rng_) {
        feature_pool.resize(x.n_cols);
        std::iota(feature_pool.begin(), feature_pool.end(), 0);
    }

    void make_leaf(int node_idx, const std::vector<std::uint32_t>& rows) {
        TreeNode& node = tree.nodes[node_idx];
        node.feature = -1;
        node.n_samples = static_cast<int>(rows.size());
        if (params.task == TreeTask::classification) {
            node.leaf.assign(params.n_classes, 0.0);
            for (std::uint32_t r : rows) node.leaf[static_cast<int>(targets[r])] += 1.0;
            for (double& v : node.leaf) v /= static_cast<double>(rows.size());
        } else {
            double sum = 0.0;
            for (std::uint32_t r : rows) sum += targets[r];
            node.leaf.assign(1, sum / static_cast<double>(rows.size()));
        }
    }

    double node_impurity(const std::vector<std::uint32_t>& rows) const {
        const double n = static_cast<double>(rows.size());
        if (params.task == TreeTask::classification) {
            std::vector<double> counts(params.n_classes, 0.0);
            for (std::uint32_t r : rows) counts[static_cast<int>(targets[r])] += 1.0;
            return gini_impurity(counts, n);
        }
        double sum = 0.0, sq = 0.0;
        for (std::uint32_t r : rows) {
            sum += targets[r];
            sq += targets[r] * targets[r];
        }
        return (sq - sum * sum / n) / n;
    }

    // mtry features without replacement, returned in ascending order so
    // equal-gain ties resolve to the lowest feature index.
    std::vector<int> sample_features() {
        const int p = static_cast<int>(x.n_cols);
        const int m = params.mtry <= 0 ? p : std::min(params.mtry, p);
        if (m >= p) return feature_pool;
        std::vector<int> pool = feature_pool;
        for (int i = 0; i < m; ++i) {
            const int j = i + static_cast<int>(bounded(rng, static_cast<std::uint64_t>(p - i)));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(m);
        std::sort(pool.begin(), pool.end());
        return pool;
    }

    void build(int node_idx, std::vector<std::uint32_t> rows, int depth) {
        tree.nodes[node_idx].depth = depth;
        tree.nodes[node_idx].n_samples = static_cast<int>(rows.size());

        const bool depth_stop = params.max_depth >= 0 && depth >= params.max_depth;
        if (depth_stop || rows.size() < 2 * static_cast<std::size_t>(params.min_leaf) ||
            rows.size() < 2) {
            make_leaf(node_idx, rows);
            return;
        }
        const double impurity = node_impurity(rows);
        if (impurity <= 0.0) {
            make_leaf(node_idx, rows);
            return;
        }

        SplitChoice best;
        for (int f : sample_features())
            scan_feature(x, targets, rows, f, params, impurity, scratch, best);
        if (!best.found) {
            make_leaf(node_idx, rows);
            return;
        }

        std::vector<std::uint32_t> left_rows, right_rows;
        for (std::uint32_t r : rows) {
            if (x.at(r, best.feature) <= best.threshold) left_rows.push_back(r);
            else right_rows.push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        const int left_idx = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        const int right_idx = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        TreeNode& node = tree.nodes[node_idx];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = left_idx;
        node.right = right_idx;

        build(left_idx, std::move(left_rows), depth + 1);
        build(right_idx, std::move(right_rows), depth + 1);
    }
};

}  // namespace

Tree grow_tree(const MatrixView& x, const std::vector<double>& targets,
               const std::vector<std::uint32_t>& sample_rows, const TreeParams& params, Rng& rng) {
    if (sample_rows.empty()) throw ModelError("grow_tree: empty sample");
    if (params.task == TreeTask::classification && params.n_classes < 2)
        throw ModelError("grow_tree: n_classes must be >= 2");
    Builder b(x, targets, params, rng);
    b.tree.nodes.emplace_back();
    b.build(0, sample_rows, 0);
    return std::move(b.tree);
}

}  // namespace prognosis
