#include <algorithm>
#include <cmath>

#include "prognosis/model.hpp"
#include "prognosis/tree.hpp"

namespace prognosis {

using nlohmann::json;

namespace {

double sigmoid(double eta) { return 1.0 / (1.0 + std::exp(-eta)); }

// Newton-boosting tree on gradient/hessian pairs: split gain is the usual
// second-order score 0.5 * [GL^2/(HL+reg) + GR^2/(HR+reg) - G^2/(H+reg)],
// leaf values -G/(H+reg) scaled by the learning rate.
struct BoostBuilder {
    const MatrixView& x;
    const std::vector<double>& grad;
    const std::vector<double>& hess;
    double reg;
    double shrinkage;
    int max_depth;
    Tree tree;
    std::vector<std::pair<double, std::uint32_t>> scratch;

    double leaf_value(double g, double h) const { return -g / (h + reg) * shrinkage; }

    void make_leaf(int node_idx, const std::vector<std::uint32_t>& rows) {
        double g = 0.0, h = 0.0;
        for (auto r : rows) {
            g += grad[r];
            h += hess[r];
        }
        TreeNode& node = tree.nodes[node_idx];
        node.feature = -1;
        node.leaf.assign(1, leaf_value(g, h));
        node.n_samples = static_cast<int>(rows.size());
    }

    void build(int node_idx, std::vector<std::uint32_t> rows, int depth) {
        tree.nodes[node_idx].depth = depth;
        tree.nodes[node_idx].n_samples = static_cast<int>(rows.size());
        if (depth >= max_depth || rows.size() < 2) {
            make_leaf(node_idx, rows);
            return;
        }

        double g_total = 0.0, h_total = 0.0;
        for (auto r : rows) {
            g_total += grad[r];
            h_total += hess[r];
        }
        const double parent_score = g_total * g_total / (h_total + reg);

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_gain = 0.0;
        for (std::size_t f = 0; f < x.n_cols; ++f) {
            scratch.clear();
            for (auto r : rows) scratch.emplace_back(x.at(r, f), r);
            std::sort(scratch.begin(), scratch.end());
            if (scratch.front().first == scratch.back().first) continue;
            double gl = 0.0, hl = 0.0;
            for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
                gl += grad[scratch[i].second];
                hl += hess[scratch[i].second];
                if (scratch[i].first == scratch[i + 1].first) continue;
                const double gr = g_total - gl;
                const double hr = h_total - hl;
                const double gain =
                    0.5 * (gl * gl / (hl + reg) + gr * gr / (hr + reg) - parent_score);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = static_cast<int>(f);
                    best_threshold =
                        scratch[i].first + (scratch[i + 1].first - scratch[i].first) / 2.0;
                }
            }
        }
        if (best_feature < 0) {
            make_leaf(node_idx, rows);
            return;
        }

        std::vector<std::uint32_t> left_rows, right_rows;
        for (auto r : rows) {
            if (x.at(r, best_feature) <= best_threshold) left_rows.push_back(r);
            else right_rows.push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        const int left_idx = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        const int right_idx = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[node_idx].feature = best_feature;
        tree.nodes[node_idx].threshold = best_threshold;
        tree.nodes[node_idx].left = left_idx;
        tree.nodes[node_idx].right = right_idx;
        build(left_idx, std::move(left_rows), depth + 1);
        build(right_idx, std::move(right_rows), depth + 1);
    }
};

json tree_to_json(const Tree& tree) {
    json nodes = json::array();
    for (const auto& n : tree.nodes)
        nodes.push_back(json{{"f", n.feature}, {"t", n.threshold}, {"l", n.left},
                             {"r", n.right}, {"v", n.leaf}, {"n", n.n_samples}, {"d", n.depth}});
    return nodes;
}

Tree tree_from_json(const json& nodes) {
    Tree tree;
    for (const auto& nj : nodes) {
        TreeNode n;
        n.feature = nj.at("f").get<int>();
        n.threshold = nj.at("t").get<double>();
        n.left = nj.at("l").get<int>();
        n.right = nj.at("r").get<int>();
        n.leaf = nj.at("v").get<std::vector<double>>();
        n.n_samples = nj.at("n").get<int>();
        n.depth = nj.at("d").get<int>();
        tree.nodes.push_back(std::move(n));
    }
    return tree;
}

class GbtModel final : public Model {
public:
    std::string id_ = "gbt";
    std::vector<std::string> names_;
    Hyperparams hp_;
    std::uint64_t seed_ = 0;
    double base_score_ = 0.0;
    std::vector<Tree> trees_;

    const std::string& learner_id() const override { return id_; }
    const std::vector<std::string>& feature_names() const override { return names_; }

    std::vector<double> predict_proba(const DesignMatrix& x) const override {
        check_feature_names(*this, x);
        std::vector<double> out(x.n_rows, base_score_);
        for (const auto& tree : trees_)
            for (std::size_t i = 0; i < x.n_rows; ++i)
                out[i] += tree.nodes[tree.descend(x.row(i), x.n_cols())].leaf[0];
        for (double& v : out) v = clamp_probability(sigmoid(v));
        return out;
    }

    json to_json() const override {
        json trees = json::array();
        for (const auto& t : trees_) trees.push_back(tree_to_json(t));
        return json{{"learner", id_},          {"hyperparameters", hp_}, {"seed", seed_},
                    {"feature_names", names_}, {"base_score", base_score_}, {"trees", trees}};
    }
};

}  // namespace

std::unique_ptr<Model> fit_gbt(const DesignMatrix& x, const std::vector<int>& y,
                               const Hyperparams& hp, std::uint64_t seed) {
    x.validate();
    check_binary_labels(y, x.n_rows);
    const int n_rounds = static_cast<int>(hp.count("n_rounds") ? hp.at("n_rounds") : 100.0);
    const int max_depth = static_cast<int>(hp.count("max_depth") ? hp.at("max_depth") : 3.0);
    const double learning_rate = hp.count("learning_rate") ? hp.at("learning_rate") : 0.1;
    const double reg = hp.count("l2_leaf_lambda") ? hp.at("l2_leaf_lambda") : 1.0;
    if (n_rounds < 1) throw ModelError("gbt: n_rounds must be >= 1");
    if (max_depth < 1) throw ModelError("gbt: max_depth must be >= 1");
    if (!(learning_rate > 0.0) || learning_rate > 1.0)
        throw ModelError("gbt: learning_rate must be in (0, 1]");
    if (reg < 0.0) throw ModelError("gbt: l2_leaf_lambda must be >= 0");

    const std::size_t n = x.n_rows;
    double mean_y = 0.0;
    for (int v : y) mean_y += v;
    mean_y /= static_cast<double>(n);
    mean_y = std::clamp(mean_y, 1e-12, 1.0 - 1e-12);

    auto model = std::make_unique<GbtModel>();
    model->names_ = x.feature_names;
    model->hp_ = {{"n_rounds", static_cast<double>(n_rounds)},
                  {"max_depth", static_cast<double>(max_depth)},
                  {"learning_rate", learning_rate},
                  {"l2_leaf_lambda", reg}};
    model->seed_ = seed;
    model->base_score_ = std::log(mean_y / (1.0 - mean_y));

    MatrixView view{x.data.data(), x.n_cols()};
    std::vector<double> score(n, model->base_score_);
    std::vector<double> grad(n), hess(n);
    std::vector<std::uint32_t> all_rows(n);
    for (std::size_t i = 0; i < n; ++i) all_rows[i] = static_cast<std::uint32_t>(i);

    model->trees_.reserve(n_rounds);
    for (int round = 0; round < n_rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(score[i]);
            grad[i] = p - static_cast<double>(y[i]);
            hess[i] = p * (1.0 - p);
        }
        BoostBuilder b{view, grad, hess, reg, learning_rate, max_depth, {}, {}};
        b.tree.nodes.emplace_back();
        b.build(0, all_rows, 0);
        for (std::size_t i = 0; i < n; ++i)
            score[i] += b.tree.nodes[b.tree.descend(x.row(i), x.n_cols())].leaf[0];
        model->trees_.push_back(std::move(b.tree));
    }
    return model;
}

namespace detail {

std::unique_ptr<Model> gbt_from_json(const json& doc) {
    auto m = std::make_unique<GbtModel>();
    m->hp_ = doc.at("hyperparameters").get<Hyperparams>();
    m->seed_ = doc.at("seed").get<std::uint64_t>();
    m->names_ = doc.at("feature_names").get<std::vector<std::string>>();
    m->base_score_ = doc.at("base_score").get<double>();
    for (const auto& t : doc.at("trees")) m->trees_.push_back(tree_from_json(t));
    return m;
}

}  // namespace detail

}  // namespace prognosis
