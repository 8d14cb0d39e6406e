#include "prognosis/random_forest.hpp"

#include <cmath>
#include <cstdio>

namespace prognosis {

using nlohmann::json;

namespace {

json tree_to_json(const Tree& tree) {
    json nodes = json::array();
    for (const auto& n : tree.nodes)
        nodes.push_back(json{{"f", n.feature},
                             {"t", n.threshold},
                             {"l", n.left},
                             {"r", n.right},
                             {"v", n.leaf},
                             {"n", n.n_samples},
                             {"d", n.depth}});
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

}  // namespace

class RandomForestModel final : public Model {
public:
    std::string id_ = "random_forest";
    std::vector<std::string> names_;
    Hyperparams hp_;
    std::uint64_t seed_ = 0;
    std::vector<Tree> trees_;

    const std::string& learner_id() const override { return id_; }
    const std::vector<std::string>& feature_names() const override { return names_; }

    std::vector<double> predict_proba(const DesignMatrix& x) const override {
        check_feature_names(*this, x);
        std::vector<double> out(x.n_rows, 0.0);
        for (const auto& tree : trees_) {
            for (std::size_t i = 0; i < x.n_rows; ++i) {
                const int leaf = tree.descend(x.row(i), x.n_cols());
                out[i] += tree.nodes[leaf].leaf[1];
            }
        }
        for (double& v : out) v = clamp_probability(v / static_cast<double>(trees_.size()));
        return out;
    }

    json to_json() const override {
        json trees = json::array();
        for (const auto& t : trees_) trees.push_back(tree_to_json(t));
        return json{{"learner", id_},
                    {"hyperparameters", hp_},
                    {"seed", seed_},
                    {"feature_names", names_},
                    {"trees", trees}};
    }
};

std::unique_ptr<Model> fit_random_forest(const DesignMatrix& x, const std::vector<int>& y,
                                         const Hyperparams& hp, std::uint64_t seed) {
    x.validate();
    check_binary_labels(y, x.n_rows);
    const int n_trees = static_cast<int>(hp.count("n_trees") ? hp.at("n_trees") : 300.0);
    const int mtry = static_cast<int>(
        hp.count("mtry") ? hp.at("mtry")
                         : std::max(1.0, std::floor(std::sqrt(static_cast<double>(x.n_cols())))));
    const int min_leaf = static_cast<int>(hp.count("min_leaf") ? hp.at("min_leaf") : 1.0);
    const bool bootstrap = (hp.count("bootstrap") ? hp.at("bootstrap") : 1.0) != 0.0;
    if (n_trees < 1) throw ModelError("random_forest: n_trees must be >= 1");
    if (mtry < 1 || mtry > static_cast<int>(x.n_cols()))
        throw ModelError("random_forest: mtry must be in [1, n_features]");
    if (min_leaf < 1) throw ModelError("random_forest: min_leaf must be >= 1");

    bool has_pos = false, has_neg = false;
    for (int v : y) (v ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg)
        std::fprintf(stderr, "random_forest: degenerate single-class labels; "
                             "forest will predict that class\n");

    auto model = std::make_unique<RandomForestModel>();
    model->names_ = x.feature_names;
    model->hp_ = {{"n_trees", static_cast<double>(n_trees)},
                  {"mtry", static_cast<double>(mtry)},
                  {"min_leaf", static_cast<double>(min_leaf)},
                  {"bootstrap", bootstrap ? 1.0 : 0.0}};
    model->seed_ = seed;

    MatrixView view{x.data.data(), x.n_cols()};
    std::vector<double> targets(y.begin(), y.end());
    TreeParams tp;
    tp.task = TreeTask::classification;
    tp.n_classes = 2;
    tp.mtry = mtry;
    tp.min_leaf = min_leaf;

    const std::size_t n = x.n_rows;
    model->trees_.reserve(n_trees);
    for (int t = 0; t < n_trees; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t), 0x7265656672u /* per-tree stream */));
        std::vector<std::uint32_t> rows(n);
        if (bootstrap) {
            for (std::size_t i = 0; i < n; ++i)
                rows[i] = static_cast<std::uint32_t>(bounded(rng, n));
        } else {
            for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<std::uint32_t>(i);
        }
        model->trees_.push_back(grow_tree(view, targets, rows, tp, rng));
    }
    return model;
}

const std::vector<Tree>* forest_trees(const Model& model) {
    auto* forest = dynamic_cast<const RandomForestModel*>(&model);
    return forest ? &forest->trees_ : nullptr;
}

namespace detail {

std::unique_ptr<Model> random_forest_from_json(const json& doc) {
    auto m = std::make_unique<RandomForestModel>();
    m->hp_ = doc.at("hyperparameters").get<Hyperparams>();
    m->seed_ = doc.at("seed").get<std::uint64_t>();
    m->names_ = doc.at("feature_names").get<std::vector<std::string>>();
    for (const auto& t : doc.at("trees")) m->trees_.push_back(tree_from_json(t));
    return m;
}

}  // namespace detail

}  // namespace prognosis
