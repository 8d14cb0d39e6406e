#include "prognosis/model.hpp"

#include <algorithm>
#include <cmath>

namespace prognosis {

using nlohmann::json;

DesignMatrix DesignMatrix::subset(const std::vector<std::size_t>& rows) const {
    DesignMatrix out;
    out.feature_names = feature_names;
    out.n_rows = rows.size();
    out.data.reserve(rows.size() * n_cols());
    for (auto r : rows)
        out.data.insert(out.data.end(), data.begin() + r * n_cols(),
                        data.begin() + (r + 1) * n_cols());
    return out;
}

DesignMatrix DesignMatrix::select_columns(const std::vector<std::size_t>& cols) const {
    DesignMatrix out;
    for (auto c : cols) out.feature_names.push_back(feature_names[c]);
    out.n_rows = n_rows;
    out.data.reserve(n_rows * cols.size());
    for (std::size_t r = 0; r < n_rows; ++r)
        for (auto c : cols) out.data.push_back(at(r, c));
    return out;
}

void DesignMatrix::validate() const {
    if (data.size() != n_rows * n_cols())
        throw ModelError("design matrix: data size does not match rows x cols");
    for (double v : data)
        if (!std::isfinite(v)) throw ModelError("design matrix: non-finite value");
}

std::string hyperparams_to_string(const Hyperparams& hp) {
    std::string out = "{";
    bool first = true;
    for (const auto& [k, v] : hp) {
        if (!first) out += ", ";
        first = false;
        out += k + "=" + std::to_string(v);
    }
    return out + "}";
}

void check_feature_names(const Model& model, const DesignMatrix& x) {
    if (model.feature_names() != x.feature_names)
        throw ModelError(model.learner_id() + ": feature names do not match training schema");
}

double clamp_probability(double p) {
    constexpr double eps = 1e-12;
    if (!(p > eps)) return eps;
    if (!(p < 1.0 - eps)) return 1.0 - eps;
    return p;
}

std::vector<double> ensemble_average(const std::vector<std::vector<double>>& member_probs) {
    if (member_probs.size() < 2)
        throw ModelError("ensemble_average: need at least two probability vectors");
    const std::size_t n = member_probs.front().size();
    for (const auto& v : member_probs)
        if (v.size() != n) throw ModelError("ensemble_average: length mismatch");
    std::vector<double> out(n, 0.0);
    for (const auto& v : member_probs)
        for (std::size_t i = 0; i < n; ++i) out[i] += v[i];
    for (double& v : out) v /= static_cast<double>(member_probs.size());
    return out;
}

void check_binary_labels(const std::vector<int>& y, std::size_t n_rows) {
    if (y.size() != n_rows) throw ModelError("labels: length does not match design matrix rows");
    for (int v : y)
        if (v != 0 && v != 1) throw ModelError("labels: values must be 0 or 1");
}

FitFn fit_function_for(const std::string& learner_id) {
    if (learner_id == "elastic_net") return &fit_elastic_net;
    if (learner_id == "random_forest") return &fit_random_forest;
    if (learner_id == "gbt") return &fit_gbt;
    if (learner_id == "mlp") return &fit_mlp;
    throw ModelError("unknown learner id '" + learner_id + "'");
}

std::vector<Hyperparams> default_grid(const std::string& learner_id, std::size_t n_features) {
    std::vector<Hyperparams> grid;
    if (learner_id == "elastic_net") {
        // five log-spaced lambdas in [1e-4, 1] x three mixing values
        const double lambdas[] = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};
        const double alphas[] = {0.0, 0.5, 1.0};
        for (double l : lambdas)
            for (double a : alphas) grid.push_back({{"lambda", l}, {"alpha", a}});
    } else if (learner_id == "random_forest") {
        const double p = static_cast<double>(n_features);
        const double mtries[] = {std::max(1.0, std::floor(std::sqrt(p))),
                                 std::max(1.0, std::floor(p / 3.0))};
        for (double mtry : mtries)
            for (double min_leaf : {1.0, 5.0, 10.0})
                grid.push_back({{"n_trees", 300.0}, {"mtry", mtry}, {"min_leaf", min_leaf}});
    } else if (learner_id == "gbt") {
        for (double rounds : {100.0, 300.0})
            for (double depth : {2.0, 3.0, 4.0})
                for (double lr : {0.05, 0.1})
                    grid.push_back({{"n_rounds", rounds},
                                    {"max_depth", depth},
                                    {"learning_rate", lr},
                                    {"l2_leaf_lambda", 1.0}});
    } else if (learner_id == "mlp") {
        grid.push_back({{"hidden1", 32.0}, {"hidden2", 0.0}, {"learning_rate", 0.05},
                        {"epochs", 60.0}, {"batch_size", 32.0}});
        grid.push_back({{"hidden1", 64.0}, {"hidden2", 16.0}, {"learning_rate", 0.05},
                        {"epochs", 60.0}, {"batch_size", 32.0}});
    } else {
        throw ModelError("unknown learner id '" + learner_id + "'");
    }
    return grid;
}

namespace detail {
std::unique_ptr<Model> elastic_net_from_json(const json&);
std::unique_ptr<Model> random_forest_from_json(const json&);
std::unique_ptr<Model> gbt_from_json(const json&);
std::unique_ptr<Model> mlp_from_json(const json&);
}  // namespace detail

std::unique_ptr<Model> model_from_json(const json& doc) {
    const std::string id = doc.at("learner").get<std::string>();
    if (id == "elastic_net") return detail::elastic_net_from_json(doc);
    if (id == "random_forest") return detail::random_forest_from_json(doc);
    if (id == "gbt") return detail::gbt_from_json(doc);
    if (id == "mlp") return detail::mlp_from_json(doc);
    throw ModelError("model_from_json: unknown learner '" + id + "'");
}

}  // namespace prognosis
