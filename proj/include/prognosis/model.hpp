#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prognosis/common.hpp"

namespace prognosis {

// Patients x named numeric features; no missing cells, finite values.
struct DesignMatrix {
    std::vector<std::string> feature_names;
    std::vector<double> data;  // row-major
    std::size_t n_rows = 0;

    std::size_t n_cols() const { return feature_names.size(); }
    double at(std::size_t r, std::size_t c) const { return data[r * n_cols() + c]; }
    double& at(std::size_t r, std::size_t c) { return data[r * n_cols() + c]; }
    const double* row(std::size_t r) const { return data.data() + r * n_cols(); }

    DesignMatrix subset(const std::vector<std::size_t>& rows) const;
    DesignMatrix select_columns(const std::vector<std::size_t>& cols) const;
    void validate() const;  // finite, shape-consistent
};

using Hyperparams = std::map<std::string, double>;

std::string hyperparams_to_string(const Hyperparams& hp);

// First-level classifier contract: probability prediction over rows whose
// feature names match training exactly.
class Model {
public:
    virtual ~Model() = default;
    virtual const std::string& learner_id() const = 0;
    virtual const std::vector<std::string>& feature_names() const = 0;
    virtual std::vector<double> predict_proba(const DesignMatrix& x) const = 0;
    virtual nlohmann::json to_json() const = 0;
};

// Shared by every learner: rejects feature-name mismatches up front.
void check_feature_names(const Model& model, const DesignMatrix& x);

// Probabilities are reported strictly inside (0, 1).
double clamp_probability(double p);

std::unique_ptr<Model> model_from_json(const nlohmann::json& doc);

// Unweighted per-row mean of >= 2 equal-length probability vectors.
std::vector<double> ensemble_average(const std::vector<std::vector<double>>& member_probs);

// ---- fit entry points (one per first-level learner) ----

std::unique_ptr<Model> fit_elastic_net(const DesignMatrix& x, const std::vector<int>& y,
                                       const Hyperparams& hp, std::uint64_t seed);
std::unique_ptr<Model> fit_random_forest(const DesignMatrix& x, const std::vector<int>& y,
                                         const Hyperparams& hp, std::uint64_t seed);
std::unique_ptr<Model> fit_gbt(const DesignMatrix& x, const std::vector<int>& y,
                               const Hyperparams& hp, std::uint64_t seed);
std::unique_ptr<Model> fit_mlp(const DesignMatrix& x, const std::vector<int>& y,
                               const Hyperparams& hp, std::uint64_t seed);

using FitFn = std::unique_ptr<Model> (*)(const DesignMatrix&, const std::vector<int>&,
                                         const Hyperparams&, std::uint64_t);

struct LearnerSpec {
    std::string id;
    FitFn fit = nullptr;
    std::vector<Hyperparams> grid;
};

// Known ids: "elastic_net", "random_forest", "gbt", "mlp".
FitFn fit_function_for(const std::string& learner_id);

// The stock search grids; n_features feeds the forest's mtry rules.
std::vector<Hyperparams> default_grid(const std::string& learner_id, std::size_t n_features);

void check_binary_labels(const std::vector<int>& y, std::size_t n_rows);

}  // namespace prognosis
