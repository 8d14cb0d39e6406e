#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prognosis/model.hpp"

namespace prognosis {

struct CvConfig {
    int outer_folds = 5;
    int outer_repeats = 5;
    int inner_folds = 10;
    int inner_repeats = 3;
    bool stratified = true;
    std::uint64_t master_seed = 0;

    void validate() const;
};

enum class ThresholdRule { youden, fixed_half };

// Per repeat, a partition of rows into k folds; stratified partitions keep
// the class ratio within one patient per fold. assignments[r][i] is row
// i's fold in repeat r.
std::vector<std::vector<int>> make_folds(const std::vector<int>& labels, int k, int repeats,
                                         bool stratified, std::uint64_t seed);

// Evaluates every grid point by mean held-out AUC over the inner folds and
// returns the argmax; ties go to the first point in declaration order.
// Points that fail on every fold are excluded.
Hyperparams grid_search(const LearnerSpec& learner, const DesignMatrix& x,
                        const std::vector<int>& y, int folds, int repeats, bool stratified,
                        std::uint64_t seed);

struct FoldOutcome {
    int repeat = 0;
    int fold = 0;
    double auc_value = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
    double threshold = 0.0;
    Hyperparams chosen;
    bool failed = false;
    std::string error;
    std::vector<double> heldout_scores;  // in-memory only (ensemble checks)
};

struct ModelReport {
    std::string model;
    std::vector<FoldOutcome> folds;
    double mean_auc = 0.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    double mean_sensitivity = 0.0;
    double mean_specificity = 0.0;

    std::vector<double> auc_samples() const;  // successful folds only
};

struct PairwiseComparison {
    std::string model_a;
    std::string model_b;
    double p_value = 1.0;
};

struct EvalReport {
    CvConfig config;
    std::vector<ModelReport> models;
    std::vector<PairwiseComparison> comparisons;

    nlohmann::json to_json() const;
    const ModelReport& model(const std::string& name) const;
};

// Fig-7-style nested resampling: per outer (repeat, fold), hyperparameters
// are tuned on the training split alone, the winner is refit on the whole
// split, the held-out fold is scored, and sens/spec are taken at a
// threshold chosen on training scores. With >= 2 learners an "ensemble"
// row averages the members' held-out probabilities fold by fold.
EvalReport nested_cv(const std::vector<LearnerSpec>& learners, const DesignMatrix& x,
                     const std::vector<int>& y, const CvConfig& config, int workers = 1,
                     ThresholdRule rule = ThresholdRule::youden);

void write_fold_metrics_csv(const EvalReport& report, const std::string& path,
                            const std::string& provenance = "");

}  // namespace prognosis
