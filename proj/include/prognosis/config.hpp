#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prognosis/cross_validation.hpp"
#include "prognosis/ehr.hpp"
#include "prognosis/features.hpp"
#include "prognosis/pts.hpp"
#include "prognosis/synthetic.hpp"

namespace prognosis {

struct CohortPaths {
    std::string patients;
    std::string vitals;
    std::string chart;
    std::string ehr;
    std::string labels;
};

enum class FeatureSet { combined, ehr_only, pts_only };
enum class OutcomeKind { neuro, survival };

struct PipelineConfig {
    std::uint64_t master_seed = 7;
    std::string output_dir = "out";

    // cohort: either a synthetic generator config or concrete file paths
    std::optional<SyntheticConfig> synthetic;
    std::optional<CohortPaths> cohort_paths;
    std::set<std::string> categorical_columns{"admit_unit"};

    BoundsTable bounds = BoundsTable::clinical_defaults();
    PreprocessParams preprocess;

    std::string catalog_kind = "default";  // "default" | "compact" | a file path
    double ehr_drop_threshold = 0.40;
    int ehr_impute_iterations = 5;
    RfImputeParams ehr_impute_params;

    std::vector<std::string> enabled_learners{"elastic_net", "random_forest", "gbt", "mlp"};
    nlohmann::json grid_overrides = nlohmann::json::object();

    CvConfig cv;
    FeatureSet feature_set = FeatureSet::combined;
    OutcomeKind outcome = OutcomeKind::neuro;
    ThresholdRule threshold_rule = ThresholdRule::youden;

    void validate() const;  // exhaustive, before any computation

    // 64-bit FNV-1a over the canonical config document.  The output
    // directory is excluded so runs into different directories produce
    // byte-identical artifacts.
    std::string fingerprint() const;
    std::string provenance() const;  // "master_seed=..; config=.."

    nlohmann::json to_json() const;
    static PipelineConfig from_json(const nlohmann::json& doc);
    static PipelineConfig from_file(const std::string& path);

    FeatureCatalog load_catalog() const;
    std::vector<LearnerSpec> learner_specs(std::size_t n_features) const;
};

}  // namespace prognosis
