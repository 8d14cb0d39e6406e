#pragma once

#include <string>
#include <vector>

#include "prognosis/config.hpp"
#include "prognosis/ehr.hpp"

namespace prognosis {

// Each command reads its inputs (from configured paths or the output
// directory), writes its artifacts there, and returns a one-line summary.

std::string run_synth(const PipelineConfig& config);
std::string run_preprocess(const PipelineConfig& config, int workers);
std::string run_features(const PipelineConfig& config, int workers);
std::string run_impute(const PipelineConfig& config);
std::string run_evaluate(const PipelineConfig& config, int workers);
std::string run_rank(const PipelineConfig& config);
std::vector<std::string> run_all(const PipelineConfig& config, int workers);

// Preprocessed-signal round-trip used between the preprocess and feature
// stages (patient_id, channel, slot, value, state).
void write_preprocessed(const PreprocessedCohort& cohort, const std::string& path,
                        const std::string& provenance = "");
PreprocessedCohort load_preprocessed(const std::string& path);

// Cohort assembly for the modeling stages: joins the PTS feature matrix
// and the one-hot EHR matrix on patient_id (intersection, feature-matrix
// order), keeping only rows with fully-observed features.
struct ModelingData {
    DesignMatrix x;
    std::vector<int> y;
    std::vector<std::string> patient_ids;
    std::size_t n_dropped_rows = 0;
};

ModelingData assemble_modeling_data(const FeatureMatrix& pts_features, const EhrTable& ehr_imputed,
                                    const LabelTable& labels, FeatureSet feature_set,
                                    OutcomeKind outcome);

}  // namespace prognosis
