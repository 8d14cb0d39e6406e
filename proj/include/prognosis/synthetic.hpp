#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "prognosis/cohort.hpp"

namespace prognosis {

// Per-channel AR(1) process: x_t = mean + phi * (x_{t-1} - mean) + sigma * e_t.
// Each patient draws their own level (mean + mean_jitter * z) and their own
// innovation scale (sigma * exp(sigma_log_jitter * z)), so dispersion
// features overlap between outcome classes instead of separating them
// perfectly.
struct ArParams {
    double mean = 0.0;
    double phi = 0.0;
    double sigma = 1.0;
    double mean_jitter = 0.0;
};

// Seeded cohort with a latent outcome driving signal in two modalities:
// a designated EHR column is shifted for unfavorable patients, and the
// heart-rate innovation scale grows for favorable patients (a fluctuation
// surrogate learnable from dispersion-type features).
struct SyntheticConfig {
    int n_patients = 600;
    double favorable_fraction = 1046.0 / 2216.0;
    double died_given_unfavorable = 894.0 / 1170.0;

    std::map<Channel, ArParams> channel_params;  // defaults lie inside clinical bounds
    double sigma_log_jitter = 0.25;              // patient-to-patient innovation-scale spread

    double missing_rate = 0.04;    // per-slot chance a vitals sample is absent
    double artifact_rate = 0.008;  // per-slot chance an out-of-bounds artifact starts

    double ehr_effect = 1.2;   // shift (in sd units) of the planted column for unfavorable patients
    double pts_effect = 0.30;  // relative HR innovation-sd increase for favorable patients

    std::string planted_ehr_column = "lactate_mean";
    int n_noise_ehr_columns = 8;
    double ehr_missing_rate = 0.08;
    double sparse_column_missing_rate = 0.55;  // "sparse_marker" exercises the >40% drop rule

    int chart_period_slots = 6;      // one nurse-chart entry per 30 min
    double chart_noise_sd = 0.8;
    double chart_missing_rate = 0.2;
    double chart_uncorrelated_rate = 0.15;  // fraction of patients whose chart is pure noise

    // When > 0, a slice of patients violates an inclusion criterion so that
    // selection has work to do; default cohorts are fully includable.
    double inclusion_violation_rate = 0.0;

    SyntheticConfig();
    void validate() const;  // throws ConfigError
};

std::pair<CohortDataset, LabelTable> generate_synthetic_cohort(const SyntheticConfig& config,
                                                               std::uint64_t seed);

}  // namespace prognosis
