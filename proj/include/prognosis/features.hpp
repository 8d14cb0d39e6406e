#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prognosis/pts.hpp"
#include "prognosis/wavelet.hpp"

namespace prognosis {

enum class BinnedOuter { mean, sd };

// Binned statistic: partition into n_bins equal contiguous segments
// (remainder slots go to the last bin), take the mean inside each bin,
// then the outer statistic across bins. nullopt when the series is
// shorter than n_bins.
std::optional<double> binned_stat(std::span<const double> series, int n_bins, BinnedOuter outer);

// Symbolic-dynamics statistic: symbol s_i = 1 when |x_{i+1} - x_i| >= d,
// returns the fraction of the n-D overlapping length-D symbol words that
// are all-zeros or all-ones.
std::optional<double> polvar(std::span<const double> series, double d, int D);

// Shannon entropy (natural log) of ordinal patterns of m points spaced tau
// apart, ties broken by earlier index ranking lower, normalized by ln(m!).
std::optional<double> permutation_entropy(std::span<const double> series, int m, int tau);

struct BasicStats {
    std::optional<double> mean, sd, min, max, first, last, range, slope, acf1;
};

BasicStats basic_stats(std::span<const double> series);

// Catalog entries. window is [start_slot, end_slot) on the 288-slot grid.
enum class StatKind {
    mean, sd, min, max, first, last, range, slope, acf1,
    binned_mean, binned_sd, polvar, perm_entropy, wavelet_mean, wavelet_mean_abs,
};

const char* to_string(StatKind k);
std::optional<StatKind> stat_kind_from_string(std::string_view s);

struct StatParams {
    int n_bins = 20;
    double d = 3.0;
    int word_len = 5;  // D
    int m = 4;
    int tau = 2;
    int level = 1;
};

struct FeatureDescriptor {
    std::string name;
    Channel channel = Channel::hr;
    int start_slot = 0;
    int end_slot = kSlotsPerDay;
    StatKind kind = StatKind::mean;
    StatParams params;
};

struct FeatureCatalog {
    std::vector<FeatureDescriptor> descriptors;

    void validate() const;  // unique names, sane windows/params

    // Named windows: full 24 h, two 12 h halves, four 6 h quarters. Basic
    // statistics are emitted per window; the specialty statistics
    // (binned/polvar/permutation entropy/wavelet) over the full day only.
    static FeatureCatalog default_catalog();
    // Full-day window only; used where a small matrix is wanted.
    static FeatureCatalog compact_catalog();

    std::string to_json_string() const;
    static FeatureCatalog from_json_string(const std::string& text);
};

struct FeatureMatrix {
    std::vector<std::string> patient_ids;
    std::vector<std::string> feature_names;
    std::vector<double> values;  // row-major; NaN = missing

    std::size_t n_rows() const { return patient_ids.size(); }
    std::size_t n_cols() const { return feature_names.size(); }
    double at(std::size_t r, std::size_t c) const { return values[r * n_cols() + c]; }
};

// One row per patient in cohort order, one column per descriptor in
// catalog order; missing where a statistic's preconditions fail or the
// channel is unusable for that patient.
FeatureMatrix extract_features(const PreprocessedCohort& cohort, const FeatureCatalog& catalog,
                               int workers = 1);

void write_feature_matrix(const FeatureMatrix& m, const std::string& path,
                          const std::string& provenance = "");
FeatureMatrix load_feature_matrix(const std::string& path);

}  // namespace prognosis
