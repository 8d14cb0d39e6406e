#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "prognosis/cohort.hpp"

namespace prognosis {

enum class SlotState : std::uint8_t { observed, missing, rejected, imputed_chart, imputed_interp };

// One vital-sign channel on the fixed 5-minute grid. Slots without a value
// (missing/rejected) carry NaN; valued slots are finite.
struct PtsSignal {
    Channel channel = Channel::hr;
    std::vector<double> values;   // size kSlotsPerDay
    std::vector<SlotState> mask;  // size kSlotsPerDay

    PtsSignal() = default;
    explicit PtsSignal(Channel c);

    bool has_value(int slot) const {
        SlotState s = mask[static_cast<std::size_t>(slot)];
        return s == SlotState::observed || s == SlotState::imputed_chart ||
               s == SlotState::imputed_interp;
    }
};

struct Bounds {
    double lower = 0.0;
    double upper = 0.0;
};

struct BoundsTable {
    std::map<Channel, Bounds> bounds;

    const Bounds& at(Channel c) const;
    void validate() const;  // lower < upper for every channel
    static BoundsTable clinical_defaults();
};

// Half-open run of consecutive slots.
struct SlotRun {
    int begin = 0;
    int end = 0;
};

// Grid mapping: slot = offset_minutes / 5 for offsets inside the first
// 24 h; rows off the grid or past 24 h are ignored. Blank values stay
// missing.
PtsSignal signal_from_raw(Channel channel, const RawSeries& series);

// Nurse-chart samples averaged into 5-minute bins; NaN where a bin is empty.
std::vector<double> bin_chart_series(const RawSeries& series);

// Sliding-median/MAD candidates: an observed slot is flagged when it sits
// more than k absolute deviations from the centred window median (window
// shrinks at the edges). Flags are grouped into maximal contiguous runs.
std::vector<SlotRun> detect_outliers(const PtsSignal& signal, const BoundsTable& bounds,
                                     int window_len, double k);

// Any candidate run containing at least one bound violation is rejected
// wholly; runs that never leave the clinical bounds are retained. Observed
// slots outside the bounds are rejected even when the MAD rule missed them,
// so the pipeline's in-bounds guarantee holds.
PtsSignal remove_outlier_intervals(const PtsSignal& signal, const std::vector<SlotRun>& runs,
                                   const BoundsTable& bounds);

struct ChartImputeResult {
    PtsSignal signal;
    double correlation = std::numeric_limits<double>::quiet_NaN();
    int n_common = 0;
    bool gate_passed = false;
    int n_filled = 0;
};

// Pearson correlation over slots where the signal is observed and the chart
// has a value; gaps are filled from the chart only when the correlation is
// strictly > 0.8 over strictly > 15 common slots. An undefined correlation
// (zero variance on either side) fails the gate.
ChartImputeResult impute_from_chart(const PtsSignal& signal, const std::vector<double>& chart_slots);

struct InterpolateResult {
    PtsSignal signal;
    int n_filled = 0;
    bool usable = false;  // false iff the signal had no valued slot at all
};

// Interior gaps are filled linearly between the nearest valued slots; edge
// gaps extend the nearest value as a constant.
InterpolateResult interpolate_gaps(const PtsSignal& signal);

struct PreprocessParams {
    int window_len = 25;  // ~2 h centred window
    double k = 3.0;

    void validate() const;
};

struct PreprocessResult {
    PtsSignal signal;
    int n_rejected = 0;
    int n_chart_imputed = 0;
    int n_interpolated = 0;
    double chart_correlation = std::numeric_limits<double>::quiet_NaN();
    bool gate_passed = false;
    bool usable = false;
};

// detect -> remove intervals -> chart imputation -> linear interpolation.
// Chart values outside the clinical bounds are never used for imputation.
PreprocessResult preprocess_pipeline(const PtsSignal& signal, const std::vector<double>& chart_slots,
                                     const BoundsTable& bounds, const PreprocessParams& params);

// Preprocessed signals for a whole cohort, plus the audit rows the CLI
// writes (patient, channel, counts, gate outcome).
struct PreprocessAuditRow {
    std::string patient_id;
    Channel channel = Channel::hr;
    int n_rejected = 0;
    int n_chart_imputed = 0;
    int n_interpolated = 0;
    double chart_correlation = std::numeric_limits<double>::quiet_NaN();
    bool gate_passed = false;
    bool usable = false;
};

struct PreprocessedCohort {
    std::vector<std::string> patient_ids;
    std::map<std::string, std::map<Channel, PtsSignal>> signals;
    std::vector<PreprocessAuditRow> audit;
};

PreprocessedCohort preprocess_cohort(const CohortDataset& dataset, const BoundsTable& bounds,
                                     const PreprocessParams& params, int workers = 1);

}  // namespace prognosis
