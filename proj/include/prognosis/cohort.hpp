#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "prognosis/common.hpp"

namespace prognosis {

// Vitals live on a fixed 5-minute grid covering the first 24 ICU hours.
constexpr int kSlotMinutes = 5;
constexpr int kSlotsPerDay = 288;

enum class Channel : std::uint8_t { hr, rr, sbp, dbp, spo2 };
constexpr std::array<Channel, 5> kChannels = {Channel::hr, Channel::rr, Channel::sbp,
                                              Channel::dbp, Channel::spo2};
const char* to_string(Channel c);
std::optional<Channel> channel_from_string(std::string_view s);

enum class DischargeStatus : std::uint8_t { alive, died };

struct PatientRecord {
    std::string patient_id;
    double icu_los_hours = 0.0;
    bool intubated = false;
    double outcome_offset_hours = 0.0;  // hours before ICU discharge at which outcome was recorded
    DischargeStatus discharge_status = DischargeStatus::alive;
    std::optional<int> mgcs_at_discharge;  // 1..6 when present
};

struct RawSample {
    int offset_minutes = 0;
    std::optional<double> value;  // nullopt = recorded-but-blank (missing)
};
using RawSeries = std::vector<RawSample>;
using ChannelSeries = std::map<Channel, RawSeries>;

enum class ColumnType : std::uint8_t { numeric, categorical };

struct EhrColumn {
    std::string name;
    ColumnType type = ColumnType::numeric;
    std::vector<double> numeric;        // per-row values; meaningless where missing
    std::vector<std::string> labels;    // categorical levels per row; empty when numeric
    std::vector<std::uint8_t> missing;  // 1 = missing cell

    double missing_fraction() const;
};

struct EhrTable {
    std::vector<std::string> patient_ids;
    std::vector<EhrColumn> columns;

    std::size_t n_rows() const { return patient_ids.size(); }
    int column_index(const std::string& name) const;  // -1 when absent
    EhrTable subset_rows(const std::vector<std::size_t>& rows) const;
};

struct CohortDataset {
    std::vector<PatientRecord> patients;
    std::map<std::string, ChannelSeries> vitals;
    std::map<std::string, ChannelSeries> chart;
    EhrTable ehr;

    const PatientRecord* find_patient(const std::string& id) const;
};

enum class NeuroLabel : std::uint8_t { favorable, unfavorable };

struct LabelTable {
    std::vector<std::string> patient_ids;
    std::vector<NeuroLabel> neuro;
    std::vector<DischargeStatus> survival;

    std::size_t size() const { return patient_ids.size(); }
    int index_of(const std::string& id) const;
};

// Reads the four cohort CSVs and cross-references them. Categorical EHR
// columns must be declared by name; everything else parses as numeric.
CohortDataset load_cohort(const std::string& vitals_path, const std::string& chart_path,
                          const std::string& ehr_path, const std::string& patients_path,
                          const std::set<std::string>& categorical_columns = {});

// Inclusion criteria: ICU stay > 24 h, intubated, outcome recorded within
// 24 h of discharge. Channel maps and the EHR table are filtered to match.
CohortDataset select_patients(const CohortDataset& dataset);

// favorable iff discharged alive with mGCS 6; death is unfavorable
// regardless of the recorded mGCS. A survivor with absent mGCS is an error.
LabelTable derive_labels(const CohortDataset& dataset);

// Write-back in the same schemas load_cohort reads (load-write-load is a
// fixed point). The provenance string becomes a '#' comment line.
void write_cohort(const CohortDataset& dataset, const std::string& patients_path,
                  const std::string& vitals_path, const std::string& chart_path,
                  const std::string& ehr_path, const std::string& provenance = "");
void write_labels(const LabelTable& labels, const std::string& path,
                  const std::string& provenance = "");
LabelTable load_labels(const std::string& path);

}  // namespace prognosis
