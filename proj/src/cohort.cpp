#include "prognosis/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "prognosis/csv.hpp"

namespace prognosis {

const char* to_string(Channel c) {
    switch (c) {
        case Channel::hr: return "hr";
        case Channel::rr: return "rr";
        case Channel::sbp: return "sbp";
        case Channel::dbp: return "dbp";
        case Channel::spo2: return "spo2";
    }
    return "?";
}

std::optional<Channel> channel_from_string(std::string_view s) {
    for (Channel c : kChannels)
        if (s == to_string(c)) return c;
    return std::nullopt;
}

double EhrColumn::missing_fraction() const {
    if (missing.empty()) return 0.0;
    std::size_t n = 0;
    for (auto m : missing) n += m;
    return static_cast<double>(n) / static_cast<double>(missing.size());
}

int EhrTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i].name == name) return static_cast<int>(i);
    return -1;
}

EhrTable EhrTable::subset_rows(const std::vector<std::size_t>& rows) const {
    EhrTable out;
    out.patient_ids.reserve(rows.size());
    for (auto r : rows) out.patient_ids.push_back(patient_ids[r]);
    out.columns.reserve(columns.size());
    for (const auto& col : columns) {
        EhrColumn c;
        c.name = col.name;
        c.type = col.type;
        for (auto r : rows) {
            c.missing.push_back(col.missing[r]);
            if (col.type == ColumnType::numeric)
                c.numeric.push_back(col.numeric[r]);
            else
                c.labels.push_back(col.labels[r]);
        }
        out.columns.push_back(std::move(c));
    }
    return out;
}

const PatientRecord* CohortDataset::find_patient(const std::string& id) const {
    for (const auto& p : patients)
        if (p.patient_id == id) return &p;
    return nullptr;
}

int LabelTable::index_of(const std::string& id) const {
    for (std::size_t i = 0; i < patient_ids.size(); ++i)
        if (patient_ids[i] == id) return static_cast<int>(i);
    return -1;
}

namespace {

std::string at_line(const CsvTable& t, std::size_t row) {
    return t.path + ":" + std::to_string(t.line_numbers[row]);
}

std::vector<PatientRecord> load_patients(const std::string& path) {
    CsvTable t = read_csv(path);
    const int c_id = t.require_column("patient_id");
    const int c_los = t.require_column("icu_los_hours");
    const int c_intub = t.require_column("intubated");
    const int c_off = t.require_column("outcome_offset_hours");
    const int c_status = t.require_column("discharge_status");
    const int c_mgcs = t.require_column("mgcs_at_discharge");

    std::vector<PatientRecord> patients;
    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        PatientRecord p;
        p.patient_id = row[c_id];
        if (p.patient_id.empty()) throw SchemaError(at_line(t, r) + ": empty patient_id");
        if (!seen.insert(p.patient_id).second)
            throw SchemaError(at_line(t, r) + ": duplicate patient_id '" + p.patient_id + "'");

        auto los = parse_double_cell(row[c_los], at_line(t, r) + " icu_los_hours");
        if (!los || *los < 0.0)
            throw SchemaError(at_line(t, r) + ": icu_los_hours must be a non-negative number");
        p.icu_los_hours = *los;

        if (row[c_intub] == "0") p.intubated = false;
        else if (row[c_intub] == "1") p.intubated = true;
        else throw SchemaError(at_line(t, r) + ": intubated must be 0 or 1, got '" + row[c_intub] + "'");

        auto off = parse_double_cell(row[c_off], at_line(t, r) + " outcome_offset_hours");
        if (!off) throw SchemaError(at_line(t, r) + ": outcome_offset_hours is required");
        p.outcome_offset_hours = *off;

        if (row[c_status] == "alive") p.discharge_status = DischargeStatus::alive;
        else if (row[c_status] == "died") p.discharge_status = DischargeStatus::died;
        else throw SchemaError(at_line(t, r) + ": discharge_status must be alive or died, got '" +
                               row[c_status] + "'");

        auto mgcs = parse_int_cell(row[c_mgcs], at_line(t, r) + " mgcs_at_discharge");
        if (mgcs) {
            if (*mgcs < 1 || *mgcs > 6)
                throw SchemaError(at_line(t, r) + ": mgcs_at_discharge must be in 1..6, got " +
                                  std::to_string(*mgcs));
            p.mgcs_at_discharge = static_cast<int>(*mgcs);
        }
        patients.push_back(std::move(p));
    }
    return patients;
}

std::map<std::string, ChannelSeries> load_series(const std::string& path,
                                                 const std::unordered_set<std::string>& known_ids) {
    CsvTable t = read_csv(path);
    const int c_id = t.require_column("patient_id");
    const int c_chan = t.require_column("channel");
    const int c_off = t.require_column("offset_minutes");
    const int c_val = t.require_column("value");

    std::map<std::string, ChannelSeries> out;
    std::unordered_set<std::string> seen_keys;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const std::string& id = row[c_id];
        if (!known_ids.count(id))
            throw SchemaError(at_line(t, r) + ": patient_id '" + id + "' not present in patients file");
        auto chan = channel_from_string(row[c_chan]);
        if (!chan)
            throw SchemaError(at_line(t, r) + ": unknown channel name '" + row[c_chan] + "'");
        auto off = parse_int_cell(row[c_off], at_line(t, r) + " offset_minutes");
        if (!off || *off < 0)
            throw SchemaError(at_line(t, r) + ": offset_minutes must be a non-negative integer");
        std::string key = id + "|" + row[c_chan] + "|" + std::to_string(*off);
        if (!seen_keys.insert(key).second)
            throw SchemaError(at_line(t, r) + ": duplicate (patient_id, channel, offset) row: " + key);
        RawSample s;
        s.offset_minutes = static_cast<int>(*off);
        s.value = parse_double_cell(row[c_val], at_line(t, r) + " value");
        out[id][*chan].push_back(s);
    }
    for (auto& [id, channels] : out)
        for (auto& [chan, series] : channels)
            std::sort(series.begin(), series.end(),
                      [](const RawSample& a, const RawSample& b) {
                          return a.offset_minutes < b.offset_minutes;
                      });
    return out;
}

EhrTable load_ehr(const std::string& path, const std::unordered_set<std::string>& known_ids,
                  const std::set<std::string>& categorical_columns) {
    CsvTable t = read_csv(path);
    const int c_id = t.require_column("patient_id");

    EhrTable table;
    table.columns.reserve(t.header.size() - 1);
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        if (static_cast<int>(c) == c_id) continue;
        EhrColumn col;
        col.name = t.header[c];
        col.type = categorical_columns.count(col.name) ? ColumnType::categorical
                                                       : ColumnType::numeric;
        table.columns.push_back(std::move(col));
    }

    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const std::string& id = row[c_id];
        if (!known_ids.count(id))
            throw SchemaError(at_line(t, r) + ": patient_id '" + id + "' not present in patients file");
        if (!seen.insert(id).second)
            throw SchemaError(at_line(t, r) + ": duplicate EHR row for patient_id '" + id + "'");
        table.patient_ids.push_back(id);
        std::size_t out_c = 0;
        for (std::size_t c = 0; c < t.header.size(); ++c) {
            if (static_cast<int>(c) == c_id) continue;
            EhrColumn& col = table.columns[out_c++];
            const std::string& cell = row[c];
            if (cell.empty()) {
                col.missing.push_back(1);
                if (col.type == ColumnType::numeric) col.numeric.push_back(0.0);
                else col.labels.emplace_back();
            } else {
                col.missing.push_back(0);
                if (col.type == ColumnType::numeric) {
                    auto v = parse_double_cell(cell, at_line(t, r) + " column '" + col.name + "'");
                    col.numeric.push_back(*v);
                } else {
                    col.labels.push_back(cell);
                }
            }
        }
    }
    return table;
}

}  // namespace

CohortDataset load_cohort(const std::string& vitals_path, const std::string& chart_path,
                          const std::string& ehr_path, const std::string& patients_path,
                          const std::set<std::string>& categorical_columns) {
    CohortDataset ds;
    ds.patients = load_patients(patients_path);
    std::unordered_set<std::string> ids;
    for (const auto& p : ds.patients) ids.insert(p.patient_id);
    ds.vitals = load_series(vitals_path, ids);
    ds.chart = load_series(chart_path, ids);
    ds.ehr = load_ehr(ehr_path, ids, categorical_columns);
    return ds;
}

CohortDataset select_patients(const CohortDataset& dataset) {
    CohortDataset out;
    out.ehr.columns.reserve(dataset.ehr.columns.size());

    std::vector<std::size_t> kept_ehr_rows;
    std::unordered_map<std::string, std::size_t> ehr_row_of;
    for (std::size_t r = 0; r < dataset.ehr.patient_ids.size(); ++r)
        ehr_row_of[dataset.ehr.patient_ids[r]] = r;

    for (const auto& p : dataset.patients) {
        const bool keep = p.icu_los_hours > 24.0 && p.intubated && p.outcome_offset_hours <= 24.0;
        if (!keep) continue;
        out.patients.push_back(p);
        if (auto it = dataset.vitals.find(p.patient_id); it != dataset.vitals.end())
            out.vitals[p.patient_id] = it->second;
        if (auto it = dataset.chart.find(p.patient_id); it != dataset.chart.end())
            out.chart[p.patient_id] = it->second;
        if (auto it = ehr_row_of.find(p.patient_id); it != ehr_row_of.end())
            kept_ehr_rows.push_back(it->second);
    }
    out.ehr = dataset.ehr.subset_rows(kept_ehr_rows);
    return out;
}

LabelTable derive_labels(const CohortDataset& dataset) {
    LabelTable labels;
    std::vector<std::string> bad;
    for (const auto& p : dataset.patients) {
        if (p.discharge_status == DischargeStatus::alive && !p.mgcs_at_discharge) {
            bad.push_back(p.patient_id);
            continue;
        }
        labels.patient_ids.push_back(p.patient_id);
        labels.survival.push_back(p.discharge_status);
        const bool favorable = p.discharge_status == DischargeStatus::alive &&
                               p.mgcs_at_discharge && *p.mgcs_at_discharge == 6;
        labels.neuro.push_back(favorable ? NeuroLabel::favorable : NeuroLabel::unfavorable);
    }
    if (!bad.empty()) {
        std::string msg = "survivors with absent mGCS cannot be labeled:";
        for (const auto& id : bad) msg += " " + id;
        throw LabelError(msg);
    }
    return labels;
}

void write_cohort(const CohortDataset& dataset, const std::string& patients_path,
                  const std::string& vitals_path, const std::string& chart_path,
                  const std::string& ehr_path, const std::string& provenance) {
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& p : dataset.patients) {
            std::vector<std::string> row;
            row.push_back(p.patient_id);
            row.push_back(format_double(p.icu_los_hours));
            row.push_back(p.intubated ? "1" : "0");
            row.push_back(format_double(p.outcome_offset_hours));
            row.push_back(p.discharge_status == DischargeStatus::alive ? "alive" : "died");
            row.push_back(p.mgcs_at_discharge ? std::to_string(*p.mgcs_at_discharge) : "");
            rows.push_back(std::move(row));
        }
        write_csv(patients_path,
                  {"patient_id", "icu_los_hours", "intubated", "outcome_offset_hours",
                   "discharge_status", "mgcs_at_discharge"},
                  rows, provenance);
    }
    auto write_series = [&](const std::map<std::string, ChannelSeries>& data,
                            const std::string& path) {
        std::vector<std::vector<std::string>> rows;
        for (const auto& p : dataset.patients) {
            auto it = data.find(p.patient_id);
            if (it == data.end()) continue;
            for (const auto& [chan, series] : it->second) {
                for (const auto& s : series) {
                    rows.push_back({p.patient_id, to_string(chan),
                                    std::to_string(s.offset_minutes),
                                    s.value ? format_double(*s.value) : ""});
                }
            }
        }
        write_csv(path, {"patient_id", "channel", "offset_minutes", "value"}, rows, provenance);
    };
    write_series(dataset.vitals, vitals_path);
    write_series(dataset.chart, chart_path);
    {
        std::vector<std::string> header = {"patient_id"};
        for (const auto& col : dataset.ehr.columns) header.push_back(col.name);
        std::vector<std::vector<std::string>> rows;
        for (std::size_t r = 0; r < dataset.ehr.patient_ids.size(); ++r) {
            std::vector<std::string> row;
            row.push_back(dataset.ehr.patient_ids[r]);
            for (const auto& col : dataset.ehr.columns) {
                if (col.missing[r]) row.emplace_back();
                else if (col.type == ColumnType::numeric) row.push_back(format_double(col.numeric[r]));
                else row.push_back(col.labels[r]);
            }
            rows.push_back(std::move(row));
        }
        write_csv(ehr_path, header, rows, provenance);
    }
}

void write_labels(const LabelTable& labels, const std::string& path,
                  const std::string& provenance) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        rows.push_back({labels.patient_ids[i],
                        labels.neuro[i] == NeuroLabel::favorable ? "favorable" : "unfavorable",
                        labels.survival[i] == DischargeStatus::alive ? "alive" : "died"});
    }
    write_csv(path, {"patient_id", "neuro_label", "survival_label"}, rows, provenance);
}

LabelTable load_labels(const std::string& path) {
    CsvTable t = read_csv(path);
    const int c_id = t.require_column("patient_id");
    const int c_neuro = t.require_column("neuro_label");
    const int c_surv = t.require_column("survival_label");
    LabelTable labels;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        labels.patient_ids.push_back(row[c_id]);
        if (row[c_neuro] == "favorable") labels.neuro.push_back(NeuroLabel::favorable);
        else if (row[c_neuro] == "unfavorable") labels.neuro.push_back(NeuroLabel::unfavorable);
        else throw SchemaError(at_line(t, r) + ": bad neuro_label '" + row[c_neuro] + "'");
        if (row[c_surv] == "alive") labels.survival.push_back(DischargeStatus::alive);
        else if (row[c_surv] == "died") labels.survival.push_back(DischargeStatus::died);
        else throw SchemaError(at_line(t, r) + ": bad survival_label '" + row[c_surv] + "'");
    }
    return labels;
}

}  // namespace prognosis
