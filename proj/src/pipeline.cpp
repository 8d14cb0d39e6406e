#include "prognosis/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <unordered_map>

#include "prognosis/csv.hpp"
#include "prognosis/metrics.hpp"
#include "prognosis/random_forest.hpp"
#include "prognosis/ranking.hpp"

namespace prognosis {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string out_path(const PipelineConfig& config, const char* name) {
    return (fs::path(config.output_dir) / name).string();
}

void ensure_output_dir(const PipelineConfig& config) {
    fs::create_directories(config.output_dir);
}

const char* slot_state_name(SlotState s) {
    switch (s) {
        case SlotState::observed: return "observed";
        case SlotState::missing: return "missing";
        case SlotState::rejected: return "rejected";
        case SlotState::imputed_chart: return "imputed_chart";
        case SlotState::imputed_interp: return "imputed_interp";
    }
    return "?";
}

SlotState slot_state_from(const std::string& s) {
    if (s == "observed") return SlotState::observed;
    if (s == "missing") return SlotState::missing;
    if (s == "rejected") return SlotState::rejected;
    if (s == "imputed_chart") return SlotState::imputed_chart;
    if (s == "imputed_interp") return SlotState::imputed_interp;
    throw SchemaError("unknown slot state '" + s + "'");
}

// Loads the cohort either from configured external paths or from the synth
// artifacts in the output directory, then applies the inclusion criteria.
CohortDataset load_selected_cohort(const PipelineConfig& config) {
    CohortDataset ds;
    if (config.cohort_paths) {
        ds = load_cohort(config.cohort_paths->vitals, config.cohort_paths->chart,
                         config.cohort_paths->ehr, config.cohort_paths->patients,
                         config.categorical_columns);
    } else {
        ds = load_cohort(out_path(config, "vitals.csv"), out_path(config, "chart.csv"),
                         out_path(config, "ehr.csv"), out_path(config, "patients.csv"),
                         config.categorical_columns);
    }
    return select_patients(ds);
}

LabelTable load_cohort_labels(const PipelineConfig& config) {
    if (config.cohort_paths && !config.cohort_paths->labels.empty())
        return load_labels(config.cohort_paths->labels);
    return load_labels(out_path(config, "labels.csv"));
}

}  // namespace

void write_preprocessed(const PreprocessedCohort& cohort, const std::string& path,
                        const std::string& provenance) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& id : cohort.patient_ids) {
        auto pit = cohort.signals.find(id);
        if (pit == cohort.signals.end()) continue;
        for (Channel c : kChannels) {
            auto sit = pit->second.find(c);
            if (sit == pit->second.end()) continue;
            const PtsSignal& sig = sit->second;
            for (int t = 0; t < kSlotsPerDay; ++t) {
                rows.push_back({id, to_string(c), std::to_string(t),
                                sig.has_value(t) ? format_double(sig.values[t]) : "",
                                slot_state_name(sig.mask[t])});
            }
        }
    }
    write_csv(path, {"patient_id", "channel", "slot", "value", "state"}, rows, provenance);
}

PreprocessedCohort load_preprocessed(const std::string& path) {
    CsvTable t = read_csv(path);
    const int c_id = t.require_column("patient_id");
    const int c_chan = t.require_column("channel");
    const int c_slot = t.require_column("slot");
    const int c_val = t.require_column("value");
    const int c_state = t.require_column("state");

    PreprocessedCohort out;
    std::unordered_map<std::string, bool> seen;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const std::string& id = row[c_id];
        auto chan = channel_from_string(row[c_chan]);
        if (!chan) throw SchemaError(path + ": unknown channel '" + row[c_chan] + "'");
        auto slot = parse_int_cell(row[c_slot], path + " slot");
        if (!slot || *slot < 0 || *slot >= kSlotsPerDay)
            throw SchemaError(path + ": slot out of range");
        if (seen.emplace(id, true).second) out.patient_ids.push_back(id);
        auto& per_patient = out.signals[id];
        auto it = per_patient.find(*chan);
        if (it == per_patient.end()) it = per_patient.emplace(*chan, PtsSignal(*chan)).first;
        PtsSignal& sig = it->second;
        sig.mask[*slot] = slot_state_from(row[c_state]);
        auto v = parse_double_cell(row[c_val], path + " value");
        if (v) sig.values[*slot] = *v;
    }
    return out;
}

std::string run_synth(const PipelineConfig& config) {
    config.validate();
    if (!config.synthetic)
        throw ConfigError("synth: config.cohort.synthetic section is required");
    ensure_output_dir(config);
    auto [dataset, labels] = generate_synthetic_cohort(*config.synthetic, config.master_seed);
    const std::string prov = config.provenance();
    write_cohort(dataset, out_path(config, "patients.csv"), out_path(config, "vitals.csv"),
                 out_path(config, "chart.csv"), out_path(config, "ehr.csv"), prov);
    write_labels(labels, out_path(config, "labels.csv"), prov);
    std::size_t favorable = 0;
    for (auto n : labels.neuro) favorable += n == NeuroLabel::favorable;
    return "synth: wrote " + std::to_string(dataset.patients.size()) + " patients (" +
           std::to_string(favorable) + " favorable) to " + config.output_dir;
}

std::string run_preprocess(const PipelineConfig& config, int workers) {
    config.validate();
    ensure_output_dir(config);
    CohortDataset selected = load_selected_cohort(config);
    PreprocessedCohort pre = preprocess_cohort(selected, config.bounds, config.preprocess, workers);
    const std::string prov = config.provenance();
    write_preprocessed(pre, out_path(config, "pts_preprocessed.csv"), prov);
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& a : pre.audit) {
            rows.push_back({a.patient_id, to_string(a.channel), std::to_string(a.n_rejected),
                            std::to_string(a.n_chart_imputed), std::to_string(a.n_interpolated),
                            std::isnan(a.chart_correlation) ? ""
                                                            : format_double(a.chart_correlation),
                            a.gate_passed ? "1" : "0"});
        }
        write_csv(out_path(config, "pts_audit.csv"),
                  {"patient_id", "channel", "n_rejected", "n_chart_imputed", "n_interpolated",
                   "chart_correlation", "gate_passed"},
                  rows, prov);
    }
    return "preprocess: " + std::to_string(selected.patients.size()) + " patients x " +
           std::to_string(kChannels.size()) + " channels -> " +
           out_path(config, "pts_preprocessed.csv");
}

std::string run_features(const PipelineConfig& config, int workers) {
    config.validate();
    ensure_output_dir(config);
    PreprocessedCohort pre = load_preprocessed(out_path(config, "pts_preprocessed.csv"));
    FeatureCatalog catalog = config.load_catalog();
    FeatureMatrix m = extract_features(pre, catalog, workers);
    write_feature_matrix(m, out_path(config, "features.csv"), config.provenance());
    return "features: " + std::to_string(m.n_rows()) + " patients x " +
           std::to_string(m.n_cols()) + " features -> " + out_path(config, "features.csv");
}

std::string run_impute(const PipelineConfig& config) {
    config.validate();
    ensure_output_dir(config);
    CohortDataset selected = load_selected_cohort(config);
    const auto audit = ehr_audit(selected.ehr, config.ehr_drop_threshold);
    EhrTable kept = drop_sparse_columns(selected.ehr, config.ehr_drop_threshold);
    EhrTable imputed = rf_impute(kept, config.ehr_impute_iterations,
                                 derive_seed(config.master_seed, 0x65687269u),
                                 config.ehr_impute_params);
    const std::string prov = config.provenance();
    write_ehr_table(imputed, out_path(config, "ehr_imputed.csv"), prov);
    {
        json cols = json::array();
        for (const auto& a : audit)
            cols.push_back(json{{"column", a.name},
                                {"missing_fraction", a.missing_fraction},
                                {"dropped", a.dropped}});
        json doc{{"provenance", prov},
                 {"drop_threshold", config.ehr_drop_threshold},
                 {"columns", cols}};
        std::ofstream out(out_path(config, "ehr_audit.json"));
        out << doc.dump(2) << "\n";
    }
    std::size_t dropped = 0;
    for (const auto& a : audit) dropped += a.dropped;
    return "impute: kept " + std::to_string(imputed.columns.size()) + " columns (dropped " +
           std::to_string(dropped) + ") -> " + out_path(config, "ehr_imputed.csv");
}

ModelingData assemble_modeling_data(const FeatureMatrix& pts_features, const EhrTable& ehr_imputed,
                                    const LabelTable& labels, FeatureSet feature_set,
                                    OutcomeKind outcome) {
    const EncodedEhr encoded = one_hot_encode(ehr_imputed);
    std::unordered_map<std::string, std::size_t> ehr_row;
    for (std::size_t r = 0; r < ehr_imputed.patient_ids.size(); ++r)
        ehr_row[ehr_imputed.patient_ids[r]] = r;
    std::unordered_map<std::string, std::size_t> label_row;
    for (std::size_t r = 0; r < labels.patient_ids.size(); ++r)
        label_row[labels.patient_ids[r]] = r;

    ModelingData data;
    const bool use_pts = feature_set != FeatureSet::ehr_only;
    const bool use_ehr = feature_set != FeatureSet::pts_only;
    if (use_pts)
        data.x.feature_names.insert(data.x.feature_names.end(), pts_features.feature_names.begin(),
                                    pts_features.feature_names.end());
    if (use_ehr)
        data.x.feature_names.insert(data.x.feature_names.end(), encoded.feature_names.begin(),
                                    encoded.feature_names.end());

    for (std::size_t r = 0; r < pts_features.n_rows(); ++r) {
        const std::string& id = pts_features.patient_ids[r];
        auto lit = label_row.find(id);
        auto eit = ehr_row.find(id);
        if (lit == label_row.end() || eit == ehr_row.end()) {
            ++data.n_dropped_rows;
            continue;
        }
        std::vector<double> row;
        row.reserve(data.x.feature_names.size());
        bool complete = true;
        if (use_pts) {
            for (std::size_t c = 0; c < pts_features.n_cols(); ++c) {
                const double v = pts_features.at(r, c);
                if (std::isnan(v)) {
                    complete = false;
                    break;
                }
                row.push_back(v);
            }
        }
        if (complete && use_ehr) {
            const std::size_t er = eit->second;
            for (std::size_t c = 0; c < encoded.feature_names.size(); ++c)
                row.push_back(encoded.data[er * encoded.feature_names.size() + c]);
        }
        if (!complete) {
            ++data.n_dropped_rows;
            continue;
        }
        data.x.data.insert(data.x.data.end(), row.begin(), row.end());
        ++data.x.n_rows;
        data.patient_ids.push_back(id);
        const std::size_t lr = lit->second;
        data.y.push_back(outcome == OutcomeKind::neuro
                             ? (labels.neuro[lr] == NeuroLabel::favorable ? 1 : 0)
                             : (labels.survival[lr] == DischargeStatus::alive ? 1 : 0));
    }
    return data;
}

namespace {

ModelingData load_modeling_data(const PipelineConfig& config) {
    FeatureMatrix pts = load_feature_matrix(out_path(config, "features.csv"));
    CsvTable ehr_csv = read_csv(out_path(config, "ehr_imputed.csv"));
    EhrTable ehr;
    const int c_id = ehr_csv.require_column("patient_id");
    for (std::size_t c = 0; c < ehr_csv.header.size(); ++c) {
        if (static_cast<int>(c) == c_id) continue;
        EhrColumn col;
        col.name = ehr_csv.header[c];
        col.type = config.categorical_columns.count(col.name) ? ColumnType::categorical
                                                              : ColumnType::numeric;
        ehr.columns.push_back(std::move(col));
    }
    for (std::size_t r = 0; r < ehr_csv.rows.size(); ++r) {
        ehr.patient_ids.push_back(ehr_csv.rows[r][c_id]);
        std::size_t out_c = 0;
        for (std::size_t c = 0; c < ehr_csv.header.size(); ++c) {
            if (static_cast<int>(c) == c_id) continue;
            EhrColumn& col = ehr.columns[out_c++];
            const std::string& cell = ehr_csv.rows[r][c];
            col.missing.push_back(0);
            if (col.type == ColumnType::numeric) {
                auto v = parse_double_cell(cell, "ehr_imputed.csv cell");
                if (!v) throw SchemaError("ehr_imputed.csv: missing cell after imputation");
                col.numeric.push_back(*v);
                col.labels.emplace_back();
            } else {
                col.labels.push_back(cell);
                col.numeric.push_back(0.0);
            }
        }
    }
    LabelTable labels = load_cohort_labels(config);
    return assemble_modeling_data(pts, ehr, labels, config.feature_set, config.outcome);
}

}  // namespace

std::string run_evaluate(const PipelineConfig& config, int workers) {
    config.validate();
    ensure_output_dir(config);
    ModelingData data = load_modeling_data(config);
    if (data.x.n_rows == 0) throw Error("evaluate: no usable rows after assembly");

    auto learners = config.learner_specs(data.x.n_cols());
    EvalReport report = nested_cv(learners, data.x, data.y, config.cv, workers,
                                  config.threshold_rule);

    const std::string prov = config.provenance();
    json doc = report.to_json();
    doc["provenance"] = prov;
    doc["n_rows"] = data.x.n_rows;
    doc["n_features"] = data.x.n_cols();
    doc["n_dropped_rows"] = data.n_dropped_rows;
    {
        std::ofstream out(out_path(config, "eval_report.json"));
        out << doc.dump(2) << "\n";
    }
    write_fold_metrics_csv(report, out_path(config, "fold_metrics.csv"), prov);

    std::string summary = "evaluate:";
    for (const auto& m : report.models) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), " %s=%.3f", m.model.c_str(), m.mean_auc);
        summary += buf;
    }
    return summary;
}

namespace {

// Modal forest hyperparameters across the outer folds of eval_report.json;
// stock defaults when the report is absent.
Hyperparams modal_forest_hyperparams(const PipelineConfig& config, std::size_t n_features) {
    const std::string report_path = out_path(config, "eval_report.json");
    Hyperparams fallback{{"n_trees", 300.0},
                         {"mtry", std::max(1.0, std::floor(std::sqrt(static_cast<double>(n_features))))},
                         {"min_leaf", 5.0}};
    std::ifstream in(report_path);
    if (!in) return fallback;
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error&) {
        return fallback;
    }
    std::map<std::string, std::pair<int, Hyperparams>> counts;
    for (const auto& m : doc.at("models")) {
        if (m.at("model").get<std::string>() != "random_forest") continue;
        for (const auto& f : m.at("folds")) {
            if (f.at("failed").get<bool>()) continue;
            Hyperparams hp = f.at("hyperparameters").get<Hyperparams>();
            auto key = json(hp).dump();
            auto& slot = counts.emplace(key, std::make_pair(0, hp)).first->second;
            ++slot.first;
        }
    }
    if (counts.empty()) return fallback;
    const std::pair<int, Hyperparams>* best = nullptr;
    for (const auto& [key, slot] : counts)
        if (!best || slot.first > best->first) best = &slot;
    return best->second;
}

}  // namespace

std::string run_rank(const PipelineConfig& config) {
    config.validate();
    ensure_output_dir(config);
    ModelingData data = load_modeling_data(config);
    if (data.x.n_rows == 0) throw Error("rank: no usable rows after assembly");

    Hyperparams hp = modal_forest_hyperparams(config, data.x.n_cols());
    auto forest = fit_random_forest(data.x, data.y, hp,
                                    derive_seed(config.master_seed, 0x72616e6bu));
    ImportanceReport report =
        build_importance_report(*forest, data.x, data.y, default_category_rules());
    write_importance_csv(report, out_path(config, "importance.csv"), config.provenance());
    return "rank: " + std::to_string(report.rows.size()) + " features -> " +
           out_path(config, "importance.csv") +
           (report.rows.empty() ? "" : " (top: " + report.rows.front().feature + ")");
}

std::vector<std::string> run_all(const PipelineConfig& config, int workers) {
    config.validate();
    std::vector<std::string> lines;
    if (config.synthetic) lines.push_back(run_synth(config));
    lines.push_back(run_preprocess(config, workers));
    lines.push_back(run_features(config, workers));
    lines.push_back(run_impute(config));
    lines.push_back(run_evaluate(config, workers));
    lines.push_back(run_rank(config));
    return lines;
}

}  // namespace prognosis
