#include "prognosis/ehr.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "prognosis/csv.hpp"
#include "prognosis/rng.hpp"
#include "prognosis/tree.hpp"

namespace prognosis {

EhrTable drop_sparse_columns(const EhrTable& table, double threshold) {
    if (!(threshold > 0.0) || !(threshold < 1.0))
        throw ConfigError("drop_sparse_columns: threshold must be in (0, 1)");
    EhrTable out;
    out.patient_ids = table.patient_ids;
    for (const auto& col : table.columns)
        if (col.missing_fraction() <= threshold) out.columns.push_back(col);
    return out;
}

std::vector<EhrAuditColumn> ehr_audit(const EhrTable& table, double threshold) {
    std::vector<EhrAuditColumn> out;
    for (const auto& col : table.columns) {
        EhrAuditColumn a;
        a.name = col.name;
        a.missing_fraction = col.missing_fraction();
        a.dropped = a.missing_fraction > threshold;
        out.push_back(std::move(a));
    }
    return out;
}

namespace {

double column_median(const EhrColumn& col) {
    std::vector<double> vals;
    for (std::size_t r = 0; r < col.numeric.size(); ++r)
        if (!col.missing[r]) vals.push_back(col.numeric[r]);
    std::sort(vals.begin(), vals.end());
    const std::size_t n = vals.size();
    return n % 2 == 1 ? vals[n / 2] : (vals[n / 2 - 1] + vals[n / 2]) / 2.0;
}

// Mode over observed labels; ties resolve to first appearance order.
std::string column_mode(const EhrColumn& col) {
    std::vector<std::string> order;
    std::map<std::string, std::size_t> counts;
    for (std::size_t r = 0; r < col.labels.size(); ++r) {
        if (col.missing[r]) continue;
        if (counts.emplace(col.labels[r], 0).second) order.push_back(col.labels[r]);
        ++counts[col.labels[r]];
    }
    std::string best;
    std::size_t best_count = 0;
    for (const auto& label : order) {
        if (counts[label] > best_count) {
            best_count = counts[label];
            best = label;
        }
    }
    return best;
}

std::vector<std::string> column_levels(const EhrColumn& col) {
    std::set<std::string> levels;
    for (std::size_t r = 0; r < col.labels.size(); ++r)
        if (!col.missing[r]) levels.insert(col.labels[r]);
    return {levels.begin(), levels.end()};
}

// Predictor matrix from every column except `skip`, one-hot for
// categoricals, using current (imputed) cell values.
struct PredictorMatrix {
    std::vector<double> data;
    std::size_t n_cols = 0;
};

PredictorMatrix build_predictors(const EhrTable& table, std::size_t skip,
                                 const std::vector<std::vector<std::string>>& levels) {
    PredictorMatrix m;
    const std::size_t n = table.n_rows();
    std::size_t n_cols = 0;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c == skip) continue;
        n_cols += table.columns[c].type == ColumnType::numeric ? 1 : levels[c].size();
    }
    m.n_cols = n_cols;
    m.data.assign(n * n_cols, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        std::size_t j = 0;
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            if (c == skip) continue;
            const EhrColumn& col = table.columns[c];
            if (col.type == ColumnType::numeric) {
                m.data[r * n_cols + j] = col.numeric[r];
                ++j;
            } else {
                for (const auto& level : levels[c]) {
                    m.data[r * n_cols + j] = col.labels[r] == level ? 1.0 : 0.0;
                    ++j;
                }
            }
        }
    }
    return m;
}

}  // namespace

EhrTable rf_impute(const EhrTable& table, int n_iterations, std::uint64_t seed,
                   const RfImputeParams& params) {
    if (n_iterations < 1) throw ConfigError("rf_impute: n_iterations must be >= 1");

    EhrTable work = table;
    const std::size_t n = work.n_rows();
    if (n == 0) return work;

    bool any_missing = false;
    for (const auto& col : work.columns) {
        std::size_t observed = 0;
        for (auto m : col.missing) observed += m ? 0 : 1;
        if (observed == 0 && n > 0)
            throw Error("rf_impute: column '" + col.name + "' has no observed values");
        if (observed < n) any_missing = true;
    }
    if (!any_missing) return work;

    std::vector<std::vector<std::string>> levels(work.columns.size());
    for (std::size_t c = 0; c < work.columns.size(); ++c)
        if (work.columns[c].type == ColumnType::categorical)
            levels[c] = column_levels(work.columns[c]);

    // median/mode initialization; the original mask drives every re-predict
    std::vector<std::vector<std::uint8_t>> original_missing;
    for (auto& col : work.columns) {
        original_missing.push_back(col.missing);
        if (col.type == ColumnType::numeric) {
            const double med = column_median(col);
            for (std::size_t r = 0; r < n; ++r)
                if (col.missing[r]) col.numeric[r] = med;
        } else {
            const std::string mode = column_mode(col);
            for (std::size_t r = 0; r < n; ++r)
                if (col.missing[r]) col.labels[r] = mode;
        }
    }

    // visit order: ascending original missingness, column index breaks ties
    std::vector<std::size_t> visit;
    for (std::size_t c = 0; c < work.columns.size(); ++c) {
        std::size_t miss = 0;
        for (auto m : original_missing[c]) miss += m;
        if (miss > 0) visit.push_back(c);
    }
    std::stable_sort(visit.begin(), visit.end(), [&](std::size_t a, std::size_t b) {
        std::size_t ma = 0, mb = 0;
        for (auto m : original_missing[a]) ma += m;
        for (auto m : original_missing[b]) mb += m;
        return ma < mb;
    });

    for (int iter = 0; iter < n_iterations; ++iter) {
        for (std::size_t c : visit) {
            EhrColumn& col = work.columns[c];
            PredictorMatrix pred = build_predictors(work, c, levels);
            MatrixView view{pred.data.data(), pred.n_cols};

            std::vector<std::uint32_t> observed_rows;
            std::vector<std::uint32_t> missing_rows;
            for (std::size_t r = 0; r < n; ++r)
                (original_missing[c][r] ? missing_rows : observed_rows)
                    .push_back(static_cast<std::uint32_t>(r));

            TreeParams tp;
            tp.min_leaf = params.min_leaf;
            tp.mtry = params.mtry > 0
                          ? params.mtry
                          : std::max(1, static_cast<int>(pred.n_cols) / 3);
            std::vector<double> targets(n, 0.0);
            int n_classes = 2;
            if (col.type == ColumnType::numeric) {
                tp.task = TreeTask::regression;
                for (std::size_t r = 0; r < n; ++r) targets[r] = col.numeric[r];
            } else {
                tp.task = TreeTask::classification;
                n_classes = static_cast<int>(levels[c].size());
                if (n_classes < 2) {
                    // single observed level: everything imputes to it
                    for (std::uint32_t r : missing_rows) col.labels[r] = levels[c].empty()
                                                                             ? std::string()
                                                                             : levels[c][0];
                    continue;
                }
                tp.n_classes = n_classes;
                for (std::size_t r = 0; r < n; ++r) {
                    const auto it = std::find(levels[c].begin(), levels[c].end(), col.labels[r]);
                    targets[r] = static_cast<double>(it - levels[c].begin());
                }
            }

            std::vector<double> votes(missing_rows.size() * (col.type == ColumnType::numeric
                                                                 ? 1
                                                                 : levels[c].size()),
                                      0.0);
            for (int t = 0; t < params.n_trees; ++t) {
                Rng rng(derive_seed(seed, static_cast<std::uint64_t>(iter) * 10007 + c,
                                    static_cast<std::uint64_t>(t), 0x696d70u));
                std::vector<std::uint32_t> sample(observed_rows.size());
                for (std::size_t i = 0; i < sample.size(); ++i)
                    sample[i] = observed_rows[bounded(rng, observed_rows.size())];
                Tree tree = grow_tree(view, targets, sample, tp, rng);
                for (std::size_t i = 0; i < missing_rows.size(); ++i) {
                    const int leaf = tree.descend(pred.data.data() + missing_rows[i] * pred.n_cols,
                                                  pred.n_cols);
                    if (col.type == ColumnType::numeric) {
                        votes[i] += tree.nodes[leaf].leaf[0];
                    } else {
                        for (std::size_t k = 0; k < levels[c].size(); ++k)
                            votes[i * levels[c].size() + k] += tree.nodes[leaf].leaf[k];
                    }
                }
            }
            for (std::size_t i = 0; i < missing_rows.size(); ++i) {
                if (col.type == ColumnType::numeric) {
                    col.numeric[missing_rows[i]] = votes[i] / params.n_trees;
                } else {
                    std::size_t best = 0;
                    for (std::size_t k = 1; k < levels[c].size(); ++k)
                        if (votes[i * levels[c].size() + k] > votes[i * levels[c].size() + best])
                            best = k;
                    col.labels[missing_rows[i]] = levels[c][best];
                }
            }
        }
    }

    for (auto& col : work.columns) std::fill(col.missing.begin(), col.missing.end(), 0);
    return work;
}

EncodedEhr one_hot_encode(const EhrTable& table) {
    for (const auto& col : table.columns)
        for (auto m : col.missing)
            if (m) throw Error("one_hot_encode: table still has missing cells in '" + col.name + "'");

    EncodedEhr out;
    out.n_rows = table.n_rows();
    std::vector<std::vector<std::string>> levels(table.columns.size());
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        const auto& col = table.columns[c];
        if (col.type == ColumnType::numeric) {
            out.feature_names.push_back(col.name);
        } else {
            std::set<std::string> ls(col.labels.begin(), col.labels.end());
            levels[c].assign(ls.begin(), ls.end());
            for (const auto& level : levels[c]) out.feature_names.push_back(col.name + "=" + level);
        }
    }
    out.data.reserve(out.n_rows * out.feature_names.size());
    for (std::size_t r = 0; r < out.n_rows; ++r) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            const auto& col = table.columns[c];
            if (col.type == ColumnType::numeric) {
                out.data.push_back(col.numeric[r]);
            } else {
                for (const auto& level : levels[c])
                    out.data.push_back(col.labels[r] == level ? 1.0 : 0.0);
            }
        }
    }
    return out;
}

void write_ehr_table(const EhrTable& table, const std::string& path,
                     const std::string& provenance) {
    std::vector<std::string> header{"patient_id"};
    for (const auto& col : table.columns) header.push_back(col.name);
    std::vector<std::vector<std::string>> rows;
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        std::vector<std::string> row{table.patient_ids[r]};
        for (const auto& col : table.columns) {
            if (col.missing[r]) row.emplace_back();
            else if (col.type == ColumnType::numeric) row.push_back(format_double(col.numeric[r]));
            else row.push_back(col.labels[r]);
        }
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows, provenance);
}

}  // namespace prognosis
