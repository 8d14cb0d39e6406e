#include "prognosis/cross_validation.hpp"

#include <algorithm>
#include <cmath>

#include "prognosis/csv.hpp"
#include "prognosis/metrics.hpp"
#include "prognosis/rng.hpp"
#include "prognosis/threading.hpp"

namespace prognosis {

using nlohmann::json;

void CvConfig::validate() const {
    if (outer_folds < 2 || inner_folds < 2) throw ConfigError("cv: folds must be >= 2");
    if (outer_repeats < 1 || inner_repeats < 1) throw ConfigError("cv: repeats must be >= 1");
}

std::vector<std::vector<int>> make_folds(const std::vector<int>& labels, int k, int repeats,
                                         bool stratified, std::uint64_t seed) {
    if (k < 2) throw ConfigError("make_folds: k must be >= 2");
    if (repeats < 1) throw ConfigError("make_folds: repeats must be >= 1");
    const std::size_t n = labels.size();
    if (stratified) {
        std::size_t n_pos = 0;
        for (int v : labels) n_pos += v == 1;
        const std::size_t minority = std::min(n_pos, n - n_pos);
        if (static_cast<std::size_t>(k) > minority)
            throw ConfigError("make_folds: k exceeds the minority class count under stratification");
    } else if (static_cast<std::size_t>(k) > n) {
        throw ConfigError("make_folds: k exceeds the number of rows");
    }

    std::vector<std::vector<int>> out(repeats, std::vector<int>(n, 0));
    for (int rep = 0; rep < repeats; ++rep) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(rep), 0x666f6c64u));
        if (stratified) {
            // within each class: shuffle, then deal round-robin from a
            // random starting fold so the +/-1 remainders spread out
            for (int cls : {1, 0}) {
                std::vector<std::size_t> members;
                for (std::size_t i = 0; i < n; ++i)
                    if (labels[i] == cls) members.push_back(i);
                for (std::size_t i = members.size(); i > 1; --i)
                    std::swap(members[i - 1], members[bounded(rng, i)]);
                const int start = static_cast<int>(bounded(rng, static_cast<std::uint64_t>(k)));
                for (std::size_t i = 0; i < members.size(); ++i)
                    out[rep][members[i]] = static_cast<int>((start + i) % k);
            }
        } else {
            std::vector<std::size_t> order(n);
            for (std::size_t i = 0; i < n; ++i) order[i] = i;
            for (std::size_t i = n; i > 1; --i)
                std::swap(order[i - 1], order[bounded(rng, i)]);
            for (std::size_t i = 0; i < n; ++i)
                out[rep][order[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
        }
    }
    return out;
}

namespace {

struct SplitRows {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

SplitRows split_for_fold(const std::vector<int>& assignment, int fold) {
    SplitRows s;
    for (std::size_t i = 0; i < assignment.size(); ++i)
        (assignment[i] == fold ? s.test : s.train).push_back(i);
    return s;
}

std::vector<int> gather_labels(const std::vector<int>& y, const std::vector<std::size_t>& rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(y[r]);
    return out;
}

}  // namespace

Hyperparams grid_search(const LearnerSpec& learner, const DesignMatrix& x,
                        const std::vector<int>& y, int folds, int repeats, bool stratified,
                        std::uint64_t seed) {
    if (learner.grid.empty()) throw ConfigError("grid_search: empty grid");
    const auto assignments = make_folds(y, folds, repeats, stratified, derive_seed(seed, 0x696e6eu));

    double best_mean = -1.0;
    int best_index = -1;
    for (std::size_t g = 0; g < learner.grid.size(); ++g) {
        double auc_sum = 0.0;
        int auc_count = 0;
        for (int rep = 0; rep < repeats; ++rep) {
            for (int fold = 0; fold < folds; ++fold) {
                const SplitRows split = split_for_fold(assignments[rep], fold);
                if (split.test.empty() || split.train.empty()) continue;
                try {
                    const DesignMatrix x_train = x.subset(split.train);
                    const std::vector<int> y_train = gather_labels(y, split.train);
                    auto model = learner.fit(x_train, y_train, learner.grid[g],
                                             derive_seed(seed, g, rep, fold));
                    const DesignMatrix x_test = x.subset(split.test);
                    const std::vector<int> y_test = gather_labels(y, split.test);
                    auc_sum += auc(model->predict_proba(x_test), y_test);
                    ++auc_count;
                } catch (const Error&) {
                    // recorded by exclusion: failed folds simply don't count
                }
            }
        }
        if (auc_count == 0) continue;
        const double mean = auc_sum / auc_count;
        if (mean > best_mean) {
            best_mean = mean;
            best_index = static_cast<int>(g);
        }
    }
    if (best_index < 0)
        throw ModelError("grid_search: every grid point failed on every fold for " + learner.id);
    return learner.grid[best_index];
}

std::vector<double> ModelReport::auc_samples() const {
    std::vector<double> out;
    for (const auto& f : folds)
        if (!f.failed) out.push_back(f.auc_value);
    return out;
}

const ModelReport& EvalReport::model(const std::string& name) const {
    for (const auto& m : models)
        if (m.model == name) return m;
    throw Error("EvalReport: no model named '" + name + "'");
}

namespace {

void finalize_report(ModelReport& report) {
    const auto aucs = report.auc_samples();
    if (aucs.empty()) return;
    const double n = static_cast<double>(aucs.size());
    double mean = 0.0;
    for (double v : aucs) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : aucs) ss += (v - mean) * (v - mean);
    const double sd = n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    report.mean_auc = mean;
    report.ci_lower = mean - 1.96 * sd / std::sqrt(n);
    report.ci_upper = mean + 1.96 * sd / std::sqrt(n);
    double sens = 0.0, spec = 0.0;
    for (const auto& f : report.folds) {
        if (f.failed) continue;
        sens += f.sensitivity;
        spec += f.specificity;
    }
    report.mean_sensitivity = sens / n;
    report.mean_specificity = spec / n;
}

}  // namespace

EvalReport nested_cv(const std::vector<LearnerSpec>& learners, const DesignMatrix& x,
                     const std::vector<int>& y, const CvConfig& config, int workers,
                     ThresholdRule rule) {
    config.validate();
    if (learners.empty()) throw ConfigError("nested_cv: need at least one learner");
    x.validate();
    check_binary_labels(y, x.n_rows);

    const auto outer = make_folds(y, config.outer_folds, config.outer_repeats, config.stratified,
                                  derive_seed(config.master_seed, 0x6f75746572u));

    struct TaskResult {
        std::vector<FoldOutcome> per_learner;  // one per learner
        FoldOutcome ensemble;
    };
    const std::size_t n_tasks =
        static_cast<std::size_t>(config.outer_repeats) * config.outer_folds;
    std::vector<TaskResult> results(n_tasks);
    const bool with_ensemble = learners.size() >= 2;

    parallel_for(n_tasks, workers, [&](std::size_t task) {
        const int rep = static_cast<int>(task) / config.outer_folds;
        const int fold = static_cast<int>(task) % config.outer_folds;
        const SplitRows split = split_for_fold(outer[rep], fold);
        const DesignMatrix x_train = x.subset(split.train);
        const DesignMatrix x_test = x.subset(split.test);
        const std::vector<int> y_train = gather_labels(y, split.train);
        const std::vector<int> y_test = gather_labels(y, split.test);

        TaskResult& out = results[task];
        out.per_learner.resize(learners.size());
        std::vector<std::vector<double>> train_scores_ok;
        std::vector<std::vector<double>> test_scores_ok;

        for (std::size_t li = 0; li < learners.size(); ++li) {
            FoldOutcome& fo = out.per_learner[li];
            fo.repeat = rep;
            fo.fold = fold;
            try {
                const std::uint64_t fold_seed =
                    derive_seed(config.master_seed, li, rep, fold);
                fo.chosen = grid_search(learners[li], x_train, y_train, config.inner_folds,
                                        config.inner_repeats, config.stratified, fold_seed);
                auto model = learners[li].fit(x_train, y_train, fo.chosen,
                                              derive_seed(fold_seed, 0x726566697475u));
                const auto train_scores = model->predict_proba(x_train);
                const auto test_scores = model->predict_proba(x_test);
                fo.threshold = rule == ThresholdRule::youden
                                   ? youden_threshold(train_scores, y_train)
                                   : 0.5;
                fo.auc_value = auc(test_scores, y_test);
                const auto ss = sens_spec(test_scores, y_test, fo.threshold);
                fo.sensitivity = ss.first;
                fo.specificity = ss.second;
                fo.heldout_scores = test_scores;
                train_scores_ok.push_back(train_scores);
                test_scores_ok.push_back(test_scores);
            } catch (const Error& e) {
                fo.failed = true;
                fo.error = e.what();
            }
        }

        if (with_ensemble) {
            FoldOutcome& fo = out.ensemble;
            fo.repeat = rep;
            fo.fold = fold;
            if (train_scores_ok.size() == learners.size()) {
                const auto ens_train = ensemble_average(train_scores_ok);
                const auto ens_test = ensemble_average(test_scores_ok);
                fo.threshold = rule == ThresholdRule::youden
                                   ? youden_threshold(ens_train, y_train)
                                   : 0.5;
                fo.auc_value = auc(ens_test, y_test);
                const auto ss = sens_spec(ens_test, y_test, fo.threshold);
                fo.sensitivity = ss.first;
                fo.specificity = ss.second;
                fo.heldout_scores = ens_test;
            } else {
                fo.failed = true;
                fo.error = "ensemble skipped: a member learner failed on this fold";
            }
        }
    });

    EvalReport report;
    report.config = config;
    report.models.resize(learners.size() + (with_ensemble ? 1 : 0));
    for (std::size_t li = 0; li < learners.size(); ++li) report.models[li].model = learners[li].id;
    if (with_ensemble) report.models.back().model = "ensemble";
    for (std::size_t task = 0; task < n_tasks; ++task) {
        for (std::size_t li = 0; li < learners.size(); ++li)
            report.models[li].folds.push_back(std::move(results[task].per_learner[li]));
        if (with_ensemble) report.models.back().folds.push_back(std::move(results[task].ensemble));
    }
    for (auto& m : report.models) finalize_report(m);

    for (std::size_t a = 0; a < report.models.size(); ++a) {
        for (std::size_t b = a + 1; b < report.models.size(); ++b) {
            const auto sa = report.models[a].auc_samples();
            const auto sb = report.models[b].auc_samples();
            PairwiseComparison cmp;
            cmp.model_a = report.models[a].model;
            cmp.model_b = report.models[b].model;
            cmp.p_value = (sa.empty() || sb.empty()) ? 1.0 : wilcoxon_rank_sum(sa, sb);
            report.comparisons.push_back(std::move(cmp));
        }
    }
    return report;
}

json EvalReport::to_json() const {
    json models_json = json::array();
    for (const auto& m : models) {
        json folds = json::array();
        for (const auto& f : m.folds) {
            json fj{{"repeat", f.repeat},   {"fold", f.fold},
                    {"failed", f.failed}};
            if (f.failed) {
                fj["error"] = f.error;
            } else {
                fj["auc"] = f.auc_value;
                fj["sensitivity"] = f.sensitivity;
                fj["specificity"] = f.specificity;
                fj["threshold"] = f.threshold;
                fj["hyperparameters"] = f.chosen;
            }
            folds.push_back(std::move(fj));
        }
        models_json.push_back(json{{"model", m.model},
                                   {"mean_auc", m.mean_auc},
                                   {"ci95", {m.ci_lower, m.ci_upper}},
                                   {"mean_sensitivity", m.mean_sensitivity},
                                   {"mean_specificity", m.mean_specificity},
                                   {"folds", folds}});
    }
    json comparisons_json = json::array();
    for (const auto& c : comparisons)
        comparisons_json.push_back(
            json{{"model_a", c.model_a}, {"model_b", c.model_b}, {"p_value", c.p_value}});
    return json{{"cv",
                 {{"outer_folds", config.outer_folds},
                  {"outer_repeats", config.outer_repeats},
                  {"inner_folds", config.inner_folds},
                  {"inner_repeats", config.inner_repeats},
                  {"stratified", config.stratified},
                  {"master_seed", config.master_seed}}},
                {"models", models_json},
                {"wilcoxon", comparisons_json}};
}

void write_fold_metrics_csv(const EvalReport& report, const std::string& path,
                            const std::string& provenance) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& m : report.models) {
        for (const auto& f : m.folds) {
            if (f.failed) continue;
            rows.push_back({m.model, std::to_string(f.repeat), std::to_string(f.fold),
                            format_double(f.auc_value), format_double(f.sensitivity),
                            format_double(f.specificity), format_double(f.threshold)});
        }
    }
    write_csv(path, {"model", "repeat", "fold", "auc", "sensitivity", "specificity", "threshold"},
              rows, provenance);
}

}  // namespace prognosis
