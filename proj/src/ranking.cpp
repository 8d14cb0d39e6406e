#include "prognosis/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <regex>

#include "prognosis/csv.hpp"
#include "prognosis/metrics.hpp"
#include "prognosis/random_forest.hpp"

namespace prognosis {

std::map<std::string, double> min_depth_importance(const Model& forest,
                                                   const std::vector<std::string>& feature_names) {
    const std::vector<Tree>* trees = forest_trees(forest);
    if (!trees) throw ModelError("min_depth_importance: model is not a random forest");
    if (trees->empty()) throw ModelError("min_depth_importance: forest has no trees");

    std::vector<double> depth_sums(feature_names.size(), 0.0);
    std::vector<int> min_depth(feature_names.size());
    for (const auto& tree : *trees) {
        const int sentinel = tree.max_depth() + 1;
        std::fill(min_depth.begin(), min_depth.end(), sentinel);
        for (const auto& node : tree.nodes)
            if (node.feature >= 0)
                min_depth[node.feature] = std::min(min_depth[node.feature], node.depth);
        for (std::size_t f = 0; f < feature_names.size(); ++f) depth_sums[f] += min_depth[f];
    }
    std::map<std::string, double> out;
    for (std::size_t f = 0; f < feature_names.size(); ++f)
        out[feature_names[f]] = depth_sums[f] / static_cast<double>(trees->size());
    return out;
}

std::map<std::string, double> normalize_importance(const std::map<std::string, double>& depths) {
    if (depths.empty()) throw Error("normalize_importance: empty depth map");
    double d_min = depths.begin()->second;
    double d_max = d_min;
    for (const auto& [name, d] : depths) {
        d_min = std::min(d_min, d);
        d_max = std::max(d_max, d);
    }
    std::map<std::string, double> out;
    for (const auto& [name, d] : depths)
        out[name] = d_max > d_min ? (d_max - d) / (d_max - d_min) : 0.0;
    return out;
}

namespace {

// Newton-Raphson for a 2-parameter logistic fit. The iteration cap keeps
// quasi-separated fits in the regime where the Wald statistic still grows
// with the slope instead of collapsing (Hauck-Donner).
UnivariableResult fit_univariable(const std::vector<double>& z, const std::vector<int>& y) {
    const std::size_t n = z.size();
    double b0 = 0.0, b1 = 0.0;
    double h00 = 0.0, h01 = 0.0, h11 = 0.0;
    for (int iter = 0; iter < 6; ++iter) {
        double g0 = 0.0, g1 = 0.0;
        h00 = h01 = h11 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double eta = b0 + b1 * z[i];
            const double p = 1.0 / (1.0 + std::exp(-eta));
            const double r = p - static_cast<double>(y[i]);
            const double w = p * (1.0 - p);
            g0 += r;
            g1 += r * z[i];
            h00 += w;
            h01 += w * z[i];
            h11 += w * z[i] * z[i];
        }
        const double det = h00 * h11 - h01 * h01;
        if (!(det > 1e-12)) break;
        const double d0 = (h11 * g0 - h01 * g1) / det;
        const double d1 = (h00 * g1 - h01 * g0) / det;
        b0 -= d0;
        b1 -= d1;
        if (std::abs(d0) < 1e-10 && std::abs(d1) < 1e-10) break;
    }
    const double det = h00 * h11 - h01 * h01;
    UnivariableResult res;
    if (!(det > 1e-12) || !std::isfinite(b1)) {
        res.sign = b1 > 0.0 ? 1 : (b1 < 0.0 ? -1 : 0);
        res.p_value = res.sign == 0 ? 1.0 : 0.0;
        return res;
    }
    const double se = std::sqrt(h00 / det);
    const double zstat = b1 / se;
    res.sign = b1 > 0.0 ? 1 : (b1 < 0.0 ? -1 : 0);
    res.p_value = 2.0 * (1.0 - normal_cdf(std::abs(zstat)));
    return res;
}

}  // namespace

std::vector<UnivariableResult> univariable_sign(const DesignMatrix& x, const std::vector<int>& y) {
    check_binary_labels(y, x.n_rows);
    const std::size_t n = x.n_rows;
    std::vector<UnivariableResult> out(x.n_cols());
    std::vector<double> z(n);
    for (std::size_t j = 0; j < x.n_cols(); ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += x.at(i, j);
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = x.at(i, j) - mean;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / static_cast<double>(n));
        if (!(sd > 0.0)) {
            out[j] = UnivariableResult{0, 1.0};
            continue;
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = (x.at(i, j) - mean) / sd;
        out[j] = fit_univariable(z, y);
    }
    return out;
}

std::vector<CategoryRule> default_category_rules() {
    return {
        {"^(hr|rr|sbp|dbp|spo2)_", "pts"},
        {"gcs|apache|sofa", "score"},
        {"lactate|monocyte|glucose|albumin|sodium|protein|creatinine|mcv|bun|wbc|hemoglobin|platelet|marker",
         "lab"},
        {"age|bmi|sex|weight|height|ethnicity", "demographics"},
        {"dexmedetomidine|propofol|fentanyl|midazolam|epinephrine|drug|_used$", "medication"},
        {"admit|unit|hospital", "admission"},
    };
}

std::vector<std::string> categorize_features(const std::vector<std::string>& feature_names,
                                             const std::vector<CategoryRule>& rules) {
    std::vector<std::pair<std::regex, const std::string*>> compiled;
    compiled.reserve(rules.size());
    for (const auto& r : rules)
        compiled.emplace_back(std::regex(r.pattern, std::regex::ECMAScript | std::regex::icase),
                              &r.category);
    std::vector<std::string> out;
    out.reserve(feature_names.size());
    for (const auto& name : feature_names) {
        const std::string* category = nullptr;
        for (const auto& [re, cat] : compiled) {
            if (std::regex_search(name, re)) {
                category = cat;
                break;
            }
        }
        out.push_back(category ? *category : "other");
    }
    return out;
}

ImportanceReport build_importance_report(const Model& forest, const DesignMatrix& x,
                                         const std::vector<int>& y,
                                         const std::vector<CategoryRule>& rules) {
    const auto depths = min_depth_importance(forest, x.feature_names);
    const auto ri = normalize_importance(depths);
    const auto signs = univariable_sign(x, y);
    const auto categories = categorize_features(x.feature_names, rules);

    ImportanceReport report;
    for (std::size_t j = 0; j < x.n_cols(); ++j) {
        ImportanceRow row;
        row.feature = x.feature_names[j];
        row.category = categories[j];
        row.relative_importance = ri.at(row.feature);
        row.sign = signs[j].sign;
        row.p_value = signs[j].p_value;
        report.rows.push_back(std::move(row));
    }
    std::stable_sort(report.rows.begin(), report.rows.end(),
                     [](const ImportanceRow& a, const ImportanceRow& b) {
                         return a.relative_importance > b.relative_importance;
                     });
    return report;
}

void write_importance_csv(const ImportanceReport& report, const std::string& path,
                          const std::string& provenance) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : report.rows) {
        rows.push_back({r.feature, r.category, format_double(r.relative_importance),
                        r.sign > 0 ? "+" : (r.sign < 0 ? "-" : "0"), format_double(r.p_value)});
    }
    write_csv(path, {"feature", "category", "relative_importance", "sign", "p_value"}, rows,
              provenance);
}

}  // namespace prognosis
