#pragma once

#include <map>
#include <string>
#include <vector>

#include "prognosis/model.hpp"

namespace prognosis {

// Mean over trees of the minimal depth at which each feature first splits
// (root = 0); a tree that never uses the feature contributes its max depth
// plus one. Throws ModelError for non-forest models.
std::map<std::string, double> min_depth_importance(const Model& forest,
                                                   const std::vector<std::string>& feature_names);

// RI = (d_max - d_f) / (d_max - d_min); a constant map yields all zeros.
std::map<std::string, double> normalize_importance(const std::map<std::string, double>& depths);

struct UnivariableResult {
    int sign = 0;  // -1, 0, +1
    double p_value = 1.0;
};

// Single-covariate logistic regression per (standardized) feature with an
// intercept; slope sign and Wald p-value. Zero-variance features report
// sign 0 with p = 1.
std::vector<UnivariableResult> univariable_sign(const DesignMatrix& x, const std::vector<int>& y);

struct CategoryRule {
    std::string pattern;  // ECMAScript regex, matched anywhere in the name
    std::string category;
};

std::vector<CategoryRule> default_category_rules();

// First matching rule wins; unmatched features fall into "other".
std::vector<std::string> categorize_features(const std::vector<std::string>& feature_names,
                                             const std::vector<CategoryRule>& rules);

struct ImportanceRow {
    std::string feature;
    std::string category;
    double relative_importance = 0.0;
    int sign = 0;
    double p_value = 1.0;
};

struct ImportanceReport {
    std::vector<ImportanceRow> rows;  // sorted by relative importance, descending
};

ImportanceReport build_importance_report(const Model& forest, const DesignMatrix& x,
                                         const std::vector<int>& y,
                                         const std::vector<CategoryRule>& rules);

void write_importance_csv(const ImportanceReport& report, const std::string& path,
                          const std::string& provenance = "");

}  // namespace prognosis
