#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prognosis/cohort.hpp"

namespace prognosis {

// Removes every column whose missing fraction is strictly greater than the
// threshold; rows are untouched.
EhrTable drop_sparse_columns(const EhrTable& table, double threshold);

struct RfImputeParams {
    int n_trees = 60;
    int min_leaf = 5;
    int mtry = 0;  // 0 = max(1, p/3) over the one-hot predictor matrix
};

// Iterative random-forest imputation: after a median/mode initialization,
// columns are visited in increasing order of original missingness for a
// fixed number of Gauss-Seidel passes; each visit refits a forest of the
// column on all other columns (rows where it was observed) and re-predicts
// only the originally-missing cells.
EhrTable rf_impute(const EhrTable& table, int n_iterations, std::uint64_t seed,
                   const RfImputeParams& params = {});

struct EhrAuditColumn {
    std::string name;
    double missing_fraction = 0.0;
    bool dropped = false;
};

std::vector<EhrAuditColumn> ehr_audit(const EhrTable& table, double threshold);

// One-hot expansion for downstream learners: numeric columns pass through,
// categorical columns become one indicator per level (levels sorted).
// Requires a fully-imputed table.
struct EncodedEhr {
    std::vector<std::string> feature_names;
    std::vector<double> data;  // row-major
    std::size_t n_rows = 0;
};
EncodedEhr one_hot_encode(const EhrTable& table);

void write_ehr_table(const EhrTable& table, const std::string& path,
                     const std::string& provenance = "");

}  // namespace prognosis
