#pragma once

#include <utility>
#include <vector>

namespace prognosis {

// Mann-Whitney AUC: fraction of (positive, negative) pairs where the
// positive outscores the negative, ties counted 0.5. Throws MetricError
// when only one class is present.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Confusion-matrix rates with score >= threshold predicting positive.
std::pair<double, double> sens_spec(const std::vector<double>& scores,
                                    const std::vector<int>& labels, double threshold);

// Threshold maximizing sensitivity + specificity - 1 over observed score
// cut-points; ties resolve to the lower threshold.
double youden_threshold(const std::vector<double>& scores, const std::vector<int>& labels);

// Two-sided rank-sum p-value with mid-ranks for ties. Exact by enumeration
// when n+m <= 16 and tie-free, else normal approximation with tie and
// continuity corrections.
double wilcoxon_rank_sum(const std::vector<double>& a, const std::vector<double>& b);

double normal_cdf(double z);

}  // namespace prognosis
