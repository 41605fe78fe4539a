#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dtc/tensor.hpp"

namespace dtc::eval {

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

// ROC curve from scores (higher = more positive) and binary labels. Tied
// scores collapse into one sweep step; the curve runs from (0,0) to (1,1)
// with monotone coordinates. Requires both classes present.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels);

// Area under the curve by trapezoidal integration.
double auc(const std::vector<RocPoint>& curve);

// Scores for a 2-cluster soft assignment: column 0 of Q.
std::vector<double> assignment_scores(const Tensor& q);

// AUC with the cluster/label correspondence resolved by orientation:
// max(AUC, 1 - AUC).
double aligned_auc(std::span<const double> scores, std::span<const int> labels);

struct BootstrapResult {
    double mean = 0.0;
    double std_error = 0.0;
    std::vector<double> values;  // per-resample AUC
};

// Bootstrap over resampled indices; a resample that loses one of the
// classes is redrawn.
BootstrapResult bootstrap_auc(std::span<const double> scores, std::span<const int> labels,
                              std::size_t n_runs, std::uint64_t seed);

}  // namespace dtc::eval
