#include "dtc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dtc/rng.hpp"

namespace dtc::eval {

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size() || scores.empty()) {
        throw std::invalid_argument("roc_curve: scores and labels must match and be nonempty");
    }
    std::size_t n_pos = 0;
    for (int label : labels) {
        if (label != 0 && label != 1) throw std::invalid_argument("roc_curve: labels must be 0/1");
        n_pos += (label == 1);
    }
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw std::invalid_argument("roc_curve: need both classes present");
    }

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::vector<RocPoint> curve;
    curve.push_back({0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double threshold = scores[order[i]];
        // Consume the whole tie group before emitting a point.
        while (i < order.size() && scores[order[i]] == threshold) {
            if (labels[order[i]] == 1) {
                ++tp;
            } else {
                ++fp;
            }
            ++i;
        }
        curve.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                         static_cast<double>(tp) / static_cast<double>(n_pos)});
    }
    return curve;
}

double auc(const std::vector<RocPoint>& curve) {
    if (curve.size() < 2) throw std::invalid_argument("auc: need at least two curve points");
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) * 0.5;
    }
    return area;
}

std::vector<double> assignment_scores(const Tensor& q) {
    if (q.ndim() != 2 || q.dim(1) != 2) {
        throw std::invalid_argument("assignment_scores: q must be n x 2, got " +
                                    q.shape_string());
    }
    std::vector<double> scores(q.dim(0));
    for (std::size_t i = 0; i < q.dim(0); ++i) scores[i] = q.at(i, 0);
    return scores;
}

double aligned_auc(std::span<const double> scores, std::span<const int> labels) {
    const double a = auc(roc_curve(scores, labels));
    return std::max(a, 1.0 - a);
}

BootstrapResult bootstrap_auc(std::span<const double> scores, std::span<const int> labels,
                              std::size_t n_runs, std::uint64_t seed) {
    if (n_runs == 0) throw std::invalid_argument("bootstrap_auc: n_runs must be >= 1");
    if (scores.size() != labels.size() || scores.empty()) {
        throw std::invalid_argument("bootstrap_auc: scores and labels must match");
    }

    Rng rng(seed);
    const std::size_t n = scores.size();
    BootstrapResult result;
    result.values.reserve(n_runs);
    std::vector<double> s(n);
    std::vector<int> l(n);
    for (std::size_t run = 0; run < n_runs; ++run) {
        bool both = false;
        while (!both) {
            bool pos = false, neg = false;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t pick = rng.index(n);
                s[i] = scores[pick];
                l[i] = labels[pick];
                pos = pos || (l[i] == 1);
                neg = neg || (l[i] == 0);
            }
            both = pos && neg;
        }
        result.values.push_back(auc(roc_curve(s, l)));
    }

    for (double v : result.values) result.mean += v;
    result.mean /= static_cast<double>(n_runs);
    if (n_runs > 1) {
        double ss = 0.0;
        for (double v : result.values) ss += (v - result.mean) * (v - result.mean);
        result.std_error = std::sqrt(ss / static_cast<double>(n_runs - 1)) /
                           std::sqrt(static_cast<double>(n_runs));
    }
    return result;
}

}  // namespace dtc::eval
