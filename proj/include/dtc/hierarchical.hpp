#pragma once

#include <cstddef>
#include <vector>

#include "dtc/similarity.hpp"

namespace dtc::hierarchical {

// Symmetric pairwise distance matrix with a zero diagonal.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

    std::size_t size() const { return n_; }
    double at(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
    void set(std::size_t i, std::size_t j, double value) {
        data_[i * n_ + j] = value;
        data_[j * n_ + i] = value;
    }

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

DistanceMatrix pairwise_distances(const std::vector<std::vector<double>>& sequences,
                                  similarity::MetricKind metric);

// One agglomeration step: clusters identified by their smallest member
// index, a < b, merged at the given height.
struct Merge {
    std::size_t a = 0;
    std::size_t b = 0;
    double height = 0.0;
};

struct Dendrogram {
    std::size_t n = 0;
    std::vector<Merge> merges;  // n-1 entries, non-decreasing heights
};

// Complete-linkage agglomerative clustering. Inter-cluster distance is the
// maximum over cross pairs; ties are broken toward the lexicographically
// smallest pair of cluster ids, so the result is deterministic.
Dendrogram complete_linkage(const DistanceMatrix& distances);

// Cuts the dendrogram into k clusters. Labels are 0..k-1 in order of first
// appearance over sample indices.
std::vector<int> cut(const Dendrogram& dendrogram, std::size_t k);

struct BaselineResult {
    std::vector<int> labels;
    std::vector<std::vector<double>> centroids;  // per-cluster elementwise mean
    std::vector<std::vector<double>> scores;     // n x k soft assignment, rows sum to 1
};

// Non-learned reference pipeline: pairwise distances under the chosen
// metric, complete-linkage cut at k, centroids as cluster means, and soft
// scores from the same similarity kernel used by the learned model.
BaselineResult baseline_cluster(const std::vector<std::vector<double>>& sequences,
                                similarity::MetricKind metric, std::size_t k);

}  // namespace dtc::hierarchical
