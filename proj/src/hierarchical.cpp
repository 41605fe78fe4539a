#include "dtc/hierarchical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "dtc/clustering.hpp"
#include "dtc/threading.hpp"

namespace dtc::hierarchical {

using similarity::MetricKind;

namespace {

std::size_t min_length_for(MetricKind metric) {
    switch (metric) {
        case MetricKind::EUCL: return 1;
        case MetricKind::CID: return 2;
        case MetricKind::COR: return 2;
        case MetricKind::ACF: return 3;
    }
    return 1;
}

std::vector<std::pair<std::size_t, std::size_t>> upper_pairs(std::size_t n) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    }
    return pairs;
}

}  // namespace

DistanceMatrix pairwise_distances(const std::vector<std::vector<double>>& sequences,
                                  MetricKind metric) {
    const std::size_t n = sequences.size();
    if (n == 0) throw std::invalid_argument("pairwise_distances: no sequences");
    const std::size_t length = sequences.front().size();
    for (const auto& s : sequences) {
        if (s.size() != length) {
            throw std::invalid_argument("pairwise_distances: sequences differ in length");
        }
    }
    if (length < min_length_for(metric)) {
        throw std::invalid_argument("pairwise_distances: sequences too short for " +
                                    similarity::to_string(metric));
    }

    // Per-sequence quantities reused across pairs; each pair then evaluates
    // to exactly the same value as similarity::distance on it.
    std::vector<double> complexities;
    std::vector<std::vector<double>> zscores;
    std::vector<std::vector<double>> acfs;
    if (metric == MetricKind::CID) {
        complexities.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            complexities[i] = similarity::complexity_estimate(sequences[i]);
        }
    } else if (metric == MetricKind::COR) {
        zscores.resize(n);
        for (std::size_t i = 0; i < n; ++i) zscores[i] = similarity::standardized(sequences[i]);
    } else if (metric == MetricKind::ACF) {
        const std::size_t max_lag = std::min(similarity::kMaxAcfLag, length - 2);
        acfs.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            acfs[i] = similarity::acf_coefficients(sequences[i], max_lag);
        }
    }

    const auto pairs = upper_pairs(n);
    DistanceMatrix result(n);
    const auto n_pairs = static_cast<std::ptrdiff_t>(pairs.size());
    const int nt = threading::max_threads();
#pragma omp parallel for schedule(static) num_threads(nt) if (nt > 1)
    for (std::ptrdiff_t p = 0; p < n_pairs; ++p) {
        const auto [i, j] = pairs[p];
        double d = 0.0;
        switch (metric) {
            case MetricKind::EUCL:
                d = similarity::eucl(sequences[i], sequences[j]);
                break;
            case MetricKind::CID: {
                const double cf =
                    (std::max(complexities[i], complexities[j]) + similarity::kEpsilon) /
                    (std::min(complexities[i], complexities[j]) + similarity::kEpsilon);
                d = similarity::eucl(sequences[i], sequences[j]) * cf;
                break;
            }
            case MetricKind::COR: {
                double acc = 0.0;
                for (std::size_t t = 0; t < length; ++t) {
                    const double diff = zscores[i][t] - zscores[j][t];
                    acc += diff * diff;
                }
                d = std::min(std::sqrt(acc / static_cast<double>(length)), 2.0);
                break;
            }
            case MetricKind::ACF: {
                double acc = 0.0;
                for (std::size_t l = 0; l < acfs[i].size(); ++l) {
                    const double diff = acfs[i][l] - acfs[j][l];
                    acc += diff * diff;
                }
                d = std::sqrt(acc);
                break;
            }
        }
        result.set(i, j, d);
    }
    return result;
}

Dendrogram complete_linkage(const DistanceMatrix& distances) {
    const std::size_t n = distances.size();
    if (n == 0) throw std::invalid_argument("complete_linkage: empty distance matrix");

    // Working inter-cluster distances; cluster ids are the smallest member
    // index, so merging always keeps the lower id alive.
    std::vector<double> d(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) d[i * n + j] = distances.at(i, j);
    }
    std::vector<char> active(n, 1);

    Dendrogram out;
    out.n = n;
    out.merges.reserve(n - 1);
    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t best_i = 0, best_j = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!active[j]) continue;
                if (d[i * n + j] < best) {
                    best = d[i * n + j];
                    best_i = i;
                    best_j = j;
                }
            }
        }

        active[best_j] = 0;
        for (std::size_t w = 0; w < n; ++w) {
            if (!active[w] || w == best_i) continue;
            const double merged = std::max(d[best_i * n + w], d[best_j * n + w]);
            d[best_i * n + w] = merged;
            d[w * n + best_i] = merged;
        }
        out.merges.push_back({best_i, best_j, best});
    }
    return out;
}

std::vector<int> cut(const Dendrogram& dendrogram, std::size_t k) {
    const std::size_t n = dendrogram.n;
    if (k == 0 || k > n) {
        throw std::invalid_argument("cut: k must be in [1, " + std::to_string(n) + "]");
    }

    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };

    for (std::size_t m = 0; m < n - k; ++m) {
        const Merge& merge = dendrogram.merges[m];
        parent[find(merge.b)] = find(merge.a);
    }

    std::vector<int> labels(n, -1);
    std::vector<int> root_label(n, -1);
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t root = find(i);
        if (root_label[root] < 0) root_label[root] = next++;
        labels[i] = root_label[root];
    }
    return labels;
}

BaselineResult baseline_cluster(const std::vector<std::vector<double>>& sequences,
                                MetricKind metric, std::size_t k) {
    const std::size_t n = sequences.size();
    if (n == 0) throw std::invalid_argument("baseline_cluster: no sequences");
    if (k == 0 || k > n) {
        throw std::invalid_argument("baseline_cluster: k must be in [1, n]");
    }
    const std::size_t length = sequences.front().size();

    BaselineResult result;
    result.labels = cut(complete_linkage(pairwise_distances(sequences, metric)), k);

    result.centroids.assign(k, std::vector<double>(length, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(result.labels[i]);
        ++counts[c];
        for (std::size_t t = 0; t < length; ++t) result.centroids[c][t] += sequences[i][t];
    }
    for (std::size_t c = 0; c < k; ++c) {
        for (double& v : result.centroids[c]) v /= static_cast<double>(counts[c]);
    }

    const Tensor q = clustering::soft_assign(sequences, result.centroids, metric, 1.0);
    result.scores.assign(n, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < k; ++c) result.scores[i][c] = q.at(i, c);
    }
    return result;
}

}  // namespace dtc::hierarchical
