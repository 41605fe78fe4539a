#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "dtc/hierarchical.hpp"
#include "dtc/rng.hpp"
#include "dtc/similarity.hpp"
#include "helpers.hpp"
#include "linkage_oracle.hpp"

using namespace dtc::hierarchical;
using dtc::similarity::MetricKind;

namespace {

// Partition of sample indices induced by labels, for order-free comparison.
std::set<std::set<std::size_t>> partition_of(const std::vector<int>& labels) {
    std::set<std::set<std::size_t>> parts;
    const int k = *std::max_element(labels.begin(), labels.end()) + 1;
    for (int c = 0; c < k; ++c) {
        std::set<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == c) members.insert(i);
        }
        parts.insert(members);
    }
    return parts;
}

}  // namespace

TEST_CASE("pairwise distances are symmetric with a zero diagonal") {
    dtc::Rng rng(41);
    std::vector<std::vector<double>> seqs;
    for (int i = 0; i < 6; ++i) seqs.push_back(testutil::random_vector(rng, 12));

    for (MetricKind kind : {MetricKind::EUCL, MetricKind::CID, MetricKind::COR, MetricKind::ACF}) {
        const DistanceMatrix d = pairwise_distances(seqs, kind);
        REQUIRE(d.size() == 6);
        for (std::size_t i = 0; i < 6; ++i) {
            CHECK(d.at(i, i) == 0.0);
            for (std::size_t j = 0; j < 6; ++j) {
                CHECK(d.at(i, j) == d.at(j, i));
                CHECK(d.at(i, j) ==
                      doctest::Approx(dtc::similarity::distance(kind, seqs[i], seqs[j]))
                          .epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("pairwise distances validate their input") {
    CHECK_THROWS_AS(pairwise_distances({}, MetricKind::EUCL), std::invalid_argument);
    CHECK_THROWS_AS(pairwise_distances({{1.0, 2.0}, {1.0}}, MetricKind::EUCL),
                    std::invalid_argument);
    CHECK_THROWS_AS(pairwise_distances({{1.0, 2.0}, {3.0, 4.0}}, MetricKind::ACF),
                    std::invalid_argument);
}

TEST_CASE("three points agglomerate into the close pair first") {
    const std::vector<std::vector<double>> points = {{0.0, 0.0}, {0.1, 0.0}, {5.0, 5.0}};
    const Dendrogram dendro = complete_linkage(pairwise_distances(points, MetricKind::EUCL));

    REQUIRE(dendro.merges.size() == 2);
    CHECK(dendro.merges[0].a == 0);
    CHECK(dendro.merges[0].b == 1);
    CHECK(dendro.merges[0].height == doctest::Approx(0.1));
    CHECK(dendro.merges[1].a == 0);
    CHECK(dendro.merges[1].b == 2);
    // Complete linkage takes the farther of the two cross distances.
    CHECK(dendro.merges[1].height == doctest::Approx(std::sqrt(50.0)));

    CHECK(cut(dendro, 2) == std::vector<int>{0, 0, 1});
    CHECK(cut(dendro, 1) == std::vector<int>{0, 0, 0});
    CHECK(cut(dendro, 3) == std::vector<int>{0, 1, 2});

    const BaselineResult base = baseline_cluster(points, MetricKind::EUCL, 2);
    CHECK(base.labels == std::vector<int>{0, 0, 1});
    CHECK(base.centroids[0][0] == doctest::Approx(0.05));
    CHECK(base.centroids[0][1] == doctest::Approx(0.0));
    CHECK(base.centroids[1][0] == doctest::Approx(5.0));
    CHECK(base.centroids[1][1] == doctest::Approx(5.0));
}

TEST_CASE("merge heights never decrease") {
    dtc::Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.index(10);
        const DistanceMatrix d = linkage_oracle::random_matrix(rng, n, trial % 2 == 0);
        const Dendrogram dendro = complete_linkage(d);
        REQUIRE(dendro.merges.size() == n - 1);
        for (std::size_t m = 1; m < dendro.merges.size(); ++m) {
            CHECK(dendro.merges[m].height >= dendro.merges[m - 1].height);
        }
        for (const Merge& merge : dendro.merges) CHECK(merge.a < merge.b);
    }
}

TEST_CASE("agglomeration matches the naive reference on random matrices") {
    dtc::Rng rng(43);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 2 + rng.index(7);
        const DistanceMatrix d = linkage_oracle::random_matrix(rng, n, trial % 2 == 1);
        const Dendrogram fast = complete_linkage(d);
        const Dendrogram naive = linkage_oracle::brute_force(d);
        REQUIRE(linkage_oracle::same_dendrogram(fast, naive));
        for (std::size_t k = 1; k <= n; ++k) CHECK(cut(fast, k) == cut(naive, k));
    }
}

TEST_CASE("clusters are invariant to sample order when distances are distinct") {
    dtc::Rng rng(44);
    std::vector<std::vector<double>> seqs;
    for (int i = 0; i < 8; ++i) seqs.push_back(testutil::random_vector(rng, 10));

    std::vector<std::size_t> perm(seqs.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    rng.shuffle(perm);
    std::vector<std::vector<double>> shuffled(seqs.size());
    for (std::size_t i = 0; i < perm.size(); ++i) shuffled[i] = seqs[perm[i]];

    for (std::size_t k : std::vector<std::size_t>{2, 3, 4}) {
        const std::vector<int> base =
            cut(complete_linkage(pairwise_distances(seqs, MetricKind::EUCL)), k);
        const std::vector<int> moved =
            cut(complete_linkage(pairwise_distances(shuffled, MetricKind::EUCL)), k);
        // Map the shuffled labels back onto original indices and compare the
        // induced partitions.
        std::vector<int> mapped(base.size());
        for (std::size_t i = 0; i < perm.size(); ++i) mapped[perm[i]] = moved[i];
        CHECK(partition_of(base) == partition_of(mapped));
    }
}

TEST_CASE("cut assigns labels by first appearance") {
    dtc::Rng rng(45);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 3 + rng.index(6);
        const DistanceMatrix d = linkage_oracle::random_matrix(rng, n, false);
        const Dendrogram dendro = complete_linkage(d);
        for (std::size_t k = 1; k <= n; ++k) {
            const std::vector<int> labels = cut(dendro, k);
            CHECK(labels[0] == 0);
            int seen = 0;
            for (int label : labels) {
                CHECK(label <= seen);
                if (label == seen) ++seen;
            }
            CHECK(static_cast<std::size_t>(seen) == k);
        }
    }
    CHECK_THROWS_AS(cut(Dendrogram{3, {}}, 0), std::invalid_argument);
    CHECK_THROWS_AS(cut(Dendrogram{3, {}}, 4), std::invalid_argument);
}

TEST_CASE("baseline scores are row-normalized soft assignments") {
    dtc::Rng rng(46);
    std::vector<std::vector<double>> seqs;
    for (int i = 0; i < 10; ++i) seqs.push_back(testutil::random_vector(rng, 12));

    const BaselineResult base = baseline_cluster(seqs, MetricKind::CID, 3);
    REQUIRE(base.labels.size() == 10);
    REQUIRE(base.scores.size() == 10);
    REQUIRE(base.centroids.size() == 3);
    for (const auto& row : base.scores) {
        REQUIRE(row.size() == 3);
        double sum = 0.0;
        for (double v : row) {
            CHECK(v > 0.0);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }

    // Centroids are the member means of the cut clusters.
    std::vector<std::vector<double>> means(3, std::vector<double>(12, 0.0));
    std::vector<std::size_t> counts(3, 0);
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        const auto c = static_cast<std::size_t>(base.labels[i]);
        ++counts[c];
        for (std::size_t t = 0; t < 12; ++t) means[c][t] += seqs[i][t];
    }
    for (std::size_t c = 0; c < 3; ++c) {
        REQUIRE(counts[c] > 0);
        for (std::size_t t = 0; t < 12; ++t) {
            CHECK(base.centroids[c][t] == doctest::Approx(means[c][t] / counts[c]).epsilon(1e-12));
        }
    }

    CHECK_THROWS_AS(baseline_cluster({}, MetricKind::EUCL, 1), std::invalid_argument);
    CHECK_THROWS_AS(baseline_cluster(seqs, MetricKind::EUCL, 11), std::invalid_argument);
}
