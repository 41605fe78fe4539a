#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dtc/evaluation.hpp"
#include "dtc/rng.hpp"
#include "dtc/tensor.hpp"
#include "helpers.hpp"

using namespace dtc::eval;

TEST_CASE("roc curve and area match a hand-checked sweep") {
    const std::vector<double> scores = {0.9, 0.8, 0.7, 0.6};
    const std::vector<int> labels = {1, 0, 1, 0};
    const std::vector<RocPoint> curve = roc_curve(scores, labels);

    REQUIRE(curve.size() == 5);
    CHECK(curve[0].fpr == 0.0);
    CHECK(curve[0].tpr == 0.0);
    CHECK(curve[1].fpr == 0.0);
    CHECK(curve[1].tpr == doctest::Approx(0.5));
    CHECK(curve[2].fpr == doctest::Approx(0.5));
    CHECK(curve[2].tpr == doctest::Approx(0.5));
    CHECK(curve[3].fpr == doctest::Approx(0.5));
    CHECK(curve[3].tpr == 1.0);
    CHECK(curve[4].fpr == 1.0);
    CHECK(curve[4].tpr == 1.0);
    CHECK(auc(curve) == doctest::Approx(0.75));
}

TEST_CASE("roc endpoints and monotonicity hold for random scores") {
    dtc::Rng rng(81);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 10 + rng.index(40);
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        labels[0] = 1;
        labels[1] = 0;
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = rng.uniform();
            if (i > 1) labels[i] = rng.bernoulli(0.4) ? 1 : 0;
        }
        const std::vector<RocPoint> curve = roc_curve(scores, labels);
        CHECK(curve.front().fpr == 0.0);
        CHECK(curve.front().tpr == 0.0);
        CHECK(curve.back().fpr == 1.0);
        CHECK(curve.back().tpr == 1.0);
        for (std::size_t i = 1; i < curve.size(); ++i) {
            CHECK(curve[i].fpr >= curve[i - 1].fpr);
            CHECK(curve[i].tpr >= curve[i - 1].tpr);
        }
        const double a = auc(curve);
        CHECK(a >= 0.0);
        CHECK(a <= 1.0);
    }
}

TEST_CASE("fully tied scores collapse to the diagonal") {
    const std::vector<double> scores = {0.5, 0.5, 0.5, 0.5};
    const std::vector<int> labels = {1, 0, 1, 0};
    const std::vector<RocPoint> curve = roc_curve(scores, labels);
    REQUIRE(curve.size() == 2);
    CHECK(auc(curve) == doctest::Approx(0.5));
}

TEST_CASE("perfect and inverted separations give area one and zero") {
    const std::vector<double> scores = {0.9, 0.8, 0.2, 0.1};
    const std::vector<int> labels = {1, 1, 0, 0};
    CHECK(auc(roc_curve(scores, labels)) == doctest::Approx(1.0));

    const std::vector<int> flipped = {0, 0, 1, 1};
    CHECK(auc(roc_curve(scores, flipped)) == doctest::Approx(0.0));
    CHECK(aligned_auc(scores, flipped) == doctest::Approx(1.0));
}

TEST_CASE("area is invariant under strictly increasing score transforms") {
    dtc::Rng rng(82);
    std::vector<double> scores(30);
    std::vector<int> labels(30);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        scores[i] = rng.gaussian(0.0, 1.0);
        labels[i] = i % 3 == 0 ? 1 : 0;
    }
    std::vector<double> transformed(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        transformed[i] = std::exp(2.0 * scores[i]) + 5.0;
    }
    CHECK(auc(roc_curve(scores, labels)) == auc(roc_curve(transformed, labels)));
}

TEST_CASE("orientation alignment never reports below one half") {
    dtc::Rng rng(83);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> scores(40);
        std::vector<int> labels(40);
        labels[0] = 1;
        labels[1] = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            scores[i] = rng.uniform();
            if (i > 1) labels[i] = rng.bernoulli(0.5) ? 1 : 0;
        }
        CHECK(aligned_auc(scores, labels) >= 0.5);
    }
}

TEST_CASE("roc inputs are validated") {
    const std::vector<double> scores = {0.1, 0.2};
    CHECK_THROWS_AS(roc_curve(scores, std::vector<int>{1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(roc_curve(scores, std::vector<int>{0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(roc_curve(scores, std::vector<int>{1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(roc_curve(scores, std::vector<int>{1}), std::invalid_argument);
    CHECK_THROWS_AS(roc_curve({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(auc(std::vector<RocPoint>{{0.0, 0.0}}), std::invalid_argument);
}

TEST_CASE("assignment scores extract the first cluster column") {
    const dtc::Tensor q({2, 2}, {0.8, 0.2, 0.3, 0.7});
    CHECK(assignment_scores(q) == std::vector<double>{0.8, 0.3});
    CHECK_THROWS_AS(assignment_scores(dtc::Tensor({2, 3})), std::invalid_argument);
}

TEST_CASE("bootstrap of a perfect separator has zero spread") {
    const std::vector<double> scores = {0.9, 0.8, 0.2, 0.1};
    const std::vector<int> labels = {1, 1, 0, 0};
    const BootstrapResult result = bootstrap_auc(scores, labels, 10, 5);
    REQUIRE(result.values.size() == 10);
    CHECK(result.mean == doctest::Approx(1.0));
    CHECK(result.std_error == doctest::Approx(0.0));
}

TEST_CASE("a single bootstrap run is a plain resampled area") {
    const std::vector<double> scores = {0.9, 0.1, 0.8, 0.3};
    const std::vector<int> labels = {1, 0, 1, 0};
    const BootstrapResult result = bootstrap_auc(scores, labels, 1, 7);
    REQUIRE(result.values.size() == 1);
    CHECK(result.mean == result.values[0]);
    CHECK(result.std_error == 0.0);
    CHECK(result.values[0] >= 0.0);
    CHECK(result.values[0] <= 1.0);
}

TEST_CASE("bootstrap mean tracks the point estimate on large samples") {
    dtc::Rng rng(84);
    const std::size_t n = 500;
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = rng.bernoulli(0.5) ? 1 : 0;
        scores[i] = rng.gaussian(labels[i] == 1 ? 1.0 : 0.0, 1.0);
    }
    const double point = auc(roc_curve(scores, labels));
    const BootstrapResult result = bootstrap_auc(scores, labels, 10, 85);
    CHECK(std::abs(result.mean - point) < 0.02);
}

TEST_CASE("bootstrap is deterministic per seed and validates input") {
    const std::vector<double> scores = {0.9, 0.1, 0.8, 0.3, 0.6};
    const std::vector<int> labels = {1, 0, 1, 0, 1};
    const BootstrapResult a = bootstrap_auc(scores, labels, 6, 11);
    const BootstrapResult b = bootstrap_auc(scores, labels, 6, 11);
    CHECK(testutil::bitwise_equal(a.values, b.values));
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);

    CHECK_THROWS_AS(bootstrap_auc(scores, labels, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(bootstrap_auc(scores, std::vector<int>{1, 0}, 3, 1), std::invalid_argument);
}
