#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dtc/clustering.hpp"
#include "dtc/dataio.hpp"
#include "dtc/rng.hpp"
#include "dtc/tae.hpp"
#include "dtc/tensor.hpp"
#include "helpers.hpp"

using namespace dtc;
using namespace dtc::clustering;
using similarity::MetricKind;

namespace {

std::vector<std::vector<double>> two_blobs(Rng& rng, std::size_t per_side, std::size_t length,
                                           double gap) {
    std::vector<std::vector<double>> latents;
    for (std::size_t i = 0; i < 2 * per_side; ++i) {
        const double base = i < per_side ? 0.0 : gap;
        std::vector<double> z(length);
        for (double& v : z) v = base + rng.gaussian(0.0, 0.05);
        latents.push_back(std::move(z));
    }
    return latents;
}

tae::TaeModel tiny_pretrained_model(const dataio::Dataset& data, std::uint64_t seed,
                                    std::size_t epochs = 3) {
    tae::TaeConfig config;
    config.input_length = data.length;
    config.n_filters = 4;
    config.kernel_size = 5;
    config.pool_size = 4;
    config.lstm_units = {4, 1};
    tae::TaeModel model = tae::init_tae(config, seed);
    tae::PretrainOptions options;
    options.epochs = epochs;
    options.batch_size = 8;
    tae::pretrain(model, data, options, seed + 1);
    return model;
}

}  // namespace

TEST_CASE("soft assignment matches the exact kernel fractions") {
    const std::vector<std::vector<double>> latents = {{0.0}};
    const std::vector<std::vector<double>> centroids = {{0.5}, {-2.0}};
    const Tensor q = soft_assign(latents, centroids, MetricKind::EUCL);
    REQUIRE(q.shape() == std::vector<std::size_t>{1, 2});
    // Distances 0.5 and 2 give kernels 1/1.5 and 1/3, already summing to 1.
    CHECK(q.at(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(q.at(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("soft assignment rows are strictly positive and sum to one") {
    Rng rng(51);
    std::vector<std::vector<double>> latents, centroids;
    for (int i = 0; i < 7; ++i) latents.push_back(testutil::random_vector(rng, 9));
    for (int j = 0; j < 3; ++j) centroids.push_back(testutil::random_vector(rng, 9));

    for (MetricKind kind : {MetricKind::EUCL, MetricKind::CID, MetricKind::COR, MetricKind::ACF}) {
        const Tensor q = soft_assign(latents, centroids, kind);
        check_assignment_matrix(q, "test");
        for (std::size_t idx = 0; idx < q.size(); ++idx) CHECK(q[idx] > 0.0);
    }
}

TEST_CASE("soft assignment gives equal weight at equal distances") {
    const std::vector<std::vector<double>> latents = {{0.0, 0.0}};
    const std::vector<std::vector<double>> centroids = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}};
    const Tensor q = soft_assign(latents, centroids, MetricKind::EUCL);
    CHECK(q.at(0, 0) == doctest::Approx(q.at(0, 1)).epsilon(1e-12));
    CHECK(q.at(0, 1) == doctest::Approx(q.at(0, 2)).epsilon(1e-12));
}

TEST_CASE("a single centroid absorbs all mass") {
    Rng rng(52);
    std::vector<std::vector<double>> latents;
    for (int i = 0; i < 4; ++i) latents.push_back(testutil::random_vector(rng, 6));
    const Tensor q = soft_assign(latents, {testutil::random_vector(rng, 6)}, MetricKind::EUCL);
    for (std::size_t i = 0; i < 4; ++i) CHECK(q.at(i, 0) == 1.0);
}

TEST_CASE("soft assignment validates its input") {
    CHECK_THROWS_AS(soft_assign({}, {{1.0}}, MetricKind::EUCL), std::invalid_argument);
    CHECK_THROWS_AS(soft_assign({{1.0}}, {}, MetricKind::EUCL), std::invalid_argument);
    CHECK_THROWS_AS(soft_assign({{1.0, 2.0}}, {{1.0}}, MetricKind::EUCL), std::invalid_argument);
    CHECK_THROWS_AS(soft_assign({{1.0}}, {{2.0}}, MetricKind::EUCL, 0.0), std::invalid_argument);
}

TEST_CASE("target distribution sharpens toward the dominant cluster") {
    const Tensor q({2, 2}, {0.8, 0.2, 0.4, 0.6});
    const Tensor p = target_distribution(q);
    CHECK(p.at(0, 0) == doctest::Approx(0.9142857142857143).epsilon(1e-12));
    CHECK(p.at(0, 1) == doctest::Approx(0.08571428571428573).epsilon(1e-12));
    CHECK(p.at(1, 0) == doctest::Approx(0.2285714285714286).epsilon(1e-12));
    CHECK(p.at(1, 1) == doctest::Approx(0.7714285714285715).epsilon(1e-12));
    check_assignment_matrix(p, "test");

    // Sharpening: the favoured entry grows, the other shrinks.
    CHECK(p.at(0, 0) > q.at(0, 0));
    CHECK(p.at(1, 1) > q.at(1, 1));
}

TEST_CASE("a uniform assignment with balanced masses is a fixed point") {
    const Tensor q({3, 2}, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
    const Tensor p = target_distribution(q);
    for (std::size_t idx = 0; idx < q.size(); ++idx) {
        CHECK(p[idx] == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("target distribution accepts external column masses") {
    const Tensor q({1, 2}, {0.8, 0.2});
    const std::vector<double> mass = {2.0, 1.0};
    const Tensor p = target_distribution(q, mass);
    CHECK(p.at(0, 0) == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
    CHECK(p.at(0, 1) == doctest::Approx(1.0 / 9.0).epsilon(1e-12));

    CHECK_THROWS_AS(target_distribution(q, std::vector<double>{1.0}), std::invalid_argument);
    CHECK_THROWS_AS(target_distribution(q, std::vector<double>{1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("divergence is zero at equality and ln 2 for a point mass") {
    const Tensor q({2, 2}, {0.8, 0.2, 0.4, 0.6});
    CHECK(kl_loss(q, q) == doctest::Approx(0.0));

    const Tensor point({1, 2}, {1.0, 0.0});
    const Tensor uniform({1, 2}, {0.5, 0.5});
    CHECK(kl_loss(point, uniform) == doctest::Approx(0.6931471805599453).epsilon(1e-12));
}

TEST_CASE("divergence is nonnegative for random distribution pairs") {
    Rng rng(53);
    for (int trial = 0; trial < 30; ++trial) {
        Tensor p({4, 3}), q({4, 3});
        for (std::size_t i = 0; i < 4; ++i) {
            double ps = 0.0, qs = 0.0;
            for (std::size_t j = 0; j < 3; ++j) {
                p.at(i, j) = 0.01 + rng.uniform();
                q.at(i, j) = 0.01 + rng.uniform();
                ps += p.at(i, j);
                qs += q.at(i, j);
            }
            for (std::size_t j = 0; j < 3; ++j) {
                p.at(i, j) /= ps;
                q.at(i, j) /= qs;
            }
        }
        CHECK(kl_loss(p, q) >= 0.0);
    }
    CHECK_THROWS_AS(kl_loss(Tensor({1, 2}), Tensor({2, 2})), std::invalid_argument);
}

TEST_CASE("hard assignment takes the argmax with ties to the lower index") {
    const Tensor q({3, 3}, {0.2, 0.5, 0.3, 0.4, 0.4, 0.2, 0.1, 0.2, 0.7});
    CHECK(hard_assign(q) == std::vector<int>{1, 0, 2});
}

TEST_CASE("assignment change fraction counts differing rows") {
    const std::vector<int> a = {0, 1, 1};
    const std::vector<int> b = {0, 0, 1};
    CHECK(assignment_change_fraction(a, b) == doctest::Approx(1.0 / 3.0));
    CHECK(assignment_change_fraction(a, a) == 0.0);
    CHECK_THROWS_AS(assignment_change_fraction(a, std::vector<int>{0, 1}),
                    std::invalid_argument);
}

TEST_CASE("assignment matrix validation rejects broken rows") {
    check_assignment_matrix(Tensor({2, 2}, {0.3, 0.7, 1.0, 0.0}), "ok");
    CHECK_THROWS_AS(check_assignment_matrix(Tensor({1, 2}, {0.6, 0.6}), "bad"), std::logic_error);
    CHECK_THROWS_AS(check_assignment_matrix(Tensor({1, 2}, {-0.1, 1.1}), "bad"), std::logic_error);
    CHECK_THROWS_WITH(check_assignment_matrix(Tensor({1, 2}, {0.2, 0.2}), "bad"),
                      doctest::Contains("bad"));
}

TEST_CASE("centroid initialization averages the linkage clusters") {
    const std::vector<std::vector<double>> latents = {{0.0, 0.0}, {0.1, 0.0}, {5.0, 5.0}};
    const std::vector<std::vector<double>> centroids = init_centroids(latents, 2, MetricKind::EUCL);
    REQUIRE(centroids.size() == 2);
    CHECK(centroids[0][0] == doctest::Approx(0.05));
    CHECK(centroids[0][1] == doctest::Approx(0.0));
    CHECK(centroids[1][0] == doctest::Approx(5.0));
    CHECK(centroids[1][1] == doctest::Approx(5.0));
    CHECK_THROWS_AS(init_centroids(latents, 0, MetricKind::EUCL), std::invalid_argument);
    CHECK_THROWS_AS(init_centroids(latents, 4, MetricKind::EUCL), std::invalid_argument);
}

TEST_CASE("well separated blobs are recovered without any training") {
    Rng rng(54);
    const std::vector<std::vector<double>> latents = two_blobs(rng, 10, 8, 5.0);
    const std::vector<std::vector<double>> centroids = init_centroids(latents, 2, MetricKind::EUCL);
    const std::vector<int> labels = hard_assign(soft_assign(latents, centroids, MetricKind::EUCL));
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(labels[i] == labels[0]);
        CHECK(labels[10 + i] == labels[10]);
    }
    CHECK(labels[0] != labels[10]);
}

TEST_CASE("training config validation covers every field") {
    TrainConfig config;
    config.validate();

    TrainConfig bad = config;
    bad.k = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = config;
    bad.alpha = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = config;
    bad.max_epochs = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = config;
    bad.batch_size = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = config;
    bad.learning_rate = -0.1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = config;
    bad.convergence_tol = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = config;
    bad.reinit_mass_fraction = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("refinement requires a pretrained model and matching data") {
    const dataio::Dataset data = dataio::synth_events(12, 40, 0.5, 61);
    tae::TaeConfig config;
    config.input_length = data.length;
    config.n_filters = 4;
    config.kernel_size = 5;
    config.pool_size = 4;
    config.lstm_units = {4, 1};
    tae::TaeModel model = tae::init_tae(config, 5);

    TrainConfig train;
    train.max_epochs = 2;
    CHECK_THROWS_WITH(train_dtc(model, data, train, 1), doctest::Contains("pretrained"));

    model.pretrained = true;
    dataio::Dataset wrong = data;
    wrong.length = 20;
    wrong.values.resize(wrong.n * 20);
    CHECK_THROWS_AS(train_dtc(model, wrong, train, 1), std::invalid_argument);

    dataio::Dataset tiny = dataio::synth_events(1, 40, 0.0, 62);
    train.k = 2;
    CHECK_THROWS_AS(train_dtc(model, tiny, train, 1), std::invalid_argument);
}

TEST_CASE("a zero learning rate freezes assignments and stops at epoch two") {
    const dataio::Dataset data = dataio::synth_events(16, 40, 0.5, 63);
    tae::TaeModel model = tiny_pretrained_model(data, 7);

    TrainConfig config;
    config.learning_rate = 0.0;
    config.max_epochs = 20;
    config.batch_size = 8;

    const TrainResult result = train_dtc(model, data, config, 9);
    CHECK(result.converged);
    REQUIRE(result.history.size() == 2);
    CHECK(result.history[0].epoch == 1);
    CHECK(result.history[1].epoch == 2);
    CHECK(result.history[1].assignment_change == 0.0);
    CHECK(result.history[0].kl == doctest::Approx(result.history[1].kl).epsilon(1e-12));

    // Frozen updates keep the initialization centroids verbatim.
    const std::vector<std::vector<double>> init =
        init_centroids(tae::encode_all(model, data), config.k, config.metric);
    REQUIRE(result.centroids.size() == init.size());
    for (std::size_t j = 0; j < init.size(); ++j) {
        CHECK(testutil::max_abs_diff(result.centroids[j], init[j]) == 0.0);
    }
}

TEST_CASE("refinement is deterministic for a fixed seed") {
    const dataio::Dataset data = dataio::synth_events(20, 40, 0.5, 64);
    tae::TaeModel model_a = tiny_pretrained_model(data, 11);
    tae::TaeModel model_b = model_a;

    TrainConfig config;
    config.max_epochs = 4;
    config.batch_size = 8;
    config.learning_rate = 0.05;
    config.convergence_tol = 0.0;

    const TrainResult first = train_dtc(model_a, data, config, 13);
    const TrainResult second = train_dtc(model_b, data, config, 13);
    CHECK(first.labels == second.labels);
    CHECK(testutil::bitwise_equal(first.q.span(), second.q.span()));
    REQUIRE(first.history.size() == second.history.size());
    for (std::size_t e = 0; e < first.history.size(); ++e) {
        CHECK(first.history[e].kl == second.history[e].kl);
        CHECK(first.history[e].mse == second.history[e].mse);
    }
    for (std::size_t j = 0; j < first.centroids.size(); ++j) {
        CHECK(testutil::bitwise_equal(first.centroids[j], second.centroids[j]));
    }
}

TEST_CASE("refinement keeps the assignment matrix valid while it learns") {
    const dataio::Dataset data = dataio::synth_events(24, 48, 0.5, 65);
    tae::TaeModel model = tiny_pretrained_model(data, 17);

    TrainConfig config;
    config.max_epochs = 5;
    config.batch_size = 8;
    config.learning_rate = 0.05;
    config.convergence_tol = 0.0;  // run all epochs

    const TrainResult result = train_dtc(model, data, config, 19);
    REQUIRE(result.history.size() == 5);
    check_assignment_matrix(result.q, "test");
    CHECK(result.labels.size() == data.n);
    for (const EpochStats& stats : result.history) {
        CHECK(stats.kl >= 0.0);
        CHECK(std::isfinite(stats.mse));
    }
    // Centroid-only refinement also works end to end.
    tae::TaeModel frozen = tiny_pretrained_model(data, 23);
    config.joint = false;
    const TrainResult disjoint = train_dtc(frozen, data, config, 19);
    check_assignment_matrix(disjoint.q, "test");
}
