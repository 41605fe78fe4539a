#pragma once

// Seeded finite-difference gradient checks shared by the unit tests and the
// acceptance gate. Every check builds one randomized instance, accumulates
// analytic gradients through the backward pass under test, and returns the
// maximum relative error reported by dtc::finite_difference_check.

#include <cstddef>
#include <functional>
#include <vector>

#include "dtc/clustering.hpp"
#include "dtc/gradcheck.hpp"
#include "dtc/layers.hpp"
#include "dtc/losses.hpp"
#include "dtc/rng.hpp"
#include "dtc/similarity.hpp"
#include "dtc/tae.hpp"
#include "dtc/tensor.hpp"
#include "helpers.hpp"

namespace gradsuite {

constexpr double kStep = 1e-5;
constexpr double kTolerance = 1e-4;
// Central differences of a double-precision objective bottom out near
// eps * |f| / step; below that the quotient is cancellation noise, so
// absolute disagreements under this floor are ignored. Any genuinely
// wrong gradient sits orders of magnitude above it.
constexpr double kNoiseFloor = 1e-8;

inline double weighted_sum(const dtc::Tensor& y, const dtc::Tensor& weights) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += weights[i] * y[i];
    return s;
}

inline std::vector<std::vector<double>> to_rows(const dtc::Tensor& t) {
    std::vector<std::vector<double>> rows(t.rows(), std::vector<double>(t.cols()));
    for (std::size_t r = 0; r < t.rows(); ++r) {
        for (std::size_t c = 0; c < t.cols(); ++c) rows[r][c] = t.at(r, c);
    }
    return rows;
}

inline double run_check(const std::function<double()>& fn, std::vector<dtc::Parameter*> params) {
    return dtc::finite_difference_check(fn, params, kStep, kNoiseFloor);
}

inline double check_conv(dtc::Rng& rng) {
    const std::size_t L = 6 + rng.index(6), Cin = 1 + rng.index(2);
    const std::size_t K = 2 + rng.index(4), F = 1 + rng.index(3);
    dtc::Parameter kernels(testutil::random_tensor(rng, {K, Cin, F}, 0.6));
    dtc::Parameter bias(testutil::random_tensor(rng, {F}, 0.6));
    dtc::Parameter input(testutil::random_tensor(rng, {L, Cin}));
    const dtc::Tensor weights = testutil::random_tensor(rng, {L, F});

    dtc::Conv1dContext ctx;
    dtc::conv1d_forward(input.value, kernels, bias, &ctx);
    input.grad = dtc::conv1d_backward(ctx, weights, kernels, bias);

    auto fn = [&]() { return weighted_sum(dtc::conv1d_forward(input.value, kernels, bias), weights); };
    return run_check(fn, {&kernels, &bias, &input});
}

inline double check_deconv(dtc::Rng& rng) {
    const std::size_t T = 4 + rng.index(4), K = 2 + rng.index(4);
    const std::size_t Lout = (rng.index(2) == 0) ? T * 2 : T + 1;
    dtc::Parameter kernels(testutil::random_tensor(rng, {K, 1, 1}, 0.6));
    dtc::Parameter bias(testutil::random_tensor(rng, {1}, 0.6));
    dtc::Parameter input(testutil::random_tensor(rng, {T, 1}));
    const dtc::Tensor weights = testutil::random_tensor(rng, {Lout, 1});

    dtc::Deconv1dContext ctx;
    dtc::deconv1d_forward(input.value, kernels, bias, Lout, &ctx);
    input.grad = dtc::deconv1d_backward(ctx, weights, kernels, bias);

    auto fn = [&]() {
        return weighted_sum(dtc::deconv1d_forward(input.value, kernels, bias, Lout), weights);
    };
    return run_check(fn, {&kernels, &bias, &input});
}

inline double check_leaky_relu(dtc::Rng& rng) {
    const std::size_t L = 5 + rng.index(8);
    dtc::Parameter input(testutil::random_tensor(rng, {L, 2}));
    const dtc::Tensor weights = testutil::random_tensor(rng, {L, 2});
    const double slope = 0.01 + 0.2 * rng.uniform();

    dtc::LeakyReluContext ctx;
    dtc::leaky_relu_forward(input.value, slope, &ctx);
    input.grad = dtc::leaky_relu_backward(ctx, weights);

    auto fn = [&]() { return weighted_sum(dtc::leaky_relu_forward(input.value, slope), weights); };
    return run_check(fn, {&input});
}

inline double check_maxpool(dtc::Rng& rng) {
    const std::size_t L = 6 + rng.index(7), pool = 2 + rng.index(3);
    dtc::Parameter input(testutil::random_tensor(rng, {L, 2}));
    const std::size_t out_len = (L + pool - 1) / pool;
    const dtc::Tensor weights = testutil::random_tensor(rng, {out_len, 2});

    dtc::MaxPool1dContext ctx;
    dtc::maxpool1d_forward(input.value, pool, &ctx);
    input.grad = dtc::maxpool1d_backward(ctx, weights);

    auto fn = [&]() { return weighted_sum(dtc::maxpool1d_forward(input.value, pool), weights); };
    return run_check(fn, {&input});
}

inline double check_upsample(dtc::Rng& rng) {
    const std::size_t L = 3 + rng.index(5), factor = 2 + rng.index(3);
    dtc::Parameter input(testutil::random_tensor(rng, {L, 2}));
    const dtc::Tensor weights = testutil::random_tensor(rng, {L * factor, 2});

    dtc::Upsample1dContext ctx;
    dtc::upsample1d_forward(input.value, factor, &ctx);
    input.grad = dtc::upsample1d_backward(ctx, weights);

    auto fn = [&]() { return weighted_sum(dtc::upsample1d_forward(input.value, factor), weights); };
    return run_check(fn, {&input});
}

inline double check_bilstm(dtc::Rng& rng) {
    const std::size_t T = 4 + rng.index(4), F = 1 + rng.index(2), H = 1 + rng.index(3);
    dtc::BiLstmParams params(F, H);
    params.init_gaussian(rng, 0.5);
    dtc::Parameter input(testutil::random_tensor(rng, {T, F}));
    const dtc::Tensor weights = testutil::random_tensor(rng, {T, H});

    dtc::BiLstmContext ctx;
    dtc::bilstm_forward(input.value, params, &ctx);
    input.grad = dtc::bilstm_backward(ctx, weights, params);

    auto fn = [&]() { return weighted_sum(dtc::bilstm_forward(input.value, params), weights); };
    std::vector<dtc::Parameter*> all = params.parameters();
    all.push_back(&input);
    return run_check(fn, all);
}

inline dtc::tae::TaeConfig small_tae_config(dtc::Rng& rng) {
    dtc::tae::TaeConfig config;
    config.input_length = 12 + rng.index(6);
    config.n_filters = 3;
    config.kernel_size = 4;
    config.pool_size = 2 + rng.index(2);
    config.lstm_units = {3, 1};
    return config;
}

// Reconstruction objective through the full autoencoder stack.
inline double check_tae(dtc::Rng& rng) {
    const dtc::tae::TaeConfig config = small_tae_config(rng);
    dtc::tae::TaeModel model = dtc::tae::init_tae(config, rng.next_seed());
    // Larger weights than the training init keep every gate away from
    // saturation plateaus where finite differences lose precision.
    for (dtc::Parameter* p : model.parameters()) {
        for (double& v : p->value.span()) v = rng.gaussian(0.0, 0.4);
    }
    const dtc::Tensor x = testutil::random_tensor(rng, {config.input_length, 1});

    dtc::tae::EncodeContext ectx;
    dtc::tae::DecodeContext dctx;
    const dtc::Tensor latent = dtc::tae::encode(model, x, &ectx);
    const dtc::Tensor rec = dtc::tae::decode(model, latent, &dctx);
    const dtc::Tensor grad_rec = dtc::mse_loss_grad(x, rec);
    const dtc::Tensor grad_latent = dtc::tae::decode_backward(model, dctx, grad_rec);
    dtc::tae::encode_backward(model, ectx, grad_latent);

    auto fn = [&]() { return dtc::mse_loss(x, dtc::tae::decode(model, dtc::tae::encode(model, x))); };
    return run_check(fn, model.parameters());
}

inline double check_metric(dtc::Rng& rng, dtc::similarity::MetricKind kind) {
    const std::size_t N = 8 + rng.index(8);
    dtc::Parameter a(testutil::random_tensor(rng, {N}));
    dtc::Parameter b(testutil::random_tensor(rng, {N}));

    const dtc::similarity::MetricGradient g =
        dtc::similarity::metric_gradient(kind, a.value.span(), b.value.span());
    for (std::size_t i = 0; i < N; ++i) {
        a.grad[i] = g.wrt_a[i];
        b.grad[i] = g.wrt_b[i];
    }

    auto fn = [&]() { return dtc::similarity::distance(kind, a.value.span(), b.value.span()); };
    return run_check(fn, {&a, &b});
}

// Frozen target computed from a jittered copy of the centroids: sharpening
// the current assignment itself would sit too close to a stationary point,
// where finite differences of the tiny true gradients are all noise.
inline dtc::Tensor off_policy_target(dtc::Rng& rng,
                                     const std::vector<std::vector<double>>& latents,
                                     const dtc::Tensor& centroids,
                                     dtc::similarity::MetricKind kind) {
    dtc::Tensor jittered = centroids;
    for (double& v : jittered.span()) v += rng.gaussian(0.0, 0.4);
    return dtc::clustering::target_distribution(
        dtc::clustering::soft_assign(latents, to_rows(jittered), kind));
}

// KL(P || Q) through the soft assignment, w.r.t. both latents and centroids,
// with P frozen the way a training step freezes it.
inline double check_kl(dtc::Rng& rng, dtc::similarity::MetricKind kind) {
    const std::size_t n = 5 + rng.index(3), k = 2 + rng.index(2), d = 8 + rng.index(5);
    dtc::Parameter latents(testutil::random_tensor(rng, {n, d}));
    dtc::Parameter centroids(testutil::random_tensor(rng, {k, d}));

    const dtc::Tensor p = off_policy_target(rng, to_rows(latents.value), centroids.value, kind);

    const dtc::clustering::ClusteringGradients grads = dtc::clustering::clustering_gradients(
        to_rows(latents.value), to_rows(centroids.value), p, kind);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < d; ++t) latents.grad.at(i, t) = grads.wrt_latents[i][t];
    }
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t t = 0; t < d; ++t) centroids.grad.at(j, t) = grads.wrt_centroids[j][t];
    }

    auto fn = [&]() {
        const dtc::Tensor q2 =
            dtc::clustering::soft_assign(to_rows(latents.value), to_rows(centroids.value), kind);
        return dtc::clustering::kl_loss(p, q2);
    };
    return run_check(fn, {&latents, &centroids});
}

// KL objective composed through the encoder: the gradient at each latent is
// pushed back through encode_backward into the encoder parameters.
inline double check_kl_encoder(dtc::Rng& rng, dtc::similarity::MetricKind kind) {
    dtc::tae::TaeConfig config = small_tae_config(rng);
    config.pool_size = 2;
    dtc::tae::TaeModel model = dtc::tae::init_tae(config, rng.next_seed());
    for (dtc::Parameter* p : model.parameters()) {
        for (double& v : p->value.span()) v = rng.gaussian(0.0, 0.4);
    }

    const std::size_t n = 4, k = 2, d = config.latent_length();
    std::vector<dtc::Tensor> inputs;
    for (std::size_t i = 0; i < n; ++i) {
        inputs.push_back(testutil::random_tensor(rng, {config.input_length, 1}));
    }
    dtc::Parameter centroids(testutil::random_tensor(rng, {k, d}));

    auto encode_rows = [&]() {
        std::vector<std::vector<double>> rows;
        for (const dtc::Tensor& x : inputs) {
            const dtc::Tensor z = dtc::tae::encode(model, x);
            rows.emplace_back(z.span().begin(), z.span().end());
        }
        return rows;
    };

    std::vector<dtc::tae::EncodeContext> contexts(n);
    std::vector<std::vector<double>> latents;
    for (std::size_t i = 0; i < n; ++i) {
        const dtc::Tensor z = dtc::tae::encode(model, inputs[i], &contexts[i]);
        latents.emplace_back(z.span().begin(), z.span().end());
    }
    const dtc::Tensor p = off_policy_target(rng, latents, centroids.value, kind);

    const dtc::clustering::ClusteringGradients grads =
        dtc::clustering::clustering_gradients(latents, to_rows(centroids.value), p, kind);
    for (std::size_t i = 0; i < n; ++i) {
        dtc::Tensor grad_latent({d, 1});
        for (std::size_t t = 0; t < d; ++t) grad_latent[t] = grads.wrt_latents[i][t];
        dtc::tae::encode_backward(model, contexts[i], grad_latent);
    }
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t t = 0; t < d; ++t) centroids.grad.at(j, t) = grads.wrt_centroids[j][t];
    }

    auto fn = [&]() {
        const dtc::Tensor q2 =
            dtc::clustering::soft_assign(encode_rows(), to_rows(centroids.value), kind);
        return dtc::clustering::kl_loss(p, q2);
    };
    std::vector<dtc::Parameter*> params = model.encoder_parameters();
    params.push_back(&centroids);
    return run_check(fn, params);
}

}  // namespace gradsuite
