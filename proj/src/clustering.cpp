#include "dtc/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dtc/hierarchical.hpp"
#include "dtc/losses.hpp"
#include "dtc/optim.hpp"
#include "dtc/rng.hpp"

namespace dtc::clustering {

using similarity::MetricKind;

namespace {

double student_kernel(double distance, double alpha) {
    return std::pow(1.0 + distance / alpha, -(alpha + 1.0) / 2.0);
}

double student_kernel_derivative(double distance, double alpha) {
    return -(alpha + 1.0) / (2.0 * alpha) * std::pow(1.0 + distance / alpha, -(alpha + 3.0) / 2.0);
}

void check_latents_and_centroids(const std::vector<std::vector<double>>& latents,
                                 const std::vector<std::vector<double>>& centroids) {
    if (latents.empty()) throw std::invalid_argument("soft_assign: no latents");
    if (centroids.empty()) throw std::invalid_argument("soft_assign: no centroids");
    const std::size_t length = latents.front().size();
    for (const auto& z : latents) {
        if (z.size() != length) throw std::invalid_argument("soft_assign: ragged latents");
    }
    for (const auto& w : centroids) {
        if (w.size() != length) {
            throw std::invalid_argument("soft_assign: centroid length mismatch");
        }
        for (double v : w) {
            if (!std::isfinite(v)) throw std::invalid_argument("soft_assign: non-finite centroid");
        }
    }
}

}  // namespace

Tensor soft_assign(const std::vector<std::vector<double>>& latents,
                   const std::vector<std::vector<double>>& centroids, MetricKind metric,
                   double alpha) {
    if (alpha <= 0.0) throw std::invalid_argument("soft_assign: alpha must be positive");
    check_latents_and_centroids(latents, centroids);

    const std::size_t n = latents.size();
    const std::size_t k = centroids.size();
    Tensor q({n, k});
    for (std::size_t i = 0; i < n; ++i) {
        double norm = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const double d = similarity::distance(metric, latents[i], centroids[j]);
            const double kernel = student_kernel(d, alpha);
            q.at(i, j) = kernel;
            norm += kernel;
        }
        for (std::size_t j = 0; j < k; ++j) q.at(i, j) /= norm;
    }
    return q;
}

Tensor target_distribution(const Tensor& q) {
    if (q.ndim() != 2) throw std::invalid_argument("target_distribution: q must be 2-D");
    const std::size_t k = q.dim(1);
    std::vector<double> mass(k, 0.0);
    for (std::size_t i = 0; i < q.dim(0); ++i) {
        for (std::size_t j = 0; j < k; ++j) mass[j] += q.at(i, j);
    }
    return target_distribution(q, mass);
}

Tensor target_distribution(const Tensor& q, std::span<const double> column_mass) {
    if (q.ndim() != 2) throw std::invalid_argument("target_distribution: q must be 2-D");
    const std::size_t n = q.dim(0);
    const std::size_t k = q.dim(1);
    if (column_mass.size() != k) {
        throw std::invalid_argument("target_distribution: column mass size mismatch");
    }
    for (double f : column_mass) {
        if (!(f > 0.0)) throw std::invalid_argument("target_distribution: non-positive mass");
    }

    Tensor p({n, k});
    for (std::size_t i = 0; i < n; ++i) {
        double norm = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const double v = q.at(i, j) * q.at(i, j) / column_mass[j];
            p.at(i, j) = v;
            norm += v;
        }
        for (std::size_t j = 0; j < k; ++j) p.at(i, j) /= norm;
    }
    return p;
}

double kl_loss(const Tensor& p, const Tensor& q) {
    check_same_shape(p, q, "kl_loss");
    double total = 0.0;
    for (std::size_t idx = 0; idx < p.size(); ++idx) {
        const double pi = p[idx];
        if (pi <= 0.0) continue;
        const double qi = std::max(q[idx], 1e-300);
        total += pi * (std::log(pi) - std::log(qi));
    }
    // The divergence is nonnegative; rounding of near-identical
    // distributions must not produce a negative total.
    return std::max(total, 0.0);
}

std::vector<int> hard_assign(const Tensor& q) {
    if (q.ndim() != 2) throw std::invalid_argument("hard_assign: q must be 2-D");
    std::vector<int> labels(q.dim(0), 0);
    for (std::size_t i = 0; i < q.dim(0); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < q.dim(1); ++j) {
            if (q.at(i, j) > q.at(i, best)) best = j;
        }
        labels[i] = static_cast<int>(best);
    }
    return labels;
}

double assignment_change_fraction(std::span<const int> previous, std::span<const int> current) {
    if (previous.size() != current.size() || previous.empty()) {
        throw std::invalid_argument("assignment_change_fraction: size mismatch");
    }
    std::size_t changed = 0;
    for (std::size_t i = 0; i < previous.size(); ++i) changed += (previous[i] != current[i]);
    return static_cast<double>(changed) / static_cast<double>(previous.size());
}

void check_assignment_matrix(const Tensor& m, const char* what) {
    if (m.ndim() != 2) throw std::logic_error(std::string(what) + ": matrix must be 2-D");
    for (std::size_t i = 0; i < m.dim(0); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < m.dim(1); ++j) {
            const double v = m.at(i, j);
            if (!(v >= 0.0) || v > 1.0 + 1e-12) {
                throw std::logic_error(std::string(what) + ": entry outside [0, 1] at row " +
                                       std::to_string(i));
            }
            row += v;
        }
        if (std::abs(row - 1.0) > 1e-9) {
            throw std::logic_error(std::string(what) + ": row " + std::to_string(i) +
                                   " sums to " + std::to_string(row));
        }
    }
}

ClusteringGradients clustering_gradients(const std::vector<std::vector<double>>& latents,
                                         const std::vector<std::vector<double>>& centroids,
                                         const Tensor& p, MetricKind metric, double alpha) {
    if (alpha <= 0.0) throw std::invalid_argument("clustering_gradients: alpha must be positive");
    check_latents_and_centroids(latents, centroids);
    const std::size_t n = latents.size();
    const std::size_t k = centroids.size();
    const std::size_t length = latents.front().size();
    if (p.shape() != std::vector<std::size_t>{n, k}) {
        throw std::invalid_argument("clustering_gradients: p has shape " + p.shape_string());
    }

    ClusteringGradients grads;
    grads.wrt_centroids.assign(k, std::vector<double>(length, 0.0));
    grads.wrt_latents.assign(n, std::vector<double>(length, 0.0));

    std::vector<double> dist(k), kernel(k);
    for (std::size_t i = 0; i < n; ++i) {
        double norm = 0.0;
        double row_p = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            dist[j] = similarity::distance(metric, latents[i], centroids[j]);
            kernel[j] = student_kernel(dist[j], alpha);
            norm += kernel[j];
            row_p += p.at(i, j);
        }
        for (std::size_t j = 0; j < k; ++j) {
            const double q_ij = kernel[j] / norm;
            // dKL/dd_ij for KL(P||Q) with row-normalized Q.
            const double dkl_dd = student_kernel_derivative(dist[j], alpha) / norm *
                                  (row_p - p.at(i, j) / q_ij);
            if (dkl_dd == 0.0) continue;
            const similarity::MetricGradient g =
                similarity::metric_gradient(metric, latents[i], centroids[j]);
            for (std::size_t t = 0; t < length; ++t) {
                grads.wrt_latents[i][t] += dkl_dd * g.wrt_a[t];
                grads.wrt_centroids[j][t] += dkl_dd * g.wrt_b[t];
            }
        }
    }
    return grads;
}

std::vector<std::vector<double>> init_centroids(const std::vector<std::vector<double>>& latents,
                                                std::size_t k, MetricKind metric) {
    if (k == 0 || k > latents.size()) {
        throw std::invalid_argument("init_centroids: k must be in [1, n]");
    }
    const hierarchical::BaselineResult base = hierarchical::baseline_cluster(latents, metric, k);
    return base.centroids;
}

void TrainConfig::validate() const {
    if (k == 0) throw std::invalid_argument("train_dtc: k must be >= 1");
    if (alpha <= 0.0) throw std::invalid_argument("train_dtc: alpha must be positive");
    if (max_epochs == 0) throw std::invalid_argument("train_dtc: max_epochs must be >= 1");
    if (batch_size == 0) throw std::invalid_argument("train_dtc: batch_size must be >= 1");
    if (learning_rate < 0.0) throw std::invalid_argument("train_dtc: negative learning rate");
    if (convergence_tol < 0.0) throw std::invalid_argument("train_dtc: negative tolerance");
    if (reinit_mass_fraction < 0.0 || reinit_mass_fraction >= 1.0) {
        throw std::invalid_argument("train_dtc: reinit_mass_fraction must be in [0, 1)");
    }
}

namespace {

Tensor sequence_tensor(std::span<const double> seq) {
    Tensor x({seq.size(), 1});
    std::copy(seq.begin(), seq.end(), x.data());
    return x;
}

// Reseeds starved centroids to the latent of the least-confident sample, the
// one whose best assignment probability is smallest. Returns whether anything
// changed.
bool reseed_empty_clusters(std::vector<std::vector<double>>& centroids,
                           const std::vector<std::vector<double>>& latents, const Tensor& q,
                           double threshold) {
    const std::size_t n = latents.size();
    const std::size_t k = centroids.size();
    std::vector<double> mass(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) mass[j] += q.at(i, j);
    }

    bool changed = false;
    for (std::size_t j = 0; j < k; ++j) {
        if (mass[j] >= threshold) continue;
        std::size_t least_confident = 0;
        double lowest_best = 2.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = 0.0;
            for (std::size_t jj = 0; jj < k; ++jj) best = std::max(best, q.at(i, jj));
            if (best < lowest_best) {
                lowest_best = best;
                least_confident = i;
            }
        }
        centroids[j] = latents[least_confident];
        changed = true;
    }
    return changed;
}

}  // namespace

TrainResult train_dtc(tae::TaeModel& model, const dataio::Dataset& data,
                      const TrainConfig& config, std::uint64_t seed) {
    config.validate();
    if (!model.pretrained) {
        throw std::invalid_argument("train_dtc: model has not been pretrained");
    }
    if (data.n == 0) throw std::invalid_argument("train_dtc: empty dataset");
    if (data.n < config.k) throw std::invalid_argument("train_dtc: fewer samples than clusters");
    if (data.length != model.config.input_length) {
        throw std::invalid_argument("train_dtc: dataset length does not match the model");
    }

    Rng rng(seed);
    const std::vector<Parameter*> all_params = model.parameters();
    const std::vector<Parameter*> encoder_params = model.encoder_parameters();

    std::vector<std::vector<double>> latents = tae::encode_all(model, data);
    std::vector<std::vector<double>> centroids = init_centroids(latents, config.k, config.metric);
    std::vector<int> labels =
        hard_assign(soft_assign(latents, centroids, config.metric, config.alpha));

    std::vector<std::size_t> order(data.n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainResult result;
    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        if (epoch > 1) latents = tae::encode_all(model, data);
        Tensor q = soft_assign(latents, centroids, config.metric, config.alpha);
        check_assignment_matrix(q, "train_dtc: q");
        std::vector<double> mass(config.k, 0.0);
        for (std::size_t i = 0; i < data.n; ++i) {
            for (std::size_t j = 0; j < config.k; ++j) mass[j] += q.at(i, j);
        }
        const Tensor p = target_distribution(q, mass);
        check_assignment_matrix(p, "train_dtc: p");

        const double kl = kl_loss(p, q);
        if (!std::isfinite(kl) || kl > config.divergence_limit) {
            throw std::runtime_error("train_dtc: KL loss diverged at epoch " +
                                     std::to_string(epoch));
        }
        if (kl < 0.0) throw std::logic_error("train_dtc: negative KL loss");

        const std::vector<int> new_labels = hard_assign(q);
        const double change = assignment_change_fraction(labels, new_labels);
        labels = new_labels;
        result.history.push_back({epoch, kl, reconstruction_loss(model, data), change});

        if (epoch > 1 && change < config.convergence_tol) {
            result.converged = true;
            break;
        }

        reseed_empty_clusters(centroids, latents, q,
                              config.reinit_mass_fraction * static_cast<double>(data.n));

        rng.shuffle(order);
        for (std::size_t start = 0; start < data.n; start += config.batch_size) {
            const std::size_t end = std::min(data.n, start + config.batch_size);
            const std::size_t batch = end - start;
            const double inv_batch = 1.0 / static_cast<double>(batch);

            // KL step on the centroids (and the encoder when joint).  The
            // divergence is a sum over assignment-matrix entries, so batch
            // gradients are partial sums, not means.
            std::vector<tae::EncodeContext> contexts(config.joint ? batch : 0);
            std::vector<std::vector<double>> batch_latents(batch);
            for (std::size_t b = 0; b < batch; ++b) {
                const Tensor x = sequence_tensor(data.sequence(order[start + b]));
                const Tensor z =
                    config.joint ? tae::encode(model, x, &contexts[b]) : tae::encode(model, x);
                batch_latents[b].assign(z.data(), z.data() + z.size());
            }
            Tensor q_batch = soft_assign(batch_latents, centroids, config.metric, config.alpha);
            check_assignment_matrix(q_batch, "train_dtc: batch q");
            const Tensor p_batch = target_distribution(q_batch, mass);
            check_assignment_matrix(p_batch, "train_dtc: batch p");

            const ClusteringGradients grads = clustering_gradients(
                batch_latents, centroids, p_batch, config.metric, config.alpha);
            if (config.joint) {
                zero_grads(encoder_params);
                for (std::size_t b = 0; b < batch; ++b) {
                    Tensor grad_latent({batch_latents[b].size(), 1});
                    for (std::size_t t = 0; t < batch_latents[b].size(); ++t) {
                        grad_latent.at(t, 0) = grads.wrt_latents[b][t];
                    }
                    tae::encode_backward(model, contexts[b], grad_latent);
                }
                sgd_step(encoder_params, config.learning_rate);
            }
            for (std::size_t j = 0; j < config.k; ++j) {
                for (std::size_t t = 0; t < centroids[j].size(); ++t) {
                    centroids[j][t] -= config.learning_rate * grads.wrt_centroids[j][t];
                }
            }

            // Reconstruction step on the full autoencoder, descending on the
            // squared error averaged over batch and time.
            if (config.joint) {
                const double mse_scale = inv_batch / static_cast<double>(data.length);
                zero_grads(all_params);
                for (std::size_t b = start; b < end; ++b) {
                    const Tensor x = sequence_tensor(data.sequence(order[b]));
                    tae::EncodeContext ectx;
                    tae::DecodeContext dctx;
                    const Tensor latent = tae::encode(model, x, &ectx);
                    const Tensor recon = tae::decode(model, latent, &dctx);
                    Tensor grad = mse_loss_grad(x, recon);
                    for (double& g : grad.span()) g *= mse_scale;
                    const Tensor grad_latent = tae::decode_backward(model, dctx, grad);
                    tae::encode_backward(model, ectx, grad_latent);
                }
                sgd_step(all_params, config.learning_rate);
            }
        }
    }

    latents = tae::encode_all(model, data);
    result.q = soft_assign(latents, centroids, config.metric, config.alpha);
    check_assignment_matrix(result.q, "train_dtc: final q");
    result.labels = hard_assign(result.q);
    result.centroids = std::move(centroids);
    return result;
}

}  // namespace dtc::clustering
