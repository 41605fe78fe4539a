#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dtc/similarity.hpp"
#include "dtc/tae.hpp"
#include "dtc/tensor.hpp"

namespace dtc::clustering {

// Soft assignment of each latent sequence to each centroid under a
// Student's t kernel over the chosen similarity:
//   q_ij = (1 + d(z_i, w_j)/alpha)^(-(alpha+1)/2) / row normalizer.
// Rows are strictly positive and sum to 1.
Tensor soft_assign(const std::vector<std::vector<double>>& latents,
                   const std::vector<std::vector<double>>& centroids,
                   similarity::MetricKind metric, double alpha = 1.0);

// Sharpened target: p_ij = (q_ij^2 / f_j) / sum_j' (q_ij'^2 / f_j') with
// column masses f_j = sum_i q_ij.
Tensor target_distribution(const Tensor& q);

// Same, but with externally supplied column masses (used when a mini-batch
// target should be sharpened with full-dataset masses).
Tensor target_distribution(const Tensor& q, std::span<const double> column_mass);

// KL(P || Q) = sum_ij p_ij log(p_ij / q_ij); terms with p_ij = 0 contribute 0.
double kl_loss(const Tensor& p, const Tensor& q);

// Argmax cluster per row; ties go to the lowest index.
std::vector<int> hard_assign(const Tensor& q);

// Fraction of rows whose hard assignment differs.
double assignment_change_fraction(std::span<const int> previous, std::span<const int> current);

// Throws std::logic_error unless every row of the matrix is a probability
// distribution (entries in [0, 1], row sums within 1e-9 of 1).
void check_assignment_matrix(const Tensor& m, const char* what);

struct ClusteringGradients {
    std::vector<std::vector<double>> wrt_centroids;  // k x latent_length
    std::vector<std::vector<double>> wrt_latents;    // n x latent_length
};

// Exact gradient of kl_loss(P, soft_assign(Z, W)) w.r.t. the centroids W
// and the latents Z, with P held constant.
ClusteringGradients clustering_gradients(const std::vector<std::vector<double>>& latents,
                                         const std::vector<std::vector<double>>& centroids,
                                         const Tensor& p, similarity::MetricKind metric,
                                         double alpha = 1.0);

// Centroid initialization: complete-linkage cut at k over the latents, then
// per-cluster elementwise means.
std::vector<std::vector<double>> init_centroids(const std::vector<std::vector<double>>& latents,
                                                std::size_t k, similarity::MetricKind metric);

struct TrainConfig {
    std::size_t k = 2;
    similarity::MetricKind metric = similarity::MetricKind::EUCL;
    double alpha = 1.0;
    std::size_t max_epochs = 50;
    std::size_t batch_size = 64;
    double learning_rate = 0.1;      // SGD, both phases
    double convergence_tol = 0.001;  // stop when the assignment change fraction drops below
    bool joint = true;               // false freezes the autoencoder (centroid-only updates)
    double reinit_mass_fraction = 1e-4;  // cluster mass below this fraction of n is reseeded
    double divergence_limit = 1e6;       // abort when the KL loss exceeds this

    void validate() const;
};

struct EpochStats {
    std::size_t epoch = 0;
    double kl = 0.0;
    double mse = 0.0;
    double assignment_change = 0.0;
};

struct TrainResult {
    std::vector<std::vector<double>> centroids;
    Tensor q;  // final full-dataset soft assignment
    std::vector<int> labels;
    std::vector<EpochStats> history;
    bool converged = false;
};

// Self-training refinement of a pretrained autoencoder. Each epoch refreshes
// the target distribution from the full dataset, then alternates per batch
// between a KL step (centroids, and the encoder when joint) and a
// reconstruction step on the full autoencoder. Stops once the hard
// assignment change fraction falls below convergence_tol.
TrainResult train_dtc(tae::TaeModel& model, const dataio::Dataset& data,
                      const TrainConfig& config, std::uint64_t seed);

}  // namespace dtc::clustering
