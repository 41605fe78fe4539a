#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dtc/dataio.hpp"
#include "dtc/layers.hpp"
#include "dtc/tensor.hpp"

namespace dtc::heatmap {

struct LocalizerConfig {
    std::size_t n_filters = 32;
    std::size_t kernel_size = 10;
    std::size_t pool_size = 4;
    std::size_t n_classes = 2;
    double leaky_slope = 0.01;
    std::size_t max_epochs = 60;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;     // Adam
    double target_accuracy = 0.95;   // stop early once training accuracy reaches this

    void validate() const;
};

// Small convolutional classifier whose global-average-pooled features feed a
// linear head; the head weights double as per-class activation weights for
// the localization maps. The head starts at zero so that relabeling the
// classes permutes the per-class maps without changing them.
struct LocalizerModel {
    LocalizerConfig config;
    std::size_t input_length = 0;
    Parameter conv1_kernels, conv1_bias;  // 1 -> F
    Parameter conv2_kernels, conv2_bias;  // F -> F
    Parameter head_weights;               // [n_classes x F]
    Parameter head_bias;                  // [n_classes]

    std::vector<Parameter*> parameters();
    std::size_t feature_length() const;  // time steps after both pooling stages
};

LocalizerModel init_localizer(const LocalizerConfig& config, std::size_t input_length,
                              std::uint64_t seed);

struct LocalizerTrace {
    Conv1dContext conv1, conv2;
    LeakyReluContext relu1, relu2;
    MaxPool1dContext pool1, pool2;
    Tensor features;  // [feature_length x F]
    std::vector<double> pooled;
};

std::vector<double> localizer_logits(const LocalizerModel& model, std::span<const double> x,
                                     LocalizerTrace* trace = nullptr);
int localizer_predict(const LocalizerModel& model, std::span<const double> x);

struct LocalizerTrainInfo {
    std::vector<double> epoch_loss;      // mean cross-entropy
    std::vector<double> epoch_accuracy;  // on the training data
    std::size_t epochs_run = 0;
    double final_accuracy = 0.0;
};

// Trains the localizer on cluster labels (values 0..n_classes-1). Requires
// at least two distinct labels.
LocalizerModel train_localizer(const dataio::Dataset& data, std::span<const int> labels,
                               const LocalizerConfig& config, std::uint64_t seed,
                               LocalizerTrainInfo* info = nullptr);

// Raw class activation map: the class-weighted feature sum, linearly
// interpolated back to input length. Comparable across classes.
std::vector<double> class_activation_map(const LocalizerModel& model, std::span<const double> x,
                                         std::size_t target_class);

// Min-max normalized activation map in [0, 1] (flat maps come back as
// zeros).
std::vector<double> generate_heatmap(const LocalizerModel& model, std::span<const double> x,
                                     std::size_t target_class);

}  // namespace dtc::heatmap
