#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dtc/dataio.hpp"
#include "dtc/layers.hpp"
#include "dtc/tensor.hpp"

namespace dtc::tae {

struct TaeConfig {
    std::size_t input_length = 0;
    std::size_t input_channels = 1;
    std::size_t n_filters = 50;
    std::size_t kernel_size = 10;
    std::size_t pool_size = 10;
    std::vector<std::size_t> lstm_units = {50, 1};
    double leaky_slope = 0.01;

    // Latent length after the single pooling stage.
    std::size_t latent_length() const {
        return (input_length + pool_size - 1) / pool_size;
    }
    void validate() const;
};

// Autoencoder for univariate sequences. Encoder: conv1d -> leaky ReLU ->
// max pool -> stacked BiLSTMs ending in one unit, so the latent is itself a
// short univariate sequence. Decoder: upsample back to the input rate ->
// single transposed convolution.
struct TaeModel {
    TaeConfig config;
    Parameter conv_kernels;  // [K x Cin x F]
    Parameter conv_bias;     // [F]
    std::vector<BiLstmParams> lstms;
    Parameter deconv_kernels;  // [K x 1 x 1]
    Parameter deconv_bias;     // [1]
    bool pretrained = false;

    std::vector<Parameter*> parameters();
    std::vector<Parameter*> encoder_parameters();
    void zero_grads();
};

TaeModel init_tae(const TaeConfig& config, std::uint64_t seed);

struct EncodeContext {
    Conv1dContext conv;
    LeakyReluContext relu;
    MaxPool1dContext pool;
    std::vector<BiLstmContext> lstms;
};

struct DecodeContext {
    Upsample1dContext upsample;
    Deconv1dContext deconv;
};

// Maps [L x 1] input to the [Tl x 1] latent. Pass a context to enable the
// matching backward call.
Tensor encode(const TaeModel& model, const Tensor& x, EncodeContext* ctx = nullptr);

// Maps the [Tl x 1] latent back to an [L x 1] reconstruction.
Tensor decode(const TaeModel& model, const Tensor& latent, DecodeContext* ctx = nullptr);

// Accumulates encoder parameter gradients from the gradient at the latent;
// returns the gradient at the input.
Tensor encode_backward(TaeModel& model, const EncodeContext& ctx, const Tensor& grad_latent);

// Accumulates decoder parameter gradients from the gradient at the
// reconstruction; returns the gradient at the latent.
Tensor decode_backward(TaeModel& model, const DecodeContext& ctx, const Tensor& grad_output);

// Convenience wrappers for plain sequences.
std::vector<double> encode_sequence(const TaeModel& model, std::span<const double> sequence);
std::vector<std::vector<double>> encode_all(const TaeModel& model, const dataio::Dataset& data);

// Mean reconstruction loss 0.5 * ||x - x'||^2 over the dataset.
double reconstruction_loss(const TaeModel& model, const dataio::Dataset& data);

struct PretrainOptions {
    std::size_t epochs = 10;
    std::size_t batch_size = 64;
    double learning_rate = 1e-3;  // Adam
};

// Reconstruction-only training; returns the per-epoch mean loss and marks
// the model pretrained.
std::vector<double> pretrain(TaeModel& model, const dataio::Dataset& data,
                             const PretrainOptions& options, std::uint64_t seed);

}  // namespace dtc::tae
