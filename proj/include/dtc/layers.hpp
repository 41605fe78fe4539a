#pragma once

#include <cstddef>
#include <vector>

#include "dtc/rng.hpp"
#include "dtc/tensor.hpp"

namespace dtc {

// Each layer caches whatever its backward pass needs in a context struct;
// backward may only be called after the forward that filled the context.

// ---------------------------------------------------------------------------
// 1D convolution, zero-padded to preserve sequence length.
// x [L x Cin], kernels [K x Cin x F], bias [F] -> y [L x F].

struct Conv1dContext {
    Tensor input;
};

Tensor conv1d_forward(const Tensor& x, const Parameter& kernels, const Parameter& bias,
                      Conv1dContext* ctx = nullptr);

// Returns grad w.r.t. x; accumulates kernel/bias grads into the parameters.
Tensor conv1d_backward(const Conv1dContext& ctx, const Tensor& grad_out, Parameter& kernels,
                       Parameter& bias);

// ---------------------------------------------------------------------------
// Transposed convolution mapping feature width back to channel count.
// x [T x Cin], kernels [K x Cin x F] -> y [out_length x F]; out_length may
// differ from T (reconstruction is trimmed or zero-extended to it).

struct Deconv1dContext {
    Tensor input;
    std::size_t out_length = 0;
};

Tensor deconv1d_forward(const Tensor& x, const Parameter& kernels, const Parameter& bias,
                        std::size_t out_length, Deconv1dContext* ctx = nullptr);

Tensor deconv1d_backward(const Deconv1dContext& ctx, const Tensor& grad_out, Parameter& kernels,
                         Parameter& bias);

// ---------------------------------------------------------------------------
// Leaky ReLU, elementwise max(x, slope*x).

struct LeakyReluContext {
    Tensor input;
    double slope = 0.0;
};

Tensor leaky_relu_forward(const Tensor& x, double slope, LeakyReluContext* ctx = nullptr);
Tensor leaky_relu_backward(const LeakyReluContext& ctx, const Tensor& grad_out);

// ---------------------------------------------------------------------------
// Max pooling of size P along time; a partial final window is allowed, so
// the output length is ceil(L/P). Ties go to the earliest index.

struct MaxPool1dContext {
    std::size_t in_length = 0;
    std::size_t channels = 0;
    std::vector<std::size_t> argmax;  // flat [Tout x F] indices into the input time axis
};

Tensor maxpool1d_forward(const Tensor& x, std::size_t pool, MaxPool1dContext* ctx = nullptr);
Tensor maxpool1d_backward(const MaxPool1dContext& ctx, const Tensor& grad_out);

// ---------------------------------------------------------------------------
// Nearest-neighbour upsampling: each time step repeated P times.

struct Upsample1dContext {
    std::size_t in_length = 0;
    std::size_t channels = 0;
    std::size_t factor = 1;
};

Tensor upsample1d_forward(const Tensor& x, std::size_t factor, Upsample1dContext* ctx = nullptr);
Tensor upsample1d_backward(const Upsample1dContext& ctx, const Tensor& grad_out);

// ---------------------------------------------------------------------------
// Bidirectional LSTM. Standard gates (input/forget/output, tanh candidate,
// no peepholes), run in both time directions; the direction outputs are
// merged by elementwise mean, so the output is [T x H].

struct LstmDirParams {
    Parameter w_in;   // [F x 4H], gate order i|f|g|o
    Parameter w_rec;  // [H x 4H]
    Parameter bias;   // [4H]
};

struct BiLstmParams {
    std::size_t input_size = 0;
    std::size_t hidden_size = 0;
    LstmDirParams fwd;
    LstmDirParams bwd;

    BiLstmParams() = default;
    BiLstmParams(std::size_t input, std::size_t hidden);

    void init_gaussian(Rng& rng, double stddev);
    std::vector<Parameter*> parameters();
};

struct LstmDirContext {
    Tensor input;  // in this direction's time order
    Tensor gates;  // [T x 4H], post-activation
    Tensor cell;   // [T x H]
    Tensor cell_tanh;
    Tensor hidden;  // [T x H]
};

struct BiLstmContext {
    LstmDirContext fwd;
    LstmDirContext bwd;  // computed on the time-reversed input
};

Tensor bilstm_forward(const Tensor& x, const BiLstmParams& params, BiLstmContext* ctx = nullptr);
Tensor bilstm_backward(const BiLstmContext& ctx, const Tensor& grad_out, BiLstmParams& params);

}  // namespace dtc
