#include "dtc/tae.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dtc/losses.hpp"
#include "dtc/optim.hpp"
#include "dtc/rng.hpp"
#include "dtc/threading.hpp"

namespace dtc::tae {

namespace {
constexpr double kInitStdDev = 0.01;
}

void TaeConfig::validate() const {
    if (input_length < 2) throw std::invalid_argument("tae: input_length must be >= 2");
    if (input_channels != 1) throw std::invalid_argument("tae: only univariate input is supported");
    if (n_filters == 0) throw std::invalid_argument("tae: n_filters must be >= 1");
    if (kernel_size == 0 || kernel_size > input_length) {
        throw std::invalid_argument("tae: kernel_size must be in [1, input_length]");
    }
    if (pool_size == 0) throw std::invalid_argument("tae: pool_size must be >= 1");
    if (latent_length() < 2) {
        throw std::invalid_argument("tae: pool_size leaves a latent shorter than 2");
    }
    if (lstm_units.empty() || lstm_units.back() != 1) {
        throw std::invalid_argument("tae: lstm_units must end with a single unit");
    }
    for (std::size_t units : lstm_units) {
        if (units == 0) throw std::invalid_argument("tae: lstm_units must be positive");
    }
    if (leaky_slope < 0.0 || leaky_slope >= 1.0) {
        throw std::invalid_argument("tae: leaky_slope must be in [0, 1)");
    }
}

std::vector<Parameter*> TaeModel::parameters() {
    std::vector<Parameter*> params = encoder_parameters();
    params.push_back(&deconv_kernels);
    params.push_back(&deconv_bias);
    return params;
}

std::vector<Parameter*> TaeModel::encoder_parameters() {
    std::vector<Parameter*> params = {&conv_kernels, &conv_bias};
    for (BiLstmParams& lstm : lstms) {
        for (Parameter* p : lstm.parameters()) params.push_back(p);
    }
    return params;
}

void TaeModel::zero_grads() {
    for (Parameter* p : parameters()) p->zero_grad();
}

TaeModel init_tae(const TaeConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(seed);

    TaeModel model;
    model.config = config;
    model.conv_kernels =
        Parameter(Tensor({config.kernel_size, config.input_channels, config.n_filters}));
    model.conv_bias = Parameter(Tensor({config.n_filters}));
    for (double& w : model.conv_kernels.value.span()) w = rng.gaussian(0.0, kInitStdDev);

    std::size_t width = config.n_filters;
    for (std::size_t units : config.lstm_units) {
        BiLstmParams lstm(width, units);
        lstm.init_gaussian(rng, kInitStdDev);
        model.lstms.push_back(std::move(lstm));
        width = units;
    }

    model.deconv_kernels = Parameter(Tensor({config.kernel_size, std::size_t{1}, std::size_t{1}}));
    model.deconv_bias = Parameter(Tensor({std::size_t{1}}));
    for (double& w : model.deconv_kernels.value.span()) w = rng.gaussian(0.0, kInitStdDev);
    return model;
}

Tensor encode(const TaeModel& model, const Tensor& x, EncodeContext* ctx) {
    const TaeConfig& cfg = model.config;
    if (x.shape() != std::vector<std::size_t>{cfg.input_length, cfg.input_channels}) {
        throw std::invalid_argument("encode: input shape " + x.shape_string() +
                                    " does not match configured [" +
                                    std::to_string(cfg.input_length) + " x " +
                                    std::to_string(cfg.input_channels) + "]");
    }

    EncodeContext local;
    EncodeContext& c = ctx ? *ctx : local;
    c.lstms.assign(model.lstms.size(), {});

    Tensor h = conv1d_forward(x, model.conv_kernels, model.conv_bias, &c.conv);
    h = leaky_relu_forward(h, cfg.leaky_slope, &c.relu);
    h = maxpool1d_forward(h, cfg.pool_size, &c.pool);
    for (std::size_t i = 0; i < model.lstms.size(); ++i) {
        h = bilstm_forward(h, model.lstms[i], &c.lstms[i]);
    }
    return h;
}

Tensor decode(const TaeModel& model, const Tensor& latent, DecodeContext* ctx) {
    const TaeConfig& cfg = model.config;
    if (latent.shape() != std::vector<std::size_t>{cfg.latent_length(), std::size_t{1}}) {
        throw std::invalid_argument("decode: latent shape " + latent.shape_string() +
                                    " does not match configured [" +
                                    std::to_string(cfg.latent_length()) + " x 1]");
    }

    DecodeContext local;
    DecodeContext& c = ctx ? *ctx : local;
    Tensor h = upsample1d_forward(latent, cfg.pool_size, &c.upsample);
    return deconv1d_forward(h, model.deconv_kernels, model.deconv_bias, cfg.input_length,
                            &c.deconv);
}

Tensor encode_backward(TaeModel& model, const EncodeContext& ctx, const Tensor& grad_latent) {
    Tensor g = grad_latent;
    for (std::size_t i = model.lstms.size(); i-- > 0;) {
        g = bilstm_backward(ctx.lstms[i], g, model.lstms[i]);
    }
    g = maxpool1d_backward(ctx.pool, g);
    g = leaky_relu_backward(ctx.relu, g);
    return conv1d_backward(ctx.conv, g, model.conv_kernels, model.conv_bias);
}

Tensor decode_backward(TaeModel& model, const DecodeContext& ctx, const Tensor& grad_output) {
    Tensor g = deconv1d_backward(ctx.deconv, grad_output, model.deconv_kernels, model.deconv_bias);
    return upsample1d_backward(ctx.upsample, g);
}

std::vector<double> encode_sequence(const TaeModel& model, std::span<const double> sequence) {
    Tensor x({sequence.size(), 1});
    std::copy(sequence.begin(), sequence.end(), x.data());
    Tensor z = encode(model, x);
    return {z.data(), z.data() + z.size()};
}

std::vector<std::vector<double>> encode_all(const TaeModel& model, const dataio::Dataset& data) {
    if (data.length != model.config.input_length) {
        throw std::invalid_argument("encode_all: dataset length does not match the model");
    }
    std::vector<std::vector<double>> latents(data.n);
    const auto n = static_cast<std::ptrdiff_t>(data.n);
    const int nt = threading::max_threads();
#pragma omp parallel for schedule(static) num_threads(nt) if (nt > 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        latents[i] = encode_sequence(model, data.sequence(i));
    }
    return latents;
}

double reconstruction_loss(const TaeModel& model, const dataio::Dataset& data) {
    if (data.n == 0) throw std::invalid_argument("reconstruction_loss: empty dataset");
    std::vector<double> losses(data.n, 0.0);
    const auto n = static_cast<std::ptrdiff_t>(data.n);
    const int nt = threading::max_threads();
#pragma omp parallel for schedule(static) num_threads(nt) if (nt > 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        auto seq = data.sequence(i);
        Tensor x({seq.size(), 1});
        std::copy(seq.begin(), seq.end(), x.data());
        const Tensor recon = decode(model, encode(model, x));
        losses[i] = mse_loss(x, recon);
    }
    double total = 0.0;
    for (double l : losses) total += l;
    return total / static_cast<double>(data.n);
}

std::vector<double> pretrain(TaeModel& model, const dataio::Dataset& data,
                             const PretrainOptions& options, std::uint64_t seed) {
    if (data.n == 0) throw std::invalid_argument("pretrain: empty dataset");
    if (data.length != model.config.input_length) {
        throw std::invalid_argument("pretrain: dataset length does not match the model");
    }
    if (options.epochs == 0 || options.batch_size == 0) {
        throw std::invalid_argument("pretrain: epochs and batch_size must be >= 1");
    }

    Rng rng(seed);
    Adam optimizer(options.learning_rate);
    const std::vector<Parameter*> params = model.parameters();

    std::vector<std::size_t> order(data.n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::vector<double> epoch_losses;
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < data.n; start += options.batch_size) {
            const std::size_t end = std::min(data.n, start + options.batch_size);
            // Descend on the squared error averaged over batch and time.
            const double scale =
                1.0 / (static_cast<double>(end - start) * static_cast<double>(data.length));
            model.zero_grads();
            for (std::size_t b = start; b < end; ++b) {
                auto seq = data.sequence(order[b]);
                Tensor x({seq.size(), 1});
                std::copy(seq.begin(), seq.end(), x.data());

                EncodeContext ectx;
                DecodeContext dctx;
                const Tensor latent = encode(model, x, &ectx);
                const Tensor recon = decode(model, latent, &dctx);
                epoch_loss += mse_loss(x, recon);

                Tensor grad = mse_loss_grad(x, recon);
                for (double& g : grad.span()) g *= scale;
                const Tensor grad_latent = decode_backward(model, dctx, grad);
                encode_backward(model, ectx, grad_latent);
            }
            optimizer.step(params);
        }
        epoch_losses.push_back(epoch_loss / static_cast<double>(data.n));
    }
    model.pretrained = true;
    return epoch_losses;
}

}  // namespace dtc::tae
