#include "dtc/losses.hpp"

namespace dtc {

double mse_loss(const Tensor& x, const Tensor& x_rec) {
    check_same_shape(x, x_rec, "mse_loss");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - x_rec[i];
        acc += d * d;
    }
    return 0.5 * acc;
}

Tensor mse_loss_grad(const Tensor& x, const Tensor& x_rec) {
    check_same_shape(x, x_rec, "mse_loss");
    Tensor g(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = x_rec[i] - x[i];
    return g;
}

}  // namespace dtc
