#pragma once

#include "dtc/tensor.hpp"

namespace dtc {

// Half squared error, 0.5 * sum((x - x_rec)^2). Callers average over batch
// elements themselves.
double mse_loss(const Tensor& x, const Tensor& x_rec);

// Gradient of mse_loss w.r.t. x_rec, i.e. (x_rec - x).
Tensor mse_loss_grad(const Tensor& x, const Tensor& x_rec);

}  // namespace dtc
