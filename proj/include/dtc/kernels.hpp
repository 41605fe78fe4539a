#pragma once

#include <cstddef>

namespace dtc::kernels {

// Hot inner loops of the layer stack, parallelized with OpenMP over
// independent output elements. Each output entry is reduced serially in a
// fixed order, so results are bit-identical to the serial reference for any
// thread count.
//
// Layouts (row-major):
//   x  [L x Cin]       sequence
//   w  [K x Cin x F]   kernels
//   b  [F]             bias
//   y  [L x F]         output
//
// Same-length zero-padded convolution with center offset K/2.

void conv1d_forward(const double* x, std::size_t L, std::size_t Cin, const double* w,
                    std::size_t K, std::size_t F, const double* b, double* y);

// dx has shape [L x Cin]; dw/db are accumulated (+=) into caller buffers.
void conv1d_backward(const double* x, std::size_t L, std::size_t Cin, const double* w,
                     std::size_t K, std::size_t F, const double* gy, double* dx, double* dw,
                     double* db);

// Transposed counterpart (stride 1, same center alignment). Input length T,
// output length Lout; indices outside [0, T) contribute nothing, which
// covers both trimming (Lout < T) and zero-padding (Lout > T).
void deconv1d_forward(const double* x, std::size_t T, std::size_t Cin, const double* w,
                      std::size_t K, std::size_t F, const double* b, double* y,
                      std::size_t Lout);

void deconv1d_backward(const double* x, std::size_t T, std::size_t Cin, const double* w,
                       std::size_t K, std::size_t F, const double* gy, std::size_t Lout,
                       double* dx, double* dw, double* db);

}  // namespace dtc::kernels

namespace dtc::reference {

// Naive single-threaded implementations of the kernels above, kept as the
// comparison baseline for tests and the benchmark tool.

void conv1d_forward(const double* x, std::size_t L, std::size_t Cin, const double* w,
                    std::size_t K, std::size_t F, const double* b, double* y);

void conv1d_backward(const double* x, std::size_t L, std::size_t Cin, const double* w,
                     std::size_t K, std::size_t F, const double* gy, double* dx, double* dw,
                     double* db);

void deconv1d_forward(const double* x, std::size_t T, std::size_t Cin, const double* w,
                      std::size_t K, std::size_t F, const double* b, double* y,
                      std::size_t Lout);

void deconv1d_backward(const double* x, std::size_t T, std::size_t Cin, const double* w,
                       std::size_t K, std::size_t F, const double* gy, std::size_t Lout,
                       double* dx, double* dw, double* db);

}  // namespace dtc::reference
