#include "dtc/kernels.hpp"

#include <cstdint>

#include "dtc/threading.hpp"

namespace dtc::kernels {

void conv1d_forward(const double* x, std::size_t L, std::size_t Cin, const double* w,
                    std::size_t K, std::size_t F, const double* b, double* y) {
    const std::int64_t off = static_cast<std::int64_t>(K / 2);
    const std::int64_t n = static_cast<std::int64_t>(L);
    const int nt = threading::max_threads();
#pragma omp parallel for schedule(static) num_threads(nt) if (nt > 1)
    for (std::int64_t t = 0; t < n; ++t) {
        for (std::size_t f = 0; f < F; ++f) {
            double acc = b[f];
            for (std::size_t tau = 0; tau < K; ++tau) {
                const std::int64_t s = t + static_cast<std::int64_t>(tau) - off;
                if (s < 0 || s >= n) continue;
                const double* xs = x + static_cast<std::size_t>(s) * Cin;
                const double* wt = w + tau * Cin * F + f;
                for (std::size_t c = 0; c < Cin; ++c) {
                    acc += xs[c] * wt[c * F];
                }
            }
            y[static_cast<std::size_t>(t) * F + f] = acc;
        }
    }
}

void conv1d_backward(const double* x, std::size_t L, std::size_t Cin, const double* w,
                     std::size_t K, std::size_t F, const double* gy, double* dx, double* dw,
                     double* db) {
    const std::int64_t off = static_cast<std::int64_t>(K / 2);
    const std::int64_t n = static_cast<std::int64_t>(L);
    const int nt = threading::max_threads();

#pragma omp parallel for schedule(static) num_threads(nt) if (nt > 1)
    for (std::int64_t fi = 0; fi < static_cast<std::int64_t>(F); ++fi) {
        const std::size_t f = static_cast<std::size_t>(fi);
        double acc = 0.0;
        for (std::size_t t = 0; t < L; ++t) acc += gy[t * F + f];
        db[f] += acc;
    }

#pragma omp parallel for schedule(static) num_threads(nt) if (nt > 1)
    for (std::int64_t wi = 0; wi < static_cast<std::int64_t>(K * Cin * F); ++wi) {
        const std::size_t tau = static_cast<std::size_t>(wi) / (Cin * F);
        const std::size_t c = (static_cast<std::size_t>(wi) / F) % Cin;
        const std::size_t f = static_cast<std::size_t>(wi) % F;
        double acc = 0.0;
        for (std::int64_t t = 0; t < n; ++t) {
            const std::int64_t s = t + static_cast<std::int64_t>(tau) - off;
            if (s < 0 || s >= n) continue;
            acc += x[static_cast<std::size_t>(s) * Cin + c] * gy[static_cast<std::size_t>(t) * F + f];
        }
        dw[wi] += acc;
    }

#pragma omp parallel for schedule(static) num_threads(nt) if (nt > 1)
    for (std::int64_t s = 0; s < n; ++s) {
        for (std::size_t c = 0; c < Cin; ++c) {
            double acc = 0.0;
            for (std::size_t tau = 0; tau < K; ++tau) {
                const std::int64_t t = s - static_cast<std::int64_t>(tau) + off;
                if (t < 0 || t >= n) continue;
                const double* wt = w + tau * Cin * F + c * F;
                const double* gt = gy + static_cast<std::size_t>(t) * F;
                for (std::size_t f = 0; f < F; ++f) {
                    acc += wt[f] * gt[f];
                }
            }
            dx[static_cast<std::size_t>(s) * Cin + c] = acc;
        }
    }
}

void deconv1d_forward(const double* x, std::size_t T, std::size_t Cin, const double* w,
                      std::size_t K, std::size_t F, const double* b, double* y,
                      std::size_t Lout) {
    const std::int64_t off = static_cast<std::int64_t>(K / 2);
    const std::int64_t in_n = static_cast<std::int64_t>(T);
    const int nt = threading::max_threads();
#pragma omp parallel for schedule(static) num_threads(nt) if (nt > 1)
    for (std::int64_t s = 0; s < static_cast<std::int64_t>(Lout); ++s) {
        for (std::size_t f = 0; f < F; ++f) {
            double acc = b[f];
            for (std::size_t tau = 0; tau < K; ++tau) {
                const std::int64_t t = s - static_cast<std::int64_t>(tau) + off;
                if (t < 0 || t >= in_n) continue;
                const double* xt = x + static_cast<std::size_t>(t) * Cin;
                const double* wt = w + tau * Cin * F + f;
                for (std::size_t c = 0; c < Cin; ++c) {
                    acc += xt[c] * wt[c * F];
                }
            }
            y[static_cast<std::size_t>(s) * F + f] = acc;
        }
    }
}

void deconv1d_backward(const double* x, std::size_t T, std::size_t Cin, const double* w,
                       std::size_t K, std::size_t F, const double* gy, std::size_t Lout,
                       double* dx, double* dw, double* db) {
    const std::int64_t off = static_cast<std::int64_t>(K / 2);
    const std::int64_t in_n = static_cast<std::int64_t>(T);
    const std::int64_t out_n = static_cast<std::int64_t>(Lout);
    const int nt = threading::max_threads();

#pragma omp parallel for schedule(static) num_threads(nt) if (nt > 1)
    for (std::int64_t fi = 0; fi < static_cast<std::int64_t>(F); ++fi) {
        const std::size_t f = static_cast<std::size_t>(fi);
        double acc = 0.0;
        for (std::size_t s = 0; s < Lout; ++s) acc += gy[s * F + f];
        db[f] += acc;
    }

#pragma omp parallel for schedule(static) num_threads(nt) if (nt > 1)
    for (std::int64_t wi = 0; wi < static_cast<std::int64_t>(K * Cin * F); ++wi) {
        const std::size_t tau = static_cast<std::size_t>(wi) / (Cin * F);
        const std::size_t c = (static_cast<std::size_t>(wi) / F) % Cin;
        const std::size_t f = static_cast<std::size_t>(wi) % F;
        double acc = 0.0;
        for (std::int64_t s = 0; s < out_n; ++s) {
            const std::int64_t t = s - static_cast<std::int64_t>(tau) + off;
            if (t < 0 || t >= in_n) continue;
            acc += x[static_cast<std::size_t>(t) * Cin + c] * gy[static_cast<std::size_t>(s) * F + f];
        }
        dw[wi] += acc;
    }

#pragma omp parallel for schedule(static) num_threads(nt) if (nt > 1)
    for (std::int64_t t = 0; t < in_n; ++t) {
        for (std::size_t c = 0; c < Cin; ++c) {
            double acc = 0.0;
            for (std::size_t tau = 0; tau < K; ++tau) {
                const std::int64_t s = t + static_cast<std::int64_t>(tau) - off;
                if (s < 0 || s >= out_n) continue;
                const double* wt = w + tau * Cin * F + c * F;
                const double* gs = gy + static_cast<std::size_t>(s) * F;
                for (std::size_t f = 0; f < F; ++f) {
                    acc += wt[f] * gs[f];
                }
            }
            dx[static_cast<std::size_t>(t) * Cin + c] = acc;
        }
    }
}

}  // namespace dtc::kernels

namespace dtc::reference {

void conv1d_forward(const double* x, std::size_t L, std::size_t Cin, const double* w,
                    std::size_t K, std::size_t F, const double* b, double* y) {
    const std::int64_t off = static_cast<std::int64_t>(K / 2);
    const std::int64_t n = static_cast<std::int64_t>(L);
    for (std::int64_t t = 0; t < n; ++t) {
        for (std::size_t f = 0; f < F; ++f) {
            double acc = b[f];
            for (std::size_t tau = 0; tau < K; ++tau) {
                const std::int64_t s = t + static_cast<std::int64_t>(tau) - off;
                if (s < 0 || s >= n) continue;
                for (std::size_t c = 0; c < Cin; ++c) {
                    acc += x[static_cast<std::size_t>(s) * Cin + c] * w[(tau * Cin + c) * F + f];
                }
            }
            y[static_cast<std::size_t>(t) * F + f] = acc;
        }
    }
}

void conv1d_backward(const double* x, std::size_t L, std::size_t Cin, const double* w,
                     std::size_t K, std::size_t F, const double* gy, double* dx, double* dw,
                     double* db) {
    const std::int64_t off = static_cast<std::int64_t>(K / 2);
    const std::int64_t n = static_cast<std::int64_t>(L);
    for (std::size_t f = 0; f < F; ++f) {
        double acc = 0.0;
        for (std::size_t t = 0; t < L; ++t) acc += gy[t * F + f];
        db[f] += acc;
    }
    for (std::size_t tau = 0; tau < K; ++tau) {
        for (std::size_t c = 0; c < Cin; ++c) {
            for (std::size_t f = 0; f < F; ++f) {
                double acc = 0.0;
                for (std::int64_t t = 0; t < n; ++t) {
                    const std::int64_t s = t + static_cast<std::int64_t>(tau) - off;
                    if (s < 0 || s >= n) continue;
                    acc += x[static_cast<std::size_t>(s) * Cin + c] *
                           gy[static_cast<std::size_t>(t) * F + f];
                }
                dw[(tau * Cin + c) * F + f] += acc;
            }
        }
    }
    for (std::int64_t s = 0; s < n; ++s) {
        for (std::size_t c = 0; c < Cin; ++c) {
            double acc = 0.0;
            for (std::size_t tau = 0; tau < K; ++tau) {
                const std::int64_t t = s - static_cast<std::int64_t>(tau) + off;
                if (t < 0 || t >= n) continue;
                for (std::size_t f = 0; f < F; ++f) {
                    acc += w[(tau * Cin + c) * F + f] * gy[static_cast<std::size_t>(t) * F + f];
                }
            }
            dx[static_cast<std::size_t>(s) * Cin + c] = acc;
        }
    }
}

void deconv1d_forward(const double* x, std::size_t T, std::size_t Cin, const double* w,
                      std::size_t K, std::size_t F, const double* b, double* y,
                      std::size_t Lout) {
    const std::int64_t off = static_cast<std::int64_t>(K / 2);
    const std::int64_t in_n = static_cast<std::int64_t>(T);
    for (std::int64_t s = 0; s < static_cast<std::int64_t>(Lout); ++s) {
        for (std::size_t f = 0; f < F; ++f) {
            double acc = b[f];
            for (std::size_t tau = 0; tau < K; ++tau) {
                const std::int64_t t = s - static_cast<std::int64_t>(tau) + off;
                if (t < 0 || t >= in_n) continue;
                for (std::size_t c = 0; c < Cin; ++c) {
                    acc += x[static_cast<std::size_t>(t) * Cin + c] * w[(tau * Cin + c) * F + f];
                }
            }
            y[static_cast<std::size_t>(s) * F + f] = acc;
        }
    }
}

void deconv1d_backward(const double* x, std::size_t T, std::size_t Cin, const double* w,
                       std::size_t K, std::size_t F, const double* gy, std::size_t Lout,
                       double* dx, double* dw, double* db) {
    const std::int64_t off = static_cast<std::int64_t>(K / 2);
    const std::int64_t in_n = static_cast<std::int64_t>(T);
    const std::int64_t out_n = static_cast<std::int64_t>(Lout);
    for (std::size_t f = 0; f < F; ++f) {
        double acc = 0.0;
        for (std::size_t s = 0; s < Lout; ++s) acc += gy[s * F + f];
        db[f] += acc;
    }
    for (std::size_t tau = 0; tau < K; ++tau) {
        for (std::size_t c = 0; c < Cin; ++c) {
            for (std::size_t f = 0; f < F; ++f) {
                double acc = 0.0;
                for (std::int64_t s = 0; s < out_n; ++s) {
                    const std::int64_t t = s - static_cast<std::int64_t>(tau) + off;
                    if (t < 0 || t >= in_n) continue;
                    acc += x[static_cast<std::size_t>(t) * Cin + c] *
                           gy[static_cast<std::size_t>(s) * F + f];
                }
                dw[(tau * Cin + c) * F + f] += acc;
            }
        }
    }
    for (std::int64_t t = 0; t < in_n; ++t) {
        for (std::size_t c = 0; c < Cin; ++c) {
            double acc = 0.0;
            for (std::size_t tau = 0; tau < K; ++tau) {
                const std::int64_t s = t + static_cast<std::int64_t>(tau) - off;
                if (s < 0 || s >= out_n) continue;
                for (std::size_t f = 0; f < F; ++f) {
                    acc += w[(tau * Cin + c) * F + f] * gy[static_cast<std::size_t>(s) * F + f];
                }
            }
            dx[static_cast<std::size_t>(t) * Cin + c] = acc;
        }
    }
}

}  // namespace dtc::reference
