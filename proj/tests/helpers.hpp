#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dtc/rng.hpp"
#include "dtc/tensor.hpp"

namespace testutil {

inline std::vector<double> random_vector(dtc::Rng& rng, std::size_t n, double stddev = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.gaussian(0.0, stddev);
    return v;
}

inline dtc::Tensor random_tensor(dtc::Rng& rng, std::vector<std::size_t> shape,
                                 double stddev = 1.0) {
    dtc::Tensor t(std::move(shape));
    for (double& x : t.span()) x = rng.gaussian(0.0, stddev);
    return t;
}

inline bool bitwise_equal(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) return false;
    }
    return true;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
        const double d = a[i] > b[i] ? a[i] - b[i] : b[i] - a[i];
        if (d > m) m = d;
    }
    return m;
}

}  // namespace testutil
