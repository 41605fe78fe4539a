#pragma once

#include <functional>
#include <span>

#include "dtc/tensor.hpp"

namespace dtc {

// Compares analytic gradients (already accumulated in params[i]->grad)
// against central finite differences of fn, which must re-evaluate the
// scalar objective from the current parameter values deterministically.
// Returns the maximum relative error |a - n| / max(1e-8, |a| + |n|).
// Elements where |a - n| <= noise_floor are skipped: a central difference
// of a double-precision objective cannot resolve gradients below roughly
// eps * |f| / step, so such disagreements carry no signal.
double finite_difference_check(const std::function<double()>& fn,
                               std::span<Parameter* const> params, double step = 1e-5,
                               double noise_floor = 0.0);

}  // namespace dtc
