#include "dtc/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace dtc {

double finite_difference_check(const std::function<double()>& fn,
                               std::span<Parameter* const> params, double step,
                               double noise_floor) {
    double max_rel = 0.0;
    for (Parameter* p : params) {
        for (std::size_t i = 0; i < p->size(); ++i) {
            const double saved = p->value[i];
            p->value[i] = saved + step;
            const double up = fn();
            p->value[i] = saved - step;
            const double down = fn();
            p->value[i] = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double analytic = p->grad[i];
            if (std::abs(analytic - numeric) <= noise_floor) continue;
            const double rel = std::abs(analytic - numeric) /
                               std::max(1e-8, std::abs(analytic) + std::abs(numeric));
            max_rel = std::max(max_rel, rel);
        }
    }
    return max_rel;
}

}  // namespace dtc
