#include "dtc/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dtc::similarity {

namespace {

void check_lengths(std::span<const double> a, std::span<const double> b, const char* where,
                   std::size_t min_len) {
    if (a.size() != b.size()) {
        throw std::invalid_argument(std::string(where) + ": length mismatch " +
                                    std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    if (a.size() < min_len) {
        throw std::invalid_argument(std::string(where) + ": sequences must have at least " +
                                    std::to_string(min_len) + " points");
    }
}

double mean_of(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

struct Standardized {
    std::vector<double> dev;     // x - mean
    std::vector<double> z;       // dev / scale
    double sigma = 0.0;          // population std
    double scale = 0.0;          // max(sigma, eps)
};

Standardized standardize(std::span<const double> x) {
    Standardized s;
    const std::size_t n = x.size();
    const double mean = mean_of(x);
    s.dev.resize(n);
    double acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        s.dev[t] = x[t] - mean;
        acc += s.dev[t] * s.dev[t];
    }
    s.sigma = std::sqrt(acc / static_cast<double>(n));
    s.scale = std::max(s.sigma, kEpsilon);
    s.z.resize(n);
    for (std::size_t t = 0; t < n; ++t) s.z[t] = s.dev[t] / s.scale;
    return s;
}

// d(CE)/dx_t, zero when CE vanishes.
std::vector<double> complexity_gradient(std::span<const double> x, double ce) {
    const std::size_t n = x.size();
    std::vector<double> g(n, 0.0);
    if (ce <= 0.0) return g;
    for (std::size_t t = 0; t < n; ++t) {
        double num = 0.0;
        if (t > 0) num += x[t] - x[t - 1];
        if (t + 1 < n) num -= x[t + 1] - x[t];
        g[t] = num / ce;
    }
    return g;
}

struct AcfWork {
    std::vector<double> dev;
    std::vector<double> coeffs;  // r(1..max_lag)
    double c0 = 0.0;
    double denom = 0.0;  // max(c0, eps)
};

AcfWork acf_work(std::span<const double> x, std::size_t max_lag) {
    AcfWork w;
    const std::size_t n = x.size();
    const double mean = mean_of(x);
    w.dev.resize(n);
    for (std::size_t t = 0; t < n; ++t) w.dev[t] = x[t] - mean;
    w.c0 = std::inner_product(w.dev.begin(), w.dev.end(), w.dev.begin(), 0.0);
    w.denom = std::max(w.c0, kEpsilon);
    w.coeffs.resize(max_lag);
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        double acc = 0.0;
        for (std::size_t t = 0; t + lag < n; ++t) acc += w.dev[t] * w.dev[t + lag];
        w.coeffs[lag - 1] = acc / w.denom;
    }
    return w;
}

// Accumulates sum_l weight[l] * d r_x(l) / dx_t into grad.
void acf_chain(std::span<const double> weights, const AcfWork& w, std::size_t n,
               std::vector<double>& grad) {
    const std::size_t max_lag = weights.size();
    const bool denom_active = w.c0 > kEpsilon;
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        const double wl = weights[lag - 1];
        if (wl == 0.0) continue;
        const double r = w.coeffs[lag - 1];
        double head = 0.0, tail = 0.0;
        for (std::size_t s = 0; s + lag < n; ++s) {
            head += w.dev[s];
            tail += w.dev[s + lag];
        }
        const double shift = (head + tail) / static_cast<double>(n);
        for (std::size_t t = 0; t < n; ++t) {
            double dc = -shift;
            if (t + lag < n) dc += w.dev[t + lag];
            if (t >= lag) dc += w.dev[t - lag];
            double dr = dc / w.denom;
            if (denom_active) dr -= r / w.denom * 2.0 * w.dev[t];
            grad[t] += wl * dr;
        }
    }
}

}  // namespace

MetricKind metric_from_string(const std::string& name) {
    if (name == "EUCL") return MetricKind::EUCL;
    if (name == "CID") return MetricKind::CID;
    if (name == "COR") return MetricKind::COR;
    if (name == "ACF") return MetricKind::ACF;
    throw std::invalid_argument("unknown metric '" + name + "' (expected EUCL|CID|COR|ACF)");
}

std::string to_string(MetricKind kind) {
    switch (kind) {
        case MetricKind::EUCL: return "EUCL";
        case MetricKind::CID: return "CID";
        case MetricKind::COR: return "COR";
        case MetricKind::ACF: return "ACF";
    }
    return "?";
}

double eucl(std::span<const double> a, std::span<const double> b) {
    check_lengths(a, b, "eucl", 1);
    double acc = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        const double d = a[t] - b[t];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double complexity_estimate(std::span<const double> x) {
    if (x.size() < 2) {
        throw std::invalid_argument("complexity_estimate: need at least 2 points");
    }
    double acc = 0.0;
    for (std::size_t t = 0; t + 1 < x.size(); ++t) {
        const double d = x[t + 1] - x[t];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double cid(std::span<const double> a, std::span<const double> b) {
    check_lengths(a, b, "cid", 2);
    const double ce_a = complexity_estimate(a);
    const double ce_b = complexity_estimate(b);
    const double cf = (std::max(ce_a, ce_b) + kEpsilon) / (std::min(ce_a, ce_b) + kEpsilon);
    return eucl(a, b) * cf;
}

double cor(std::span<const double> a, std::span<const double> b) {
    check_lengths(a, b, "cor", 2);
    const Standardized sa = standardize(a);
    const Standardized sb = standardize(b);
    double acc = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        const double d = sa.z[t] - sb.z[t];
        acc += d * d;
    }
    return std::min(std::sqrt(acc / static_cast<double>(a.size())), 2.0);
}

std::vector<double> standardized(std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("standardized: empty sequence");
    return standardize(x).z;
}

std::vector<double> acf_coefficients(std::span<const double> x, std::size_t max_lag) {
    if (max_lag == 0) throw std::invalid_argument("acf_coefficients: max_lag must be >= 1");
    if (x.size() < max_lag + 2) {
        throw std::invalid_argument("acf_coefficients: sequence length " +
                                    std::to_string(x.size()) + " too short for max_lag " +
                                    std::to_string(max_lag));
    }
    return acf_work(x, max_lag).coeffs;
}

double acf(std::span<const double> a, std::span<const double> b) {
    check_lengths(a, b, "acf", 3);
    const std::size_t max_lag = std::min(kMaxAcfLag, a.size() - 2);
    const AcfWork wa = acf_work(a, max_lag);
    const AcfWork wb = acf_work(b, max_lag);
    double acc = 0.0;
    for (std::size_t l = 0; l < max_lag; ++l) {
        const double d = wa.coeffs[l] - wb.coeffs[l];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double distance(MetricKind kind, std::span<const double> a, std::span<const double> b) {
    switch (kind) {
        case MetricKind::EUCL: return eucl(a, b);
        case MetricKind::CID: return cid(a, b);
        case MetricKind::COR: return cor(a, b);
        case MetricKind::ACF: return acf(a, b);
    }
    throw std::invalid_argument("distance: bad metric kind");
}

MetricGradient metric_gradient(MetricKind kind, std::span<const double> a,
                               std::span<const double> b) {
    const std::size_t n = a.size();
    MetricGradient g;
    g.wrt_a.assign(n, 0.0);
    g.wrt_b.assign(n, 0.0);

    switch (kind) {
        case MetricKind::EUCL: {
            const double d = eucl(a, b);
            if (d <= 0.0) return g;
            for (std::size_t t = 0; t < n; ++t) {
                const double v = (a[t] - b[t]) / d;
                g.wrt_a[t] = v;
                g.wrt_b[t] = -v;
            }
            return g;
        }
        case MetricKind::CID: {
            check_lengths(a, b, "cid", 2);
            const double ed = eucl(a, b);
            const double ce_a = complexity_estimate(a);
            const double ce_b = complexity_estimate(b);
            const double hi = std::max(ce_a, ce_b) + kEpsilon;
            const double lo = std::min(ce_a, ce_b) + kEpsilon;
            const double cf = hi / lo;
            const std::vector<double> gce_a = complexity_gradient(a, ce_a);
            const std::vector<double> gce_b = complexity_gradient(b, ce_b);
            // dCF/dCE for the max and min branch; ties treated as a on top.
            const bool a_is_max = ce_a >= ce_b;
            const double dcf_dmax = 1.0 / lo;
            const double dcf_dmin = -hi / (lo * lo);
            const double dcf_da = a_is_max ? dcf_dmax : dcf_dmin;
            const double dcf_db = a_is_max ? dcf_dmin : dcf_dmax;
            for (std::size_t t = 0; t < n; ++t) {
                double ged_a = 0.0, ged_b = 0.0;
                if (ed > 0.0) {
                    ged_a = (a[t] - b[t]) / ed;
                    ged_b = -ged_a;
                }
                g.wrt_a[t] = cf * ged_a + ed * dcf_da * gce_a[t];
                g.wrt_b[t] = cf * ged_b + ed * dcf_db * gce_b[t];
            }
            return g;
        }
        case MetricKind::COR: {
            check_lengths(a, b, "cor", 2);
            const Standardized sa = standardize(a);
            const Standardized sb = standardize(b);
            const double dn = static_cast<double>(n);
            std::vector<double> resid(n);
            double msq = 0.0, resid_mean = 0.0, rd_a = 0.0, rd_b = 0.0;
            for (std::size_t t = 0; t < n; ++t) {
                resid[t] = sa.z[t] - sb.z[t];
                msq += resid[t] * resid[t];
                resid_mean += resid[t];
                rd_a += resid[t] * sa.dev[t];
                rd_b += resid[t] * sb.dev[t];
            }
            msq /= dn;
            resid_mean /= dn;
            const double d = std::sqrt(msq);
            if (d <= 1e-12) return g;
            const double common = 1.0 / (d * dn);
            const bool sig_a = sa.sigma > kEpsilon;
            const bool sig_b = sb.sigma > kEpsilon;
            for (std::size_t t = 0; t < n; ++t) {
                double da = (resid[t] - resid_mean) / sa.scale;
                if (sig_a) da -= rd_a * sa.dev[t] / (dn * sa.sigma * sa.scale * sa.scale);
                g.wrt_a[t] = common * da;
                double db = -(resid[t] - resid_mean) / sb.scale;
                if (sig_b) db += rd_b * sb.dev[t] / (dn * sb.sigma * sb.scale * sb.scale);
                g.wrt_b[t] = common * db;
            }
            return g;
        }
        case MetricKind::ACF: {
            check_lengths(a, b, "acf", 3);
            const std::size_t max_lag = std::min(kMaxAcfLag, n - 2);
            const AcfWork wa = acf_work(a, max_lag);
            const AcfWork wb = acf_work(b, max_lag);
            double acc = 0.0;
            std::vector<double> diff(max_lag);
            for (std::size_t l = 0; l < max_lag; ++l) {
                diff[l] = wa.coeffs[l] - wb.coeffs[l];
                acc += diff[l] * diff[l];
            }
            const double d = std::sqrt(acc);
            if (d <= 0.0) return g;
            // d(dist)/dr = diff / dist; chain through each side's coefficients.
            std::vector<double> weights(max_lag);
            for (std::size_t l = 0; l < max_lag; ++l) weights[l] = diff[l] / d;
            acf_chain(weights, wa, n, g.wrt_a);
            for (std::size_t l = 0; l < max_lag; ++l) weights[l] = -diff[l] / d;
            acf_chain(weights, wb, n, g.wrt_b);
            return g;
        }
    }
    throw std::invalid_argument("metric_gradient: bad metric kind");
}

}  // namespace dtc::similarity
