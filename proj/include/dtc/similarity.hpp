#pragma once

#include <span>
#include <string>
#include <vector>

namespace dtc::similarity {

enum class MetricKind { EUCL, CID, COR, ACF };

MetricKind metric_from_string(const std::string& name);
std::string to_string(MetricKind kind);

// Stabilizer applied to complexity factors, correlation scales and ACF
// denominators so constant sequences stay finite.
inline constexpr double kEpsilon = 1e-8;

// Lag cap for the ACF distance; the effective lag count is min(25, N-2).
inline constexpr std::size_t kMaxAcfLag = 25;

double eucl(std::span<const double> a, std::span<const double> b);

// sqrt(sum of squared one-step differences); requires N >= 2.
double complexity_estimate(std::span<const double> x);

// Euclidean distance scaled by the complexity factor
// (max(CE) + eps) / (min(CE) + eps).
double cid(std::span<const double> a, std::span<const double> b);

// sqrt(2 (1 - rho)) with a stabilized Pearson rho, computed as the RMS
// difference of the per-sequence standardized signals. Range [0, 2].
double cor(std::span<const double> a, std::span<const double> b);

// (x - mean) / max(sigma, eps), the standardization used by cor. Exposed so
// batch callers can cache it per sequence.
std::vector<double> standardized(std::span<const double> x);

// Autocorrelation coefficients r(1..max_lag); requires N >= max_lag + 2.
std::vector<double> acf_coefficients(std::span<const double> x, std::size_t max_lag);

// Euclidean distance between the two ACF coefficient vectors
// (uniform weights, max_lag = min(25, N-2)).
double acf(std::span<const double> a, std::span<const double> b);

double distance(MetricKind kind, std::span<const double> a, std::span<const double> b);

struct MetricGradient {
    std::vector<double> wrt_a;
    std::vector<double> wrt_b;
};

// Exact gradient of the selected metric w.r.t. both arguments. At a
// coincident point (distance 0) the gradient is defined as zero.
MetricGradient metric_gradient(MetricKind kind, std::span<const double> a,
                               std::span<const double> b);

}  // namespace dtc::similarity
