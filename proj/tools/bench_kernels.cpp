// Timing comparison between the serial reference kernels and the OpenMP
// versions, plus the pairwise distance stage. Also cross-checks that both
// implementations agree bit-for-bit on every run.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "dtc/hierarchical.hpp"
#include "dtc/kernels.hpp"
#include "dtc/rng.hpp"
#include "dtc/threading.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<double> random_vector(std::size_t n, dtc::Rng& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.gaussian(0.0, 1.0);
    return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

template <typename Fn>
double time_best_of(int repeats, Fn&& fn) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto start = Clock::now();
        fn();
        best = std::min(best, seconds_since(start));
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t length = 4096;
    std::size_t filters = 50;
    std::size_t kernel = 10;
    int repeats = 5;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        auto next = [&]() -> std::size_t { return std::stoull(argv[++i]); };
        if (arg == "--length" && i + 1 < argc) {
            length = next();
        } else if (arg == "--filters" && i + 1 < argc) {
            filters = next();
        } else if (arg == "--repeats" && i + 1 < argc) {
            repeats = static_cast<int>(next());
        } else {
            std::fprintf(stderr, "usage: %s [--length N] [--filters F] [--repeats R]\n", argv[0]);
            return 2;
        }
    }

    dtc::Rng rng(7);
    const std::vector<double> x = random_vector(length, rng);
    const std::vector<double> w = random_vector(kernel * filters, rng);
    const std::vector<double> b = random_vector(filters, rng);
    const std::vector<double> gy = random_vector(length * filters, rng);

    std::vector<double> y_ref(length * filters), y_omp(length * filters);
    std::vector<double> dx_ref(length), dx_omp(length);
    std::vector<double> dw_ref(w.size()), dw_omp(w.size());
    std::vector<double> db_ref(filters), db_omp(filters);

    const int threads = dtc::threading::max_threads();
    std::printf("conv1d  L=%zu Cin=1 F=%zu K=%zu  (%d thread%s, best of %d)\n", length, filters,
                kernel, threads, threads == 1 ? "" : "s", repeats);

    const double fwd_ref = time_best_of(repeats, [&] {
        dtc::reference::conv1d_forward(x.data(), length, 1, w.data(), kernel, filters, b.data(),
                                       y_ref.data());
    });
    const double fwd_omp = time_best_of(repeats, [&] {
        dtc::kernels::conv1d_forward(x.data(), length, 1, w.data(), kernel, filters, b.data(),
                                     y_omp.data());
    });
    std::printf("  forward   reference %8.3f ms   openmp %8.3f ms   speedup %.2fx\n",
                fwd_ref * 1e3, fwd_omp * 1e3, fwd_ref / fwd_omp);

    const double bwd_ref = time_best_of(repeats, [&] {
        std::fill(dw_ref.begin(), dw_ref.end(), 0.0);
        std::fill(db_ref.begin(), db_ref.end(), 0.0);
        dtc::reference::conv1d_backward(x.data(), length, 1, w.data(), kernel, filters, gy.data(),
                                        dx_ref.data(), dw_ref.data(), db_ref.data());
    });
    const double bwd_omp = time_best_of(repeats, [&] {
        std::fill(dw_omp.begin(), dw_omp.end(), 0.0);
        std::fill(db_omp.begin(), db_omp.end(), 0.0);
        dtc::kernels::conv1d_backward(x.data(), length, 1, w.data(), kernel, filters, gy.data(),
                                      dx_omp.data(), dw_omp.data(), db_omp.data());
    });
    std::printf("  backward  reference %8.3f ms   openmp %8.3f ms   speedup %.2fx\n",
                bwd_ref * 1e3, bwd_omp * 1e3, bwd_ref / bwd_omp);

    bool ok = bitwise_equal(y_ref, y_omp) && bitwise_equal(dx_ref, dx_omp) &&
              bitwise_equal(dw_ref, dw_omp) && bitwise_equal(db_ref, db_omp);

    const std::size_t n_seq = 64;
    const std::size_t seq_len = 512;
    std::vector<std::vector<double>> sequences(n_seq);
    for (auto& s : sequences) s = random_vector(seq_len, rng);

    std::printf("pairwise distances  n=%zu L=%zu\n", n_seq, seq_len);
    for (const auto metric : {dtc::similarity::MetricKind::EUCL, dtc::similarity::MetricKind::CID,
                              dtc::similarity::MetricKind::COR, dtc::similarity::MetricKind::ACF}) {
        dtc::hierarchical::DistanceMatrix parallel_result;
        const double t_par = time_best_of(repeats, [&] {
            parallel_result = dtc::hierarchical::pairwise_distances(sequences, metric);
        });

        dtc::threading::set_max_threads(1);
        dtc::hierarchical::DistanceMatrix serial_result;
        const double t_ser = time_best_of(repeats, [&] {
            serial_result = dtc::hierarchical::pairwise_distances(sequences, metric);
        });
        dtc::threading::set_max_threads(threads);

        bool same = serial_result.size() == parallel_result.size();
        for (std::size_t i = 0; same && i < serial_result.size(); ++i) {
            for (std::size_t j = 0; same && j < serial_result.size(); ++j) {
                same = serial_result.at(i, j) == parallel_result.at(i, j);
            }
        }
        ok = ok && same;
        std::printf("  %-4s      1 thread  %8.3f ms   %d thread%s %8.3f ms   speedup %.2fx\n",
                    dtc::similarity::to_string(metric).c_str(), t_ser * 1e3, threads,
                    threads == 1 ? " " : "s", t_par * 1e3, t_ser / t_par);
    }

    std::printf("bitwise agreement: %s\n", ok ? "yes" : "NO");
    return ok ? 0 : 1;
}
