#include "dtc/threading.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dtc::threading {

namespace {
int g_max_threads = 0;  // 0 = use runtime default
}

int max_threads() {
    if (g_max_threads > 0) return g_max_threads;
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_max_threads(int n) { g_max_threads = n > 0 ? n : 0; }

}  // namespace dtc::threading
