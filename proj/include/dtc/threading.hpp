#pragma once

namespace dtc::threading {

// Upper bound on OpenMP threads used by the parallel kernels. Defaults to
// the OpenMP runtime's limit (1 in serial builds). All kernels produce
// bit-identical results for any thread count; see tests/kernels_tests.cpp.
int max_threads();
void set_max_threads(int n);

}  // namespace dtc::threading
