#pragma once

#include <cstddef>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace hfltn {

// Runs body(i) for i in [0, n). With ExecutionMode::kParallel the iterations
// are distributed over an OpenMP team; each iteration must be independent and
// write only to its own slot. The serial mode is the reference path used by
// the equivalence tests and the benchmark.
enum class ExecutionMode { kSerial, kParallel };

template <typename Body>
void parallel_for(std::size_t n, ExecutionMode mode, Body&& body) {
#if defined(_OPENMP)
    if (mode == ExecutionMode::kParallel) {
        #pragma omp parallel for schedule(dynamic, 1)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            body(static_cast<std::size_t>(i));
        }
        return;
    }
#else
    (void)mode;
#endif
    for (std::size_t i = 0; i < n; ++i) {
        body(i);
    }
}

inline int hardware_threads() {
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace hfltn
