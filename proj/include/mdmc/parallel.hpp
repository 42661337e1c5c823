#pragma once

#include <cstddef>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mdmc {

// Execution mode for the data-parallel sweeps (pinning sweeps, per-edge
// congestion accumulation, Monte Carlo replicas, suite cells).  The serial
// path is the reference implementation; tests assert both paths produce
// identical results.  Results are stored per index and reduced in index
// order, so the parallel path is deterministic as well.
enum class ExecMode { Serial, OpenMP };

ExecMode& exec_mode();

inline int worker_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

template <typename F>
void parallel_for(std::size_t n, F&& body, ExecMode mode) {
    if (mode == ExecMode::OpenMP) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
        for (long long i = 0; i < static_cast<long long>(n); ++i) body(static_cast<std::size_t>(i));
        return;
#endif
    }
    for (std::size_t i = 0; i < n; ++i) body(i);
}

template <typename F>
void parallel_for(std::size_t n, F&& body) {
    parallel_for(n, body, exec_mode());
}

}  // namespace mdmc
