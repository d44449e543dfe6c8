#pragma once

#include <algorithm>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dimest {

// Execution policy for the data-parallel kernels.  Every kernel that takes
// an Exec has a serial reference path; tests compare the two and the bench
// tool times them against each other.
enum class Exec { serial, parallel };

namespace par {

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

template <class Fn>
void for_each_index(Exec exec, std::int64_t n, Fn&& fn) {
    if (exec == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
#endif
    }
    for (std::int64_t i = 0; i < n; ++i) fn(i);
}

// Max-reduction over [0, n).  Floating max is order-independent, so the
// parallel path returns bit-identical results to the serial one.
template <class Fn>
double max_over(Exec exec, std::int64_t n, Fn&& fn, double init = 0.0) {
    double best = init;
    if (exec == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(max : best)
        for (std::int64_t i = 0; i < n; ++i) best = std::max(best, fn(i));
        return best;
#endif
    }
    for (std::int64_t i = 0; i < n; ++i) best = std::max(best, fn(i));
    return best;
}

} // namespace par
} // namespace dimest
