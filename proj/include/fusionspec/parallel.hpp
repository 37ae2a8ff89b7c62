#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fusionspec {

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

// Static-schedule parallel loop. Every iteration must write only its own
// slots so the result is identical for any thread count.
template <typename F>
void parallel_for(std::int64_t begin, std::int64_t end, F&& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = begin; i < end; ++i) body(i);
}

}  // namespace fusionspec
