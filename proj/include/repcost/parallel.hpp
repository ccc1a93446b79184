#pragma once

#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace repcost {

/// Whether the OpenMP backend is compiled in.
inline bool openmp_enabled() {
#ifdef _OPENMP
    return true;
#else
    return false;
#endif
}

/// Apply fn(i) for i in [0, n) and collect the results in index order.
///
/// With parallel = true the iterations run under OpenMP; each result is
/// written to its own slot, so the output (and any reduction done over it
/// afterwards, in index order) is bit-identical to the serial backend.
/// fn must not touch shared mutable state.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn, bool parallel = true) {
    std::vector<T> out(n);
#ifdef _OPENMP
    if (parallel && n > 1) {
#pragma omp parallel for schedule(dynamic)
        for (long long i = 0; i < (long long)n; ++i) out[(std::size_t)i] = fn((std::size_t)i);
        return out;
    }
#else
    (void)parallel;
#endif
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
}

/// Minimize fn(i) over i in [0, n); ties broken toward the smaller index,
/// so the result does not depend on the thread count.
template <typename Fn>
std::pair<double, std::size_t> parallel_argmin(std::size_t n, Fn&& fn, bool parallel = true) {
    std::vector<double> vals = parallel_map<double>(n, fn, parallel);
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (vals[i] < vals[best]) best = i;
    return {vals.empty() ? 0.0 : vals[best], best};
}

} // namespace repcost
