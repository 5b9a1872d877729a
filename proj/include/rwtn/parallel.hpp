#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rwtn {

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

/// Parallel loop over [0, n). Each index must write only its own output
/// slots; under that contract results are bit-identical to the serial loop
/// for any schedule or thread count.
template <class F>
void parallel_for(std::int64_t n, F&& f) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < n; ++i) f(i);
}

/// Same, but with dynamic scheduling for irregular per-index work.
template <class F>
void parallel_for_dynamic(std::int64_t n, F&& f) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
    for (std::int64_t i = 0; i < n; ++i) f(i);
}

inline std::int64_t block_count(std::int64_t n, std::int64_t block) {
    return (n + block - 1) / block;
}

/// Fixed-size block decomposition of [0, n). Blocks run in parallel;
/// f(block_index, begin, end) accumulates into per-block storage which the
/// caller merges serially in block order. The decomposition depends only on
/// (n, block), never on the thread count, so reductions built on it are
/// bit-reproducible.
template <class F>
void parallel_blocks(std::int64_t n, std::int64_t block, F&& f) {
    const std::int64_t nb = block_count(n, block);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t b = 0; b < nb; ++b) {
        const std::int64_t lo = b * block;
        const std::int64_t hi = lo + block < n ? lo + block : n;
        f(b, lo, hi);
    }
}

}  // namespace rwtn
