#pragma once

// Data-parallel kernels. Each kernel has an OpenMP path and a plain serial
// path; the serial path is the reference the tests and benchmark compare to.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace shipnet {

enum class Exec { Serial, Parallel };

// Block size of the parallel reductions. The partition depends only on n, so
// a parallel sum is bit-identical for any thread count.
inline constexpr std::size_t kReduceBlock = 4096;

template <class Term>
double sum_terms(std::size_t n, Term term, Exec exec) {
    if (exec == Exec::Serial || n < 2 * kReduceBlock) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += term(i);
        return s;
    }
    const std::size_t blocks = (n + kReduceBlock - 1) / kReduceBlock;
    std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < static_cast<std::int64_t>(blocks); ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kReduceBlock;
        const std::size_t hi = std::min(n, lo + kReduceBlock);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += term(i);
        partial[static_cast<std::size_t>(b)] = s;
    }
    double s = 0.0;
    for (double p : partial) s += p;
    return s;
}

// Counts values per bin; `bin_of` maps a value to [0, bins).
template <class BinOf>
std::vector<std::uint64_t> count_bins(std::span<const double> values, std::size_t bins, BinOf bin_of, Exec exec) {
    std::vector<std::uint64_t> counts(bins, 0);
    if (exec == Exec::Serial || values.size() < 2 * kReduceBlock) {
        for (double v : values) ++counts[bin_of(v)];
        return counts;
    }
#pragma omp parallel
    {
        std::vector<std::uint64_t> local(bins, 0);
#pragma omp for schedule(static) nowait
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(values.size()); ++i)
            ++local[bin_of(values[static_cast<std::size_t>(i)])];
#pragma omp critical
        for (std::size_t b = 0; b < bins; ++b) counts[b] += local[b];
    }
    return counts;
}

inline int worker_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace shipnet
