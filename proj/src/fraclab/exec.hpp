#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fraclab {

/// Execution policy for the hot kernels.  `serial` is the naive reference
/// implementation kept for testing; `parallel` uses OpenMP.  Map-style kernels
/// produce bit-identical results under both policies (the per-element work is
/// order-independent); reduction kernels use a fixed chunk decomposition under
/// `parallel` so the result does not depend on the thread count, at the price
/// of a <= 1e-12 relative difference against the naive serial sum.
enum class Exec { serial, parallel };

namespace detail {
inline constexpr int kReductionChunks = 256;
}

/// Elementwise loop over [0, n).  f(i) must be independent across i.
template <class F>
inline void par_for(Exec ex, std::ptrdiff_t n, F&& f) {
    if (ex == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) f(i);
        return;
#endif
    }
    for (std::ptrdiff_t i = 0; i < n; ++i) f(i);
}

/// Sum of term(i) over [0, n).  Under `parallel` the range is split into a
/// fixed number of chunks whose partial sums are combined in index order, so
/// the value is identical for every thread count.
template <class F>
inline double par_sum(Exec ex, std::ptrdiff_t n, F&& term) {
    if (n <= 0) return 0.0;
    if (ex == Exec::serial) {
        double s = 0.0;
        for (std::ptrdiff_t i = 0; i < n; ++i) s += term(i);
        return s;
    }
    const int nc = static_cast<int>(std::min<std::ptrdiff_t>(detail::kReductionChunks, n));
    std::vector<double> partial(nc, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int c = 0; c < nc; ++c) {
        const std::ptrdiff_t i0 = n * c / nc;
        const std::ptrdiff_t i1 = n * (c + 1) / nc;
        double s = 0.0;
        for (std::ptrdiff_t i = i0; i < i1; ++i) s += term(i);
        partial[c] = s;
    }
    double s = 0.0;
    for (int c = 0; c < nc; ++c) s += partial[c];
    return s;
}

/// Max of term(i) over [0, n); exact under any decomposition.
template <class F>
inline double par_max(Exec ex, std::ptrdiff_t n, F&& term) {
    if (n <= 0) return -1e300;
    if (ex == Exec::serial) {
        double m = -1e300;
        for (std::ptrdiff_t i = 0; i < n; ++i) m = std::max(m, term(i));
        return m;
    }
    const int nc = static_cast<int>(std::min<std::ptrdiff_t>(detail::kReductionChunks, n));
    std::vector<double> partial(nc, -1e300);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int c = 0; c < nc; ++c) {
        const std::ptrdiff_t i0 = n * c / nc;
        const std::ptrdiff_t i1 = n * (c + 1) / nc;
        double m = -1e300;
        for (std::ptrdiff_t i = i0; i < i1; ++i) m = std::max(m, term(i));
        partial[c] = m;
    }
    double m = -1e300;
    for (int c = 0; c < nc; ++c) m = std::max(m, partial[c]);
    return m;
}

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
    omp_set_num_threads(n);
#else
    (void)n;
#endif
}

}  // namespace fraclab
