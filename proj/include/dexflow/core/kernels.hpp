#pragma once

#include <cmath>
#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dexflow::kernels {

// Dense kernels used by the tape. Each kernel has a serial reference
// (serial namespace) and an OpenMP version parallelized over independent
// output elements or rows. Reductions never cross threads, so results are
// bit-identical for every thread count; tests assert this and the bench
// target compares timings.

inline constexpr std::size_t kParallelCutoff = 16384;  // elements

namespace serial {

template <typename T>
void matmul(const T* a, const T* b, T* out, int n, int k, int m) {
    for (int i = 0; i < n; ++i) {
        T* orow = out + static_cast<std::size_t>(i) * m;
        for (int j = 0; j < m; ++j) orow[j] = T(0);
        const T* arow = a + static_cast<std::size_t>(i) * k;
        for (int p = 0; p < k; ++p) {
            const T av = arow[p];
            const T* brow = b + static_cast<std::size_t>(p) * m;
            for (int j = 0; j < m; ++j) orow[j] += av * brow[j];
        }
    }
}

template <typename T, typename F>
void map(const T* a, T* out, std::size_t n, F f) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(a[i]);
}

template <typename T, typename F>
void zip(const T* a, const T* b, T* out, std::size_t n, F f) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(a[i], b[i]);
}

template <typename T>
void softmax_rows(const T* a, T* out, int rows, int cols) {
    for (int i = 0; i < rows; ++i) {
        const T* x = a + static_cast<std::size_t>(i) * cols;
        T* y = out + static_cast<std::size_t>(i) * cols;
        T mx = x[0];
        for (int j = 1; j < cols; ++j) mx = x[j] > mx ? x[j] : mx;
        T sum = T(0);
        for (int j = 0; j < cols; ++j) {
            y[j] = std::exp(x[j] - mx);
            sum += y[j];
        }
        const T inv = T(1) / sum;
        for (int j = 0; j < cols; ++j) y[j] *= inv;
    }
}

template <typename T>
void layer_norm_rows(const T* a, T* out, int rows, int cols, T eps) {
    for (int i = 0; i < rows; ++i) {
        const T* x = a + static_cast<std::size_t>(i) * cols;
        T* y = out + static_cast<std::size_t>(i) * cols;
        T mean = T(0);
        for (int j = 0; j < cols; ++j) mean += x[j];
        mean /= T(cols);
        T var = T(0);
        for (int j = 0; j < cols; ++j) {
            const T d = x[j] - mean;
            var += d * d;
        }
        var /= T(cols);
        const T inv = T(1) / std::sqrt(var + eps);
        for (int j = 0; j < cols; ++j) y[j] = (x[j] - mean) * inv;
    }
}

}  // namespace serial

template <typename T>
void matmul(const T* a, const T* b, T* out, int n, int k, int m) {
#ifdef _OPENMP
    const std::size_t work = std::size_t(n) * k * m;
#pragma omp parallel for schedule(static) if (work > kParallelCutoff && n > 1)
    for (int i = 0; i < n; ++i) {
        T* orow = out + static_cast<std::size_t>(i) * m;
        for (int j = 0; j < m; ++j) orow[j] = T(0);
        const T* arow = a + static_cast<std::size_t>(i) * k;
        for (int p = 0; p < k; ++p) {
            const T av = arow[p];
            const T* brow = b + static_cast<std::size_t>(p) * m;
            for (int j = 0; j < m; ++j) orow[j] += av * brow[j];
        }
    }
#else
    serial::matmul(a, b, out, n, k, m);
#endif
}

template <typename T, typename F>
void map(const T* a, T* out, std::size_t n, F f) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n > kParallelCutoff)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) out[i] = f(a[i]);
#else
    serial::map(a, out, n, f);
#endif
}

template <typename T, typename F>
void zip(const T* a, const T* b, T* out, std::size_t n, F f) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n > kParallelCutoff)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) out[i] = f(a[i], b[i]);
#else
    serial::zip(a, b, out, n, f);
#endif
}

template <typename T>
void softmax_rows(const T* a, T* out, int rows, int cols) {
#ifdef _OPENMP
    const std::size_t work = std::size_t(rows) * cols;
#pragma omp parallel for schedule(static) if (work > kParallelCutoff && rows > 1)
    for (int i = 0; i < rows; ++i) serial::softmax_rows(a + std::size_t(i) * cols, out + std::size_t(i) * cols, 1, cols);
#else
    serial::softmax_rows(a, out, rows, cols);
#endif
}

template <typename T>
void layer_norm_rows(const T* a, T* out, int rows, int cols, T eps) {
#ifdef _OPENMP
    const std::size_t work = std::size_t(rows) * cols;
#pragma omp parallel for schedule(static) if (work > kParallelCutoff && rows > 1)
    for (int i = 0; i < rows; ++i)
        serial::layer_norm_rows(a + std::size_t(i) * cols, out + std::size_t(i) * cols, 1, cols, eps);
#else
    serial::layer_norm_rows(a, out, rows, cols, eps);
#endif
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
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

}  // namespace dexflow::kernels
