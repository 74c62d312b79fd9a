// AVX2 variants. This file is compiled with -mavx2 and without FMA so the
// elementwise kernels round exactly like the scalar reference.

#include "kernel_impl.hpp"

#include <immintrin.h>

namespace anomalyscan::kernels::avx2 {

void accumulate(double* acc, const double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d a0 = _mm256_loadu_pd(acc + i);
        __m256d a1 = _mm256_loadu_pd(acc + i + 4);
        a0 = _mm256_add_pd(a0, _mm256_loadu_pd(x + i));
        a1 = _mm256_add_pd(a1, _mm256_loadu_pd(x + i + 4));
        _mm256_storeu_pd(acc + i, a0);
        _mm256_storeu_pd(acc + i + 4, a1);
    }
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) acc[i] += x[i];
}

void compound(double* acc, const double* x, std::size_t n) {
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d growth = _mm256_add_pd(one, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(acc + i, _mm256_mul_pd(_mm256_loadu_pd(acc + i), growth));
    }
    for (; i < n; ++i) acc[i] *= 1.0 + x[i];
}

namespace {

double horizontal_sum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

} // namespace

double dot(const double* a, const double* b, std::size_t n) {
    __m256d s0 = _mm256_setzero_pd();
    __m256d s1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        s0 = _mm256_add_pd(s0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
        s1 = _mm256_add_pd(s1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
    }
    double s = horizontal_sum(_mm256_add_pd(s0, s1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum(const double* a, std::size_t n) {
    __m256d s0 = _mm256_setzero_pd();
    __m256d s1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        s0 = _mm256_add_pd(s0, _mm256_loadu_pd(a + i));
        s1 = _mm256_add_pd(s1, _mm256_loadu_pd(a + i + 4));
    }
    double s = horizontal_sum(_mm256_add_pd(s0, s1));
    for (; i < n; ++i) s += a[i];
    return s;
}

} // namespace anomalyscan::kernels::avx2
