// NEON variants for aarch64. vfmaq is deliberately not used in the
// elementwise kernels; they must round like the scalar reference.

#include "kernel_impl.hpp"

#include <arm_neon.h>

namespace anomalyscan::kernels::neon {

void accumulate(double* acc, const double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(acc + i, vaddq_f64(vld1q_f64(acc + i), vld1q_f64(x + i)));
    for (; i < n; ++i) acc[i] += x[i];
}

void compound(double* acc, const double* x, std::size_t n) {
    const float64x2_t one = vdupq_n_f64(1.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t growth = vaddq_f64(one, vld1q_f64(x + i));
        vst1q_f64(acc + i, vmulq_f64(vld1q_f64(acc + i), growth));
    }
    for (; i < n; ++i) acc[i] *= 1.0 + x[i];
}

double dot(const double* a, const double* b, std::size_t n) {
    float64x2_t s0 = vdupq_n_f64(0.0);
    float64x2_t s1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 = vaddq_f64(s0, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
        s1 = vaddq_f64(s1, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
    }
    double s = vaddvq_f64(vaddq_f64(s0, s1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum(const double* a, std::size_t n) {
    float64x2_t s0 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) s0 = vaddq_f64(s0, vld1q_f64(a + i));
    double s = vaddvq_f64(s0);
    for (; i < n; ++i) s += a[i];
    return s;
}

} // namespace anomalyscan::kernels::neon
