#include "kernel_impl.hpp"

namespace anomalyscan::kernels::scalar {

void accumulate(double* acc, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) acc[i] += x[i];
}

void compound(double* acc, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) acc[i] *= 1.0 + x[i];
}

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum(const double* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
}

} // namespace anomalyscan::kernels::scalar
