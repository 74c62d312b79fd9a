#pragma once

#include <cstddef>

namespace anomalyscan::kernels {

namespace scalar {
void accumulate(double* acc, const double* x, std::size_t n);
void compound(double* acc, const double* x, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
} // namespace scalar

#if defined(ANOMALYSCAN_HAVE_AVX2)
namespace avx2 {
void accumulate(double* acc, const double* x, std::size_t n);
void compound(double* acc, const double* x, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
} // namespace avx2
#endif

#if defined(ANOMALYSCAN_HAVE_NEON)
namespace neon {
void accumulate(double* acc, const double* x, std::size_t n);
void compound(double* acc, const double* x, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
} // namespace neon
#endif

} // namespace anomalyscan::kernels
