#pragma once

// Elementwise and reduction kernels for the cross-sectional inner loops.
//
// Every kernel has a scalar reference implementation and optional SIMD
// variants (AVX2 on x86-64, NEON on aarch64). The variant is picked once at
// first use from the host CPU, or forced with ANOMALYSCAN_SIMD=scalar|avx2|neon.
//
// The elementwise kernels (accumulate, compound) perform exactly the same
// IEEE operations per lane as the scalar loop, so all variants agree bit for
// bit. The reductions (dot, sum) reassociate and agree to rounding only.

#include <cstddef>
#include <span>
#include <string_view>

namespace anomalyscan::kernels {

enum class Isa { Scalar, Avx2, Neon };

struct KernelTable {
    Isa isa;
    // acc[i] += x[i]
    void (*accumulate)(double* acc, const double* x, std::size_t n);
    // acc[i] *= 1 + x[i]
    void (*compound)(double* acc, const double* x, std::size_t n);
    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum_i a[i]
    double (*sum)(const double* a, std::size_t n);
};

const KernelTable& scalar_table() noexcept;
// nullptr when the variant is not compiled in or the CPU lacks it.
const KernelTable* avx2_table() noexcept;
const KernelTable* neon_table() noexcept;

// Table chosen for this process.
const KernelTable& active() noexcept;
std::string_view isa_name(Isa isa) noexcept;

inline void accumulate(std::span<double> acc, std::span<const double> x) noexcept {
    active().accumulate(acc.data(), x.data(), acc.size());
}
inline void compound(std::span<double> acc, std::span<const double> x) noexcept {
    active().compound(acc.data(), x.data(), acc.size());
}
inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
    return active().dot(a.data(), b.data(), a.size());
}
inline double sum(std::span<const double> a) noexcept {
    return active().sum(a.data(), a.size());
}

} // namespace anomalyscan::kernels
