#include "anomalyscan/kernels.hpp"

#include "kernel_impl.hpp"

#include <cstdlib>
#include <string>

namespace anomalyscan::kernels {

namespace {

constexpr KernelTable kScalar{Isa::Scalar, &scalar::accumulate, &scalar::compound, &scalar::dot,
                              &scalar::sum};

#if defined(ANOMALYSCAN_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::Avx2, &avx2::accumulate, &avx2::compound, &avx2::dot, &avx2::sum};
#endif

#if defined(ANOMALYSCAN_HAVE_NEON)
constexpr KernelTable kNeon{Isa::Neon, &neon::accumulate, &neon::compound, &neon::dot, &neon::sum};
#endif

const KernelTable& select() noexcept {
    const char* forced = std::getenv("ANOMALYSCAN_SIMD");
    const std::string want = forced ? forced : "";
    if (want == "scalar") return kScalar;
    if (want == "avx2" && avx2_table()) return *avx2_table();
    if (want == "neon" && neon_table()) return *neon_table();
    if (const KernelTable* t = avx2_table()) return *t;
    if (const KernelTable* t = neon_table()) return *t;
    return kScalar;
}

} // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

const KernelTable* avx2_table() noexcept {
#if defined(ANOMALYSCAN_HAVE_AVX2)
    static const bool supported = __builtin_cpu_supports("avx2");
    return supported ? &kAvx2 : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable* neon_table() noexcept {
#if defined(ANOMALYSCAN_HAVE_NEON)
    return &kNeon; // mandatory on aarch64
#else
    return nullptr;
#endif
}

const KernelTable& active() noexcept {
    static const KernelTable& table = select();
    return table;
}

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
    }
    return "unknown";
}

} // namespace anomalyscan::kernels
