#include <cstdlib>
#include <stdexcept>
#include <string>

#include "chaintag/simd/kernels.hpp"

namespace chaintag::simd {

#if defined(CHAINTAG_HAVE_AVX2_KERNELS)
const Kernels& avx2_kernel_table();
#endif

const Kernels* avx2_kernels() {
#if defined(CHAINTAG_HAVE_AVX2_KERNELS)
    static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok ? &avx2_kernel_table() : nullptr;
#else
    return nullptr;
#endif
}

namespace {

const Kernels& select() {
    const char* env = std::getenv("CHAINTAG_SIMD");
    std::string want = env ? env : "";
    if (want == "scalar") return scalar_kernels();
    if (want == "avx2") {
        if (const Kernels* k = avx2_kernels()) return *k;
        throw std::runtime_error("CHAINTAG_SIMD=avx2 but AVX2 kernels are unavailable");
    }
    if (!want.empty() && want != "auto") throw std::runtime_error("CHAINTAG_SIMD must be scalar, avx2 or auto");
    if (const Kernels* k = avx2_kernels()) return *k;
    return scalar_kernels();
}

}  // namespace

const Kernels& kernels() {
    static const Kernels& k = select();
    return k;
}

}  // namespace chaintag::simd
