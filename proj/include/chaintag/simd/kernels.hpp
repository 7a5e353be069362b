#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace chaintag::simd {

// Dense/CSR primitives behind the PageRank iteration.
struct Kernels {
    const char* name;
    // sum of x[i] * mask[i]
    double (*masked_sum)(const double* x, const double* mask, std::size_t n);
    // y[r] = sum_{k in [ptr[r], ptr[r+1])} val[k] * x[col[k]]
    void (*spmv_csr)(const std::uint32_t* ptr, const std::uint32_t* col, const double* val, const double* x,
                     double* y, std::size_t rows);
    // y = a * y + b
    void (*affine)(double* y, double a, double b, std::size_t n);
    // x *= s
    void (*scale)(double* x, double s, std::size_t n);
    double (*sum)(const double* x, std::size_t n);
    double (*l1_distance)(const double* a, const double* b, std::size_t n);
};

const Kernels& scalar_kernels();
// nullptr when not built for this target or the CPU lacks the instructions.
const Kernels* avx2_kernels();

// The active set: CHAINTAG_SIMD=scalar|avx2 overrides detection.
const Kernels& kernels();

}  // namespace chaintag::simd
