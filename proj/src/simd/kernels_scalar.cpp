#include <cmath>

#include "chaintag/simd/kernels.hpp"

namespace chaintag::simd {

namespace {

double masked_sum(const double* x, const double* mask, std::size_t n) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * mask[i];
    return s;
}

void spmv_csr(const std::uint32_t* ptr, const std::uint32_t* col, const double* val, const double* x, double* y,
              std::size_t rows) {
    for (std::size_t r = 0; r < rows; ++r) {
        double s = 0;
        for (std::uint32_t k = ptr[r]; k < ptr[r + 1]; ++k) s += val[k] * x[col[k]];
        y[r] = s;
    }
}

void affine(double* y, double a, double b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a * y[i] + b;
}

void scale(double* x, double s, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= s;
}

double sum(const double* x, std::size_t n) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
}

double l1_distance(const double* a, const double* b, std::size_t n) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += std::fabs(a[i] - b[i]);
    return s;
}

}  // namespace

const Kernels& scalar_kernels() {
    static const Kernels k{"scalar", masked_sum, spmv_csr, affine, scale, sum, l1_distance};
    return k;
}

}  // namespace chaintag::simd
