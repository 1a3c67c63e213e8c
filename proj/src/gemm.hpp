#pragma once

#include <cstddef>

namespace featpipe::detail {

// C[m x n] = A[m x k] * B[k x n] + bias[m] (broadcast along rows), all
// row-major with leading dimensions lda, ldb, ldc. bias may be null.
void gemm_bias(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
               const float* b, std::size_t ldb, const float* bias, float* c, std::size_t ldc);

// y[m] = W[m x n] * x[n] + bias[m]. bias may be null.
void gemv_bias(std::size_t m, std::size_t n, const float* w, const float* x, const float* bias,
               float* y);

}  // namespace featpipe::detail
