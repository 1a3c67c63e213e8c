#include "gemm.hpp"

#include <algorithm>

namespace featpipe::detail {
namespace {

constexpr std::size_t kRows = 6;
constexpr std::size_t kLanes = 16;
constexpr std::size_t kCols = 2 * kLanes;

using Lane = float __attribute__((vector_size(kLanes * sizeof(float)), aligned(4)));

inline Lane load(const float* p) {
  Lane v;
  __builtin_memcpy(&v, p, sizeof(v));
  return v;
}

inline void store(float* p, Lane v) { __builtin_memcpy(p, &v, sizeof(v)); }

// Full kRows x kCols tile of C.
void tile_full(std::size_t k, const float* a, std::size_t lda, const float* b, std::size_t ldb,
               const float* bias, float* c, std::size_t ldc) {
  Lane acc[kRows][2];
  for (std::size_t r = 0; r < kRows; ++r) {
    const float init = bias ? bias[r] : 0.0f;
    acc[r][0] = Lane{} + init;
    acc[r][1] = Lane{} + init;
  }
  for (std::size_t p = 0; p < k; ++p) {
    const Lane b0 = load(b + p * ldb);
    const Lane b1 = load(b + p * ldb + kLanes);
    for (std::size_t r = 0; r < kRows; ++r) {
      const float av = a[r * lda + p];
      acc[r][0] += av * b0;
      acc[r][1] += av * b1;
    }
  }
  for (std::size_t r = 0; r < kRows; ++r) {
    store(c + r * ldc, acc[r][0]);
    store(c + r * ldc + kLanes, acc[r][1]);
  }
}

// Ragged tile at the matrix edge.
void tile_edge(std::size_t rows, std::size_t cols, std::size_t k, const float* a, std::size_t lda,
               const float* b, std::size_t ldb, const float* bias, float* c, std::size_t ldc) {
  float acc[kRows][kCols];
  for (std::size_t r = 0; r < rows; ++r) {
    const float init = bias ? bias[r] : 0.0f;
    std::fill_n(acc[r], cols, init);
  }
  for (std::size_t p = 0; p < k; ++p) {
    const float* brow = b + p * ldb;
    for (std::size_t r = 0; r < rows; ++r) {
      const float av = a[r * lda + p];
      for (std::size_t j = 0; j < cols; ++j) acc[r][j] += av * brow[j];
    }
  }
  for (std::size_t r = 0; r < rows; ++r) std::copy_n(acc[r], cols, c + r * ldc);
}

}  // namespace

void gemm_bias(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
               const float* b, std::size_t ldb, const float* bias, float* c, std::size_t ldc) {
  // Column panels outermost so a k x kCols slice of B stays cache resident
  // while every row block of A streams past it.
  for (std::size_t j = 0; j < n; j += kCols) {
    const std::size_t cols = std::min(kCols, n - j);
    for (std::size_t i = 0; i < m; i += kRows) {
      const std::size_t rows = std::min(kRows, m - i);
      const float* bias_i = bias ? bias + i : nullptr;
      if (rows == kRows && cols == kCols) {
        tile_full(k, a + i * lda, lda, b + j, ldb, bias_i, c + i * ldc + j, ldc);
      } else {
        tile_edge(rows, cols, k, a + i * lda, lda, b + j, ldb, bias_i, c + i * ldc + j, ldc);
      }
    }
  }
}

void gemv_bias(std::size_t m, std::size_t n, const float* w, const float* x, const float* bias,
               float* y) {
  for (std::size_t i = 0; i < m; ++i) {
    const float* row = w + i * n;
    Lane acc{};
    std::size_t j = 0;
    for (; j + kLanes <= n; j += kLanes) acc += load(row + j) * load(x + j);
    float sum = 0.0f;
    for (std::size_t l = 0; l < kLanes; ++l) sum += acc[l];
    for (; j < n; ++j) sum += row[j] * x[j];
    y[i] = sum + (bias ? bias[i] : 0.0f);
  }
}

}  // namespace featpipe::detail
