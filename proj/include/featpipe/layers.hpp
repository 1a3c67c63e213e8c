#pragma once

#include <span>
#include <vector>

#include "featpipe/tensor.hpp"

// The seven layer operations of the feature network. All are pure
// functions of their inputs and safe to call concurrently.
namespace featpipe::layers {

struct ConvParams {
  std::size_t stride = 1;
  std::size_t pad = 0;
  std::size_t groups = 1;
};

// Cross-channel local response normalization constants.
struct LrnParams {
  float k = 1.0f;
  std::size_t size = 5;
  float alpha = 1e-4f;
  float beta = 0.75f;
};

struct PoolParams {
  std::size_t size = 3;
  std::size_t stride = 2;
};

// Output extent of a strided window along one axis.
std::size_t window_output_extent(std::size_t input, std::size_t kernel, std::size_t stride,
                                 std::size_t pad);

// input C x H x W, weights O x (C/g) x Kh x Kw, bias length O.
// Output channel o of group q only reads input channels of group q.
Tensor conv2d(const Tensor& input, const Tensor& weights, std::span<const float> bias,
              const ConvParams& params);

Tensor relu(const Tensor& input);

Tensor lrn(const Tensor& input, const LrnParams& params);

Tensor max_pool(const Tensor& input, const PoolParams& params);

// W (M x N) * x + b. A rank-3 x is consumed in channel-major flattening.
Tensor fully_connected(const Tensor& x, const Tensor& weights, std::span<const float> bias);

// Max-shifted softmax over all elements.
Tensor softmax(const Tensor& x);
std::vector<double> softmax(std::span<const double> x);

// Dropout is the identity at inference time.
Tensor dropout_inference(const Tensor& x);

}  // namespace featpipe::layers
