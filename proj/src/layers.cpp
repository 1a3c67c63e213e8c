#include "featpipe/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "featpipe/error.hpp"
#include "gemm.hpp"

namespace featpipe::layers {
namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.rank() != rank) {
    throw ShapeError("rank", std::string(what) + " expects a rank-" + std::to_string(rank) +
                                 " tensor, got " + to_string(t.shape()));
  }
}

// Unfold one group's receptive fields into a (Cg*Kh*Kw) x (Ho*Wo) matrix.
void im2col(const Tensor& input, std::size_t first_channel, std::size_t channels, std::size_t kh,
            std::size_t kw, const ConvParams& p, std::size_t out_h, std::size_t out_w,
            std::vector<float>& cols) {
  const std::size_t in_h = input.dim(1);
  const std::size_t in_w = input.dim(2);
  const std::size_t plane = out_h * out_w;
  cols.assign(channels * kh * kw * plane, 0.0f);
  const float* src = input.data().data();
  std::size_t row = 0;
  for (std::size_t c = 0; c < channels; ++c) {
    const float* chan = src + (first_channel + c) * in_h * in_w;
    for (std::size_t ky = 0; ky < kh; ++ky) {
      for (std::size_t kx = 0; kx < kw; ++kx, ++row) {
        float* dst = cols.data() + row * plane;
        for (std::size_t oy = 0; oy < out_h; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * p.stride + ky) -
                          static_cast<std::ptrdiff_t>(p.pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(in_h)) continue;
          const float* line = chan + static_cast<std::size_t>(iy) * in_w;
          float* out = dst + oy * out_w;
          for (std::size_t ox = 0; ox < out_w; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * p.stride + kx) -
                            static_cast<std::ptrdiff_t>(p.pad);
            if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(in_w)) out[ox] = line[ix];
          }
        }
      }
    }
  }
}

}  // namespace

std::size_t window_output_extent(std::size_t input, std::size_t kernel, std::size_t stride,
                                 std::size_t pad) {
  if (stride == 0) throw ShapeError("stride", "stride must be positive");
  if (input + 2 * pad < kernel) {
    throw ShapeError("window", "window of " + std::to_string(kernel) + " exceeds padded extent " +
                                   std::to_string(input + 2 * pad));
  }
  return (input + 2 * pad - kernel) / stride + 1;
}

Tensor conv2d(const Tensor& input, const Tensor& weights, std::span<const float> bias,
              const ConvParams& params) {
  require_rank(input, 3, "conv2d input");
  require_rank(weights, 4, "conv2d weights");
  const std::size_t channels = input.dim(0);
  const std::size_t out_channels = weights.dim(0);
  const std::size_t g = params.groups;
  if (g == 0) throw ShapeError("groups", "groups must be positive");
  if (channels % g != 0) {
    throw ShapeError("input channels", "input channels " + std::to_string(channels) +
                                           " not divisible by groups " + std::to_string(g));
  }
  if (out_channels % g != 0) {
    throw ShapeError("output channels", "output channels " + std::to_string(out_channels) +
                                            " not divisible by groups " + std::to_string(g));
  }
  const std::size_t group_in = channels / g;
  const std::size_t group_out = out_channels / g;
  if (weights.dim(1) != group_in) {
    throw ShapeError("weight input channels",
                     "weights " + to_string(weights.shape()) + " expect " +
                         std::to_string(weights.dim(1)) + " channels per group, input provides " +
                         std::to_string(group_in));
  }
  if (bias.size() != out_channels) {
    throw ShapeError("bias length", "bias has " + std::to_string(bias.size()) + " entries, need " +
                                        std::to_string(out_channels));
  }
  const std::size_t kh = weights.dim(2);
  const std::size_t kw = weights.dim(3);
  if (input.dim(1) + 2 * params.pad < kh) {
    throw ShapeError("kernel height", "kernel height " + std::to_string(kh) +
                                          " exceeds padded input height");
  }
  if (input.dim(2) + 2 * params.pad < kw) {
    throw ShapeError("kernel width", "kernel width " + std::to_string(kw) +
                                         " exceeds padded input width");
  }
  const std::size_t out_h = window_output_extent(input.dim(1), kh, params.stride, params.pad);
  const std::size_t out_w = window_output_extent(input.dim(2), kw, params.stride, params.pad);
  const std::size_t plane = out_h * out_w;
  const std::size_t patch = group_in * kh * kw;

  Tensor output({out_channels, out_h, out_w});
  std::vector<float> cols;
  for (std::size_t q = 0; q < g; ++q) {
    im2col(input, q * group_in, group_in, kh, kw, params, out_h, out_w, cols);
    detail::gemm_bias(group_out, plane, patch, weights.data().data() + q * group_out * patch, patch,
                      cols.data(), plane, bias.data() + q * group_out,
                      output.data().data() + q * group_out * plane, plane);
  }
  return output;
}

Tensor relu(const Tensor& input) {
  Tensor out = input;
  for (auto& v : out.data()) v = std::max(v, 0.0f);
  return out;
}

Tensor lrn(const Tensor& input, const LrnParams& params) {
  require_rank(input, 3, "lrn");
  if (params.size == 0 || params.size % 2 == 0) {
    throw ShapeError("lrn window", "lrn window must be odd and positive, got " +
                                       std::to_string(params.size));
  }
  if (!(params.k > 0.0f)) throw ShapeError("lrn k", "lrn requires k > 0");
  const std::size_t channels = input.dim(0);
  const std::size_t plane = input.dim(1) * input.dim(2);
  const std::size_t half = params.size / 2;
  const float scale = params.alpha / static_cast<float>(params.size);

  std::vector<float> squares(input.size());
  const auto src = input.data();
  for (std::size_t i = 0; i < src.size(); ++i) squares[i] = src[i] * src[i];

  Tensor out(input.shape());
  auto dst = out.data();
  std::vector<float> window(plane);
  for (std::size_t c = 0; c < channels; ++c) {
    const std::size_t lo = c >= half ? c - half : 0;
    const std::size_t hi = std::min(channels - 1, c + half);
    std::fill(window.begin(), window.end(), 0.0f);
    for (std::size_t cc = lo; cc <= hi; ++cc) {
      const float* sq = squares.data() + cc * plane;
      for (std::size_t i = 0; i < plane; ++i) window[i] += sq[i];
    }
    for (std::size_t i = 0; i < plane; ++i) {
      dst[c * plane + i] =
          src[c * plane + i] / std::pow(params.k + scale * window[i], params.beta);
    }
  }
  return out;
}

Tensor max_pool(const Tensor& input, const PoolParams& params) {
  require_rank(input, 3, "max_pool");
  if (params.size == 0) throw ShapeError("pool size", "pool size must be positive");
  if (input.dim(1) < params.size || input.dim(2) < params.size) {
    throw ShapeError("pool window", "pool window " + std::to_string(params.size) +
                                        " larger than input " + to_string(input.shape()));
  }
  const std::size_t channels = input.dim(0);
  const std::size_t out_h = window_output_extent(input.dim(1), params.size, params.stride, 0);
  const std::size_t out_w = window_output_extent(input.dim(2), params.size, params.stride, 0);
  Tensor out({channels, out_h, out_w});
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        float best = -std::numeric_limits<float>::infinity();
        for (std::size_t ky = 0; ky < params.size; ++ky) {
          for (std::size_t kx = 0; kx < params.size; ++kx) {
            best = std::max(best, input.at(c, oy * params.stride + ky, ox * params.stride + kx));
          }
        }
        out.at(c, oy, ox) = best;
      }
    }
  }
  return out;
}

Tensor fully_connected(const Tensor& x, const Tensor& weights, std::span<const float> bias) {
  require_rank(weights, 2, "fully_connected weights");
  const std::size_t m = weights.dim(0);
  const std::size_t n = weights.dim(1);
  if (x.size() != n) {
    throw ShapeError("input length", "fully_connected weights " + to_string(weights.shape()) +
                                         " need " + std::to_string(n) + " inputs, got " +
                                         std::to_string(x.size()) + " (" + to_string(x.shape()) +
                                         ")");
  }
  if (bias.size() != m) {
    throw ShapeError("bias length", "bias has " + std::to_string(bias.size()) + " entries, need " +
                                        std::to_string(m));
  }
  Tensor out({m});
  detail::gemv_bias(m, n, weights.data().data(), x.data().data(), bias.data(), out.data().data());
  return out;
}

Tensor softmax(const Tensor& x) {
  Tensor out = x;
  auto v = out.data();
  const float top = *std::max_element(v.begin(), v.end());
  double total = 0.0;
  for (auto& e : v) {
    e = std::exp(e - top);
    total += e;
  }
  for (auto& e : v) e = static_cast<float>(e / total);
  return out;
}

std::vector<double> softmax(std::span<const double> x) {
  if (x.empty()) throw ShapeError("length", "softmax of an empty vector");
  const double top = *std::max_element(x.begin(), x.end());
  std::vector<double> out(x.size());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - top);
    total += out[i];
  }
  for (auto& e : out) e /= total;
  return out;
}

Tensor dropout_inference(const Tensor& x) { return x; }

}  // namespace featpipe::layers
