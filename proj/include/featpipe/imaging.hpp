#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "featpipe/tensor.hpp"

namespace featpipe {

// 8-bit RGB image, row-major, interleaved.
struct Raster {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  Raster() = default;
  Raster(std::size_t w, std::size_t h, std::uint8_t fill = 0);

  std::uint8_t& at(std::size_t x, std::size_t y, std::size_t c) {
    return pixels[(y * width + x) * 3 + c];
  }
  std::uint8_t at(std::size_t x, std::size_t y, std::size_t c) const {
    return pixels[(y * width + x) * 3 + c];
  }

  friend bool operator==(const Raster&, const Raster&) = default;
};

using ChannelMeans = std::array<float, 3>;

inline constexpr ChannelMeans kDefaultMeans{123.68f, 116.78f, 103.94f};
inline constexpr std::size_t kNetworkInputSide = 227;

// PNG or baseline JPEG to RGB. Gray sources are replicated across channels
// and alpha is discarded. `origin` only labels error messages.
Raster decode_image(std::span<const std::byte> bytes, const std::string& origin = "<memory>");
Raster read_image(const std::filesystem::path& path);

std::vector<std::byte> encode_png(const Raster& raster);
void write_png(const Raster& raster, const std::filesystem::path& path);

// JPEG encoding at the given quality. With `grayscale` the luma plane only
// is stored.
std::vector<std::byte> encode_jpeg(const Raster& raster, int quality = 90, bool grayscale = false);

// Bilinear resampling with half-pixel-centred sample positions, clamped at
// the borders. The aspect ratio is not preserved.
Raster resize_bilinear(const Raster& raster, std::size_t out_width, std::size_t out_height);

// Channel-major RGB tensor of (pixel - mean[c]). Requires a 227x227 raster.
Tensor to_input_tensor(const Raster& raster, const ChannelMeans& means = kDefaultMeans);

// resize_bilinear to 227x227 followed by to_input_tensor.
Tensor prepare_network_input(const Raster& raster, const ChannelMeans& means = kDefaultMeans);

}  // namespace featpipe
