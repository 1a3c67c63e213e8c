#include "featpipe/montage.hpp"

#include <algorithm>
#include <cmath>

#include "featpipe/error.hpp"

namespace featpipe {

Raster conv1_montage(const WeightBundle& bundle) {
  auto it = bundle.layers.find("conv1");
  if (it == bundle.layers.end()) throw ModelError("weight bundle has no conv1 entry");
  const Tensor& w = it->second.weights;
  if (w.rank() != 4 || w.dim(0) != kMontageColumns * kMontageRows || w.dim(1) != 3 ||
      w.dim(2) != w.dim(3)) {
    throw ModelError("conv1 weights must be 96x3xKxK, got " + to_string(w.shape()));
  }
  const std::size_t tile = w.dim(2);
  const std::size_t width = kMontageColumns * tile + (kMontageColumns - 1);
  const std::size_t height = kMontageRows * tile + (kMontageRows - 1);
  Raster out(width, height, 0);

  const std::size_t per_filter = 3 * tile * tile;
  for (std::size_t f = 0; f < w.dim(0); ++f) {
    const auto values = w.data().subspan(f * per_filter, per_filter);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const float range = *hi - *lo;
    const std::size_t x0 = (f % kMontageColumns) * (tile + 1);
    const std::size_t y0 = (f / kMontageColumns) * (tile + 1);
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t y = 0; y < tile; ++y) {
        for (std::size_t x = 0; x < tile; ++x) {
          const float v = values[(c * tile + y) * tile + x];
          const double scaled = range > 0.0f ? 255.0 * (v - *lo) / range : 128.0;
          out.at(x0 + x, y0 + y, c) = static_cast<std::uint8_t>(std::lround(scaled));
        }
      }
    }
  }
  return out;
}

}  // namespace featpipe
