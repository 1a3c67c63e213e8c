#pragma once

#include "featpipe/imaging.hpp"
#include "featpipe/weights.hpp"

namespace featpipe {

inline constexpr std::size_t kMontageColumns = 12;
inline constexpr std::size_t kMontageRows = 8;

// The 96 conv1 filters as RGB tiles on a 12 x 8 grid separated by one
// black pixel. Each filter is min-max scaled to [0, 255] on its own; a
// filter with zero range renders as uniform 128.
Raster conv1_montage(const WeightBundle& bundle);

}  // namespace featpipe
