#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "featpipe/network.hpp"

namespace featpipe {

struct FeatureRecord {
  std::string image_id;
  std::string label;
  std::vector<float> values;
};

// CSV `image_id,label,f0,...,f{dim-1}`. Throws DataError if a record has
// the wrong length.
std::string features_csv(std::span<const FeatureRecord> records, std::size_t dimension = kFeatureLength);
void write_features_csv(const std::filesystem::path& path, std::span<const FeatureRecord> records,
                        std::size_t dimension = kFeatureLength);

// Compact variant: a JSON index plus a little-endian float blob written
// next to it as `<stem>.bin`.
void write_features_binary(const std::filesystem::path& index_path, std::span<const FeatureRecord> records,
                           std::size_t dimension = kFeatureLength);

// Reads either variant (".json" selects the binary one). Any record whose
// length differs from `dimension` raises DataError naming the dimension.
std::vector<FeatureRecord> read_features(const std::filesystem::path& path,
                                         std::size_t dimension = kFeatureLength);

}  // namespace featpipe
