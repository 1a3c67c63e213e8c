#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace featpipe {

// The two class names of the binary task. Index 0 is the positive class.
struct ClassNames {
  std::array<std::string, 2> names{"hookah", "nonhookah"};

  // Index of `name`, or nullopt when it is not one of the two classes.
  std::optional<std::size_t> index_of(std::string_view name) const;
  const std::string& operator[](std::size_t i) const { return names.at(i); }
};

enum class Split { unassigned, train, test };

std::string_view to_string(Split split);

struct ImageRecord {
  std::string path;              // as written in the manifest; doubles as the image id
  std::filesystem::path resolved;  // relative paths resolved against the manifest directory
  std::size_t label = 0;         // index into ClassNames
  Split split = Split::unassigned;
};

struct DatasetManifest {
  ClassNames classes;
  std::vector<ImageRecord> records;

  std::array<std::size_t, 2> class_counts() const;
  DatasetManifest subset(Split split) const;
};

// Parses a `path,label,split` CSV. Throws DataError naming the row for
// unknown labels, duplicate paths, bad split values or an empty file.
DatasetManifest load_manifest(const std::filesystem::path& path, const ClassNames& classes = {});

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

}  // namespace featpipe
