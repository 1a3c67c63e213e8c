#include "featpipe/dataset.hpp"

#include <fstream>
#include <set>

#include "featpipe/csv.hpp"
#include "featpipe/error.hpp"

namespace featpipe {

std::optional<std::size_t> ClassNames::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  return std::nullopt;
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::test: return "test";
    case Split::unassigned: break;
  }
  return "";
}

std::array<std::size_t, 2> DatasetManifest::class_counts() const {
  std::array<std::size_t, 2> counts{};
  for (const auto& r : records) ++counts.at(r.label);
  return counts;
}

DatasetManifest DatasetManifest::subset(Split split) const {
  DatasetManifest out;
  out.classes = classes;
  for (const auto& r : records) {
    if (r.split == split) out.records.push_back(r);
  }
  return out;
}

DatasetManifest load_manifest(const std::filesystem::path& path, const ClassNames& classes) {
  if (classes.names[0] == classes.names[1]) {
    throw ConfigError("class names must differ, both are '" + classes.names[0] + "'");
  }
  const auto table = csv::read_file(path);
  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < table.header.size(); ++i) {
      if (table.header[i] == name) return i;
    }
    return std::nullopt;
  };
  const auto path_col = column("path");
  const auto label_col = column("label");
  const auto split_col = column("split");
  if (!path_col || !label_col) {
    throw DataError(path.string() + ": header must contain 'path' and 'label' columns");
  }
  if (table.rows.empty()) throw DataError(path.string() + ": manifest has no records");

  DatasetManifest manifest;
  manifest.classes = classes;
  std::set<std::string> seen;
  const auto base = path.parent_path();
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::string where = path.string() + " line " + std::to_string(table.line_numbers[i]);
    auto field = [&](std::optional<std::size_t> col) -> std::string {
      if (!col || *col >= row.size()) return {};
      return row[*col];
    };
    ImageRecord rec;
    rec.path = field(path_col);
    if (rec.path.empty()) throw DataError(where + ": empty path");
    const std::string label = field(label_col);
    const auto index = classes.index_of(label);
    if (!index) {
      throw DataError(where + ": unknown label '" + label + "' (expected " + classes.names[0] +
                      " or " + classes.names[1] + ")");
    }
    rec.label = *index;
    const std::string split = field(split_col);
    if (split == "train") {
      rec.split = Split::train;
    } else if (split == "test") {
      rec.split = Split::test;
    } else if (!split.empty()) {
      throw DataError(where + ": unknown split '" + split + "'");
    }
    if (!seen.insert(rec.path).second) throw DataError(where + ": duplicate path " + rec.path);
    const std::filesystem::path p(rec.path);
    rec.resolved = p.is_absolute() ? p : base / p;
    manifest.records.push_back(std::move(rec));
  }
  return manifest;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "path,label,split\n";
  for (const auto& r : manifest.records) {
    out << csv::join({r.path, manifest.classes[r.label], std::string(to_string(r.split))}) << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace featpipe
