#include "featpipe/features_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "featpipe/csv.hpp"
#include "featpipe/error.hpp"
#include "featpipe/weights.hpp"
#include "json.hpp"

namespace featpipe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_length(const FeatureRecord& r, std::size_t dimension, const std::string& where) {
  if (r.values.size() != dimension) {
    throw DataError(where + ": feature dimension mismatch for '" + r.image_id + "': expected " +
                    std::to_string(dimension) + ", found " + std::to_string(r.values.size()));
  }
}

void write_bytes(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("failed writing " + path.string());
}

std::vector<FeatureRecord> read_csv(const fs::path& path, std::size_t dimension) {
  const auto table = csv::read_file(path);
  if (table.header.size() < 2 || table.header[0] != "image_id" || table.header[1] != "label") {
    throw DataError(path.string() + ": feature file header must start with image_id,label");
  }
  const std::size_t found = table.header.size() - 2;
  if (found != dimension) {
    throw DataError(path.string() + ": feature dimension mismatch: expected " + std::to_string(dimension) +
                    ", found " + std::to_string(found));
  }
  std::vector<FeatureRecord> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = path.string() + ":" + std::to_string(table.line_numbers[r]);
    if (row.size() != table.header.size()) {
      throw DataError(where + ": feature dimension mismatch: expected " + std::to_string(dimension) +
                      ", found " + std::to_string(row.size() < 2 ? 0 : row.size() - 2));
    }
    FeatureRecord rec{row[0], row[1], {}};
    rec.values.reserve(dimension);
    for (std::size_t i = 2; i < row.size(); ++i) {
      rec.values.push_back(static_cast<float>(csv::parse_double(row[i], where)));
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<FeatureRecord> read_binary(const fs::path& index_path, std::size_t dimension) {
  std::ifstream in(index_path);
  if (!in) throw DataError("cannot open feature index " + index_path.string());
  json index;
  try {
    index = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("malformed feature index " + index_path.string() + ": " + e.what());
  }
  try {
    if (index.at("format").get<std::string>() != "featpipe-features") {
      throw DataError(index_path.string() + ": not a feature index");
    }
    const auto found = index.at("dimension").get<std::size_t>();
    if (found != dimension) {
      throw DataError(index_path.string() + ": feature dimension mismatch: expected " +
                      std::to_string(dimension) + ", found " + std::to_string(found));
    }
    if (index.at("dtype").get<std::string>() != "f32le") {
      throw DataError(index_path.string() + ": unsupported dtype");
    }
    const fs::path blob_path = index_path.parent_path() / index.at("blob").get<std::string>();
    std::ifstream bin(blob_path, std::ios::binary);
    if (!bin) throw DataError("cannot open feature blob " + blob_path.string());
    std::string blob((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
    if (crc32_hex(std::as_bytes(std::span(blob.data(), blob.size()))) != index.at("crc32").get<std::string>()) {
      throw DataError(blob_path.string() + ": checksum mismatch");
    }
    const auto& entries = index.at("records");
    if (blob.size() != entries.size() * dimension * sizeof(float)) {
      throw DataError(blob_path.string() + ": blob holds " + std::to_string(blob.size()) + " bytes, expected " +
                      std::to_string(entries.size() * dimension * sizeof(float)));
    }
    std::vector<FeatureRecord> out;
    out.reserve(entries.size());
    for (std::size_t r = 0; r < entries.size(); ++r) {
      FeatureRecord rec{entries[r].at("image_id").get<std::string>(), entries[r].at("label").get<std::string>(),
                        std::vector<float>(dimension)};
      std::memcpy(rec.values.data(), blob.data() + r * dimension * sizeof(float), dimension * sizeof(float));
      out.push_back(std::move(rec));
    }
    return out;
  } catch (const json::exception& e) {
    throw DataError("malformed feature index " + index_path.string() + ": " + e.what());
  }
}

}  // namespace

std::string features_csv(std::span<const FeatureRecord> records, std::size_t dimension) {
  std::string out = "image_id,label";
  for (std::size_t i = 0; i < dimension; ++i) out += ",f" + std::to_string(i);
  out += '\n';
  for (const auto& r : records) {
    check_length(r, dimension, "features");
    out += csv::escape(r.image_id);
    out += ',';
    out += csv::escape(r.label);
    for (float v : r.values) {
      out += ',';
      out += csv::format_float(v);
    }
    out += '\n';
  }
  return out;
}

void write_features_csv(const fs::path& path, std::span<const FeatureRecord> records, std::size_t dimension) {
  write_bytes(path, features_csv(records, dimension));
}

void write_features_binary(const fs::path& index_path, std::span<const FeatureRecord> records,
                           std::size_t dimension) {
  static_assert(std::endian::native == std::endian::little);
  std::string blob;
  blob.reserve(records.size() * dimension * sizeof(float));
  json entries = json::array();
  for (const auto& r : records) {
    check_length(r, dimension, "features");
    blob.append(reinterpret_cast<const char*>(r.values.data()), r.values.size() * sizeof(float));
    entries.push_back({{"image_id", r.image_id}, {"label", r.label}});
  }
  const std::string blob_name = index_path.stem().string() + ".bin";
  json index = {{"format", "featpipe-features"},
                {"dimension", dimension},
                {"dtype", "f32le"},
                {"blob", blob_name},
                {"crc32", crc32_hex(std::as_bytes(std::span(blob.data(), blob.size())))},
                {"records", entries}};
  write_bytes(index_path.parent_path() / blob_name, blob);
  write_bytes(index_path, index.dump(2) + "\n");
}

std::vector<FeatureRecord> read_features(const fs::path& path, std::size_t dimension) {
  if (path.extension() == ".json") return read_binary(path, dimension);
  return read_csv(path, dimension);
}

}  // namespace featpipe
