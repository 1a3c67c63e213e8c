#include "featpipe/weights.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <zlib.h>

#include "featpipe/error.hpp"
#include "featpipe/network.hpp"
#include "featpipe/rng.hpp"
#include "json.hpp"

namespace featpipe {

static_assert(std::endian::native == std::endian::little, "weight blobs are read as host floats");

namespace fs = std::filesystem;
using nlohmann::json;

std::string crc32_hex(std::span<const std::byte> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large blobs in slices.
  constexpr std::size_t kSlice = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kSlice) {
    const auto len = static_cast<uInt>(std::min(kSlice, bytes.size() - off));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off), len);
  }
  char buf[9];
  std::snprintf(buf, sizeof(buf), "%08lx", static_cast<unsigned long>(crc & 0xffffffffUL));
  return buf;
}

void validate_bundle(const NetworkGraph& graph, const WeightBundle& bundle) {
  const auto expected = parameter_shapes(graph);
  std::vector<std::string> missing;
  std::vector<std::string> problems;
  for (const auto& [name, shapes] : expected) {
    auto it = bundle.layers.find(name);
    if (it == bundle.layers.end()) {
      missing.push_back(name);
      continue;
    }
    if (it->second.weights.shape() != shapes.weights) {
      problems.push_back("layer " + name + " weights: expected " + to_string(shapes.weights) +
                         ", found " + to_string(it->second.weights.shape()));
    }
    if (it->second.bias.size() != shapes.bias.at(0)) {
      problems.push_back("layer " + name + " bias: expected " + to_string(shapes.bias) +
                         ", found " + std::to_string(it->second.bias.size()));
    }
  }
  for (const auto& [name, _] : bundle.layers) {
    if (!expected.contains(name)) problems.push_back("unexpected layer entry " + name);
  }
  if (missing.empty() && problems.empty()) return;
  std::string msg = "invalid weight bundle:";
  if (!missing.empty()) {
    msg += " missing layer entries";
    for (const auto& m : missing) msg += " " + m;
    msg += ';';
  }
  for (const auto& p : problems) msg += " " + p + ';';
  msg.pop_back();
  throw ModelError(msg);
}

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open bundle manifest " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ModelError("malformed bundle manifest " + path.string() + ": " + e.what());
  }
}

Shape parse_shape(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ModelError(where + ": shape must be a non-empty array");
  Shape s;
  for (const auto& d : j) {
    if (!d.is_number_unsigned() || d.get<std::size_t>() == 0) {
      throw ModelError(where + ": shape extents must be positive integers");
    }
    s.push_back(d.get<std::size_t>());
  }
  return s;
}

}  // namespace

WeightBundle load_bundle(const fs::path& manifest_path, const NetworkGraph& graph) {
  if (!fs::exists(manifest_path)) {
    throw ModelError("weight bundle manifest not found: " + manifest_path.string());
  }
  const json manifest = read_json(manifest_path);
  const fs::path blob_path = manifest_path.parent_path() / "weights.bin";
  if (!manifest.is_object() || !manifest.contains("tensors") || !manifest["tensors"].is_array()) {
    throw ModelError(manifest_path.string() + ": expected an object with a 'tensors' array");
  }

  WeightBundle bundle;
  if (manifest.contains("provenance")) {
    if (!manifest["provenance"].is_string()) {
      throw ModelError(manifest_path.string() + ": provenance must be a string");
    }
    bundle.provenance = manifest["provenance"].get<std::string>();
  }

  std::ifstream blob;
  std::uintmax_t blob_size = 0;
  if (!manifest["tensors"].empty()) {
    blob.open(blob_path, std::ios::binary);
    if (!blob) throw ModelError("cannot open weight blob " + blob_path.string());
    blob_size = fs::file_size(blob_path);
  }

  std::map<std::string, Tensor> weights;
  std::map<std::string, std::vector<float>> biases;
  for (const auto& entry : manifest["tensors"]) {
    std::string layer;
    std::string role;
    try {
      layer = entry.at("layer").get<std::string>();
      role = entry.at("role").get<std::string>();
      if (entry.at("dtype").get<std::string>() != "f32le") {
        throw ModelError("tensor " + layer + "/" + role + ": unsupported dtype " +
                         entry.at("dtype").get<std::string>());
      }
    } catch (const json::exception& e) {
      throw ModelError(manifest_path.string() + ": malformed tensor entry: " + e.what());
    }
    const std::string where = "tensor " + layer + "/" + role;
    if (role != "weights" && role != "bias") throw ModelError(where + ": unknown role");
    const Shape shape = parse_shape(entry.value("shape", json()), where);
    if (!entry.contains("offset") || !entry["offset"].is_number_unsigned()) {
      throw ModelError(where + ": offset must be a non-negative integer");
    }
    const auto offset = entry["offset"].get<std::uint64_t>();
    const std::uint64_t bytes = element_count(shape) * sizeof(float);
    if (offset + bytes > blob_size) {
      throw ModelError(where + ": blob " + blob_path.string() + " has " +
                       std::to_string(blob_size) + " bytes, manifest claims data up to byte " +
                       std::to_string(offset + bytes));
    }
    std::vector<float> values(element_count(shape));
    blob.seekg(static_cast<std::streamoff>(offset));
    blob.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(bytes));
    if (!blob) throw ModelError(where + ": short read from " + blob_path.string());
    const std::string crc = crc32_hex(std::as_bytes(std::span(values)));
    if (!entry.contains("crc32") || !entry["crc32"].is_string() ||
        entry["crc32"].get<std::string>() != crc) {
      throw ModelError(where + ": checksum mismatch (computed " + crc + ")");
    }
    if (role == "weights") {
      if (!weights.emplace(layer, Tensor(shape, std::move(values))).second) {
        throw ModelError(where + ": duplicate entry");
      }
    } else {
      if (shape.size() != 1) throw ModelError(where + ": bias must be rank 1");
      if (!biases.emplace(layer, std::move(values)).second) {
        throw ModelError(where + ": duplicate entry");
      }
    }
  }

  std::set<std::string> names;
  for (const auto& [n, _] : weights) names.insert(n);
  for (const auto& [n, _] : biases) names.insert(n);
  const auto expected = parameter_shapes(graph);
  std::vector<std::string> incomplete;
  for (const auto& n : names) {
    const bool has_w = weights.contains(n);
    const bool has_b = biases.contains(n);
    if (has_w && has_b) {
      bundle.layers[n] = LayerWeights{std::move(weights.at(n)), std::move(biases.at(n))};
    } else if (expected.contains(n)) {
      incomplete.push_back(n + (has_w ? " (no bias)" : " (no weights)"));
    } else {
      // Keep unknown layers visible to validation as unexpected entries.
      bundle.layers[n] = LayerWeights{};
    }
  }
  if (!incomplete.empty()) {
    std::string msg = "invalid weight bundle: incomplete layer entries";
    for (const auto& i : incomplete) msg += " " + i;
    throw ModelError(msg);
  }
  validate_bundle(graph, bundle);
  return bundle;
}

fs::path write_bundle(const WeightBundle& bundle, const fs::path& dir) {
  fs::create_directories(dir);
  const fs::path blob_path = dir / "weights.bin";
  std::ofstream blob(blob_path, std::ios::binary | std::ios::trunc);
  if (!blob) throw ModelError("cannot write " + blob_path.string());

  json tensors = json::array();
  std::uint64_t offset = 0;
  auto emit = [&](const std::string& layer, const char* role, const Shape& shape,
                  std::span<const float> values) {
    const auto bytes = std::as_bytes(values);
    blob.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    json shape_json = json::array();
    for (auto d : shape) shape_json.push_back(d);
    tensors.push_back({{"layer", layer},
                       {"role", role},
                       {"shape", shape_json},
                       {"dtype", "f32le"},
                       {"offset", offset},
                       {"crc32", crc32_hex(bytes)}});
    offset += bytes.size();
  };
  for (const auto& [name, lw] : bundle.layers) {
    emit(name, "weights", lw.weights.shape(), lw.weights.data());
    emit(name, "bias", {lw.bias.size()}, lw.bias);
  }
  if (!blob) throw ModelError("failed writing " + blob_path.string());

  const fs::path manifest_path = dir / "manifest.json";
  std::ofstream out(manifest_path, std::ios::trunc);
  out << json{{"provenance", bundle.provenance}, {"tensors", tensors}}.dump(2) << '\n';
  if (!out) throw ModelError("failed writing " + manifest_path.string());
  return manifest_path;
}

WeightBundle random_bundle(const NetworkGraph& graph, std::uint64_t seed) {
  WeightBundle bundle;
  std::ostringstream prov;
  prov << "random(seed=" << seed << ")";
  bundle.provenance = prov.str();
  Rng rng(seed);
  for (const auto& [name, shapes] : parameter_shapes(graph)) {
    Tensor w(shapes.weights);
    const std::size_t fan_in = w.size() / shapes.weights.at(0);
    const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (auto& v : w.data()) v = static_cast<float>(scale * rng.normal());
    std::vector<float> b(shapes.bias.at(0));
    for (auto& v : b) v = static_cast<float>(0.01 * rng.uniform());
    bundle.layers[name] = LayerWeights{std::move(w), std::move(b)};
  }
  return bundle;
}

WeightBundle zero_bundle(const NetworkGraph& graph) {
  WeightBundle bundle;
  bundle.provenance = "zeros";
  for (const auto& [name, shapes] : parameter_shapes(graph)) {
    bundle.layers[name] = LayerWeights{Tensor(shapes.weights), std::vector<float>(shapes.bias.at(0))};
  }
  return bundle;
}

}  // namespace featpipe
