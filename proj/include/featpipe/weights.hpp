#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "featpipe/tensor.hpp"

namespace featpipe {

struct NetworkGraph;

struct LayerWeights {
  Tensor weights;
  std::vector<float> bias;
};

// Learnable parameters keyed by layer name.
struct WeightBundle {
  std::map<std::string, LayerWeights> layers;
  std::string provenance;
};

// CRC-32 (IEEE) of raw bytes, rendered as 8 lowercase hex digits.
std::string crc32_hex(std::span<const std::byte> bytes);

// Checks every learnable layer of `graph` has an entry of exactly the
// demanded shape and that no unknown entries remain. Throws ModelError
// listing every problem found.
void validate_bundle(const NetworkGraph& graph, const WeightBundle& bundle);

// Reads manifest.json and the weights.bin blob next to it, then validates
// the result against `graph`.
WeightBundle load_bundle(const std::filesystem::path& manifest_path, const NetworkGraph& graph);

// Writes manifest.json + weights.bin into `dir`; returns the manifest path.
std::filesystem::path write_bundle(const WeightBundle& bundle, const std::filesystem::path& dir);

// He-scaled Gaussian weights with small positive biases, reproducible from
// the seed. Used for synthetic experiments and tests.
WeightBundle random_bundle(const NetworkGraph& graph, std::uint64_t seed);

// Every parameter zero.
WeightBundle zero_bundle(const NetworkGraph& graph);

}  // namespace featpipe
