#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "featpipe/layers.hpp"
#include "featpipe/tensor.hpp"

namespace featpipe {

struct WeightBundle;

enum class LayerKind { input, conv, relu, lrn, maxpool, fc, dropout, softmax, output };

std::string_view to_string(LayerKind kind);

struct InputSpec {
  Shape shape;
};

struct ConvSpec {
  std::size_t filters = 0;
  std::size_t kernel = 0;
  layers::ConvParams params;
};

struct FcSpec {
  std::size_t width = 0;
};

using LayerParams =
    std::variant<std::monostate, InputSpec, ConvSpec, layers::LrnParams, layers::PoolParams, FcSpec>;

struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::relu;
  LayerParams params;

  bool learnable() const { return kind == LayerKind::conv || kind == LayerKind::fc; }
};

struct NetworkGraph {
  std::vector<LayerSpec> layers;
  std::string feature_tap;

  const LayerSpec& layer(std::string_view name) const;
  const Shape& input_shape() const;
};

// The 25-layer AlexNet stack, feature tap "fc7".
NetworkGraph builtin_alexnet_graph();

struct ParameterShapes {
  Shape weights;
  Shape bias;
};

// Shapes each learnable layer's parameters must have, derived by
// propagating the input shape through the graph.
std::map<std::string, ParameterShapes> parameter_shapes(const NetworkGraph& graph);

// Output shape of every layer for the graph's input shape.
std::vector<std::pair<std::string, Shape>> activation_shapes(const NetworkGraph& graph);

struct ForwardOptions {
  // Last layer to evaluate; the whole graph when empty.
  std::optional<std::string> stop_at;
  // Layers whose outputs are returned; every evaluated layer when empty.
  std::set<std::string> keep;
  // Called after each layer is evaluated.
  std::function<void(const LayerSpec&)> on_layer;
};

using Activations = std::map<std::string, Tensor>;

Activations forward(const NetworkGraph& graph, const WeightBundle& bundle, const Tensor& input,
                    const ForwardOptions& options = {});

inline constexpr std::size_t kFeatureLength = 4096;

// A length-4096 descriptor produced by the feature tap.
class FeatureVector {
 public:
  FeatureVector(std::vector<float> values, std::string source_image_id);

  std::span<const float> values() const noexcept { return values_; }
  const std::string& source_image_id() const noexcept { return source_image_id_; }

 private:
  std::vector<float> values_;
  std::string source_image_id_;
};

// Linear (pre-ReLU) output of the graph's feature tap.
FeatureVector extract_features(const NetworkGraph& graph, const WeightBundle& bundle,
                               const Tensor& input, std::string source_image_id = {});

}  // namespace featpipe
