#include "featpipe/network.hpp"

#include "featpipe/error.hpp"
#include "featpipe/weights.hpp"

namespace featpipe {

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::input: return "input";
    case LayerKind::conv: return "conv";
    case LayerKind::relu: return "relu";
    case LayerKind::lrn: return "lrn";
    case LayerKind::maxpool: return "maxpool";
    case LayerKind::fc: return "fc";
    case LayerKind::dropout: return "dropout";
    case LayerKind::softmax: return "softmax";
    case LayerKind::output: return "output";
  }
  return "unknown";
}

const LayerSpec& NetworkGraph::layer(std::string_view name) const {
  for (const auto& l : layers) {
    if (l.name == name) return l;
  }
  throw ConfigError("graph has no layer named '" + std::string(name) + "'");
}

const Shape& NetworkGraph::input_shape() const {
  if (layers.empty() || layers.front().kind != LayerKind::input) {
    throw ConfigError("graph does not start with an input layer");
  }
  return std::get<InputSpec>(layers.front().params).shape;
}

NetworkGraph builtin_alexnet_graph() {
  using K = LayerKind;
  auto conv = [](std::string name, std::size_t filters, std::size_t kernel, std::size_t stride,
                 std::size_t pad, std::size_t groups) {
    return LayerSpec{std::move(name), K::conv, ConvSpec{filters, kernel, {stride, pad, groups}}};
  };
  auto plain = [](std::string name, K kind) { return LayerSpec{std::move(name), kind, {}}; };
  auto pool = [](std::string name) {
    return LayerSpec{std::move(name), K::maxpool, layers::PoolParams{3, 2}};
  };
  auto norm = [](std::string name) {
    return LayerSpec{std::move(name), K::lrn, layers::LrnParams{}};
  };
  auto fc = [](std::string name, std::size_t width) {
    return LayerSpec{std::move(name), K::fc, FcSpec{width}};
  };

  NetworkGraph g;
  g.layers = {
      LayerSpec{"data", K::input, InputSpec{{3, 227, 227}}},
      conv("conv1", 96, 11, 4, 0, 1),
      plain("relu1", K::relu),
      norm("norm1"),
      pool("pool1"),
      conv("conv2", 256, 5, 1, 2, 2),
      plain("relu2", K::relu),
      norm("norm2"),
      pool("pool2"),
      conv("conv3", 384, 3, 1, 1, 1),
      plain("relu3", K::relu),
      conv("conv4", 384, 3, 1, 1, 2),
      plain("relu4", K::relu),
      conv("conv5", 256, 3, 1, 1, 2),
      plain("relu5", K::relu),
      pool("pool5"),
      fc("fc6", 4096),
      plain("relu6", K::relu),
      plain("drop6", K::dropout),
      fc("fc7", 4096),
      plain("relu7", K::relu),
      plain("drop7", K::dropout),
      fc("fc8", 1000),
      plain("prob", K::softmax),
      plain("output", K::output),
  };
  g.feature_tap = "fc7";
  return g;
}

namespace {

// Shape after applying `layer` to an input of shape `in`.
Shape propagate(const LayerSpec& layer, const Shape& in) {
  switch (layer.kind) {
    case LayerKind::input:
      return std::get<InputSpec>(layer.params).shape;
    case LayerKind::conv: {
      const auto& c = std::get<ConvSpec>(layer.params);
      return {c.filters, layers::window_output_extent(in.at(1), c.kernel, c.params.stride, c.params.pad),
              layers::window_output_extent(in.at(2), c.kernel, c.params.stride, c.params.pad)};
    }
    case LayerKind::maxpool: {
      const auto& p = std::get<layers::PoolParams>(layer.params);
      return {in.at(0), layers::window_output_extent(in.at(1), p.size, p.stride, 0),
              layers::window_output_extent(in.at(2), p.size, p.stride, 0)};
    }
    case LayerKind::fc:
      return {std::get<FcSpec>(layer.params).width};
    default:
      return in;
  }
}

}  // namespace

std::vector<std::pair<std::string, Shape>> activation_shapes(const NetworkGraph& graph) {
  std::vector<std::pair<std::string, Shape>> out;
  Shape current = graph.input_shape();
  for (const auto& layer : graph.layers) {
    current = propagate(layer, current);
    out.emplace_back(layer.name, current);
  }
  return out;
}

std::map<std::string, ParameterShapes> parameter_shapes(const NetworkGraph& graph) {
  std::map<std::string, ParameterShapes> out;
  Shape current = graph.input_shape();
  for (const auto& layer : graph.layers) {
    if (layer.kind == LayerKind::conv) {
      const auto& c = std::get<ConvSpec>(layer.params);
      out[layer.name] = {{c.filters, current.at(0) / c.params.groups, c.kernel, c.kernel},
                         {c.filters}};
    } else if (layer.kind == LayerKind::fc) {
      const auto width = std::get<FcSpec>(layer.params).width;
      out[layer.name] = {{width, element_count(current)}, {width}};
    }
    current = propagate(layer, current);
  }
  return out;
}

Activations forward(const NetworkGraph& graph, const WeightBundle& bundle, const Tensor& input,
                    const ForwardOptions& options) {
  if (input.shape() != graph.input_shape()) {
    throw ShapeError("input", "network expects input " + to_string(graph.input_shape()) +
                                  ", got " + to_string(input.shape()));
  }
  if (options.stop_at) graph.layer(*options.stop_at);

  auto params_of = [&](const LayerSpec& layer) -> const LayerWeights& {
    auto it = bundle.layers.find(layer.name);
    if (it == bundle.layers.end()) {
      throw ModelError("weight bundle has no entry for layer " + layer.name);
    }
    return it->second;
  };

  Activations kept;
  Tensor current = input;
  for (const auto& layer : graph.layers) {
    switch (layer.kind) {
      case LayerKind::input:
      case LayerKind::output:
        break;
      case LayerKind::conv: {
        const auto& w = params_of(layer);
        current = layers::conv2d(current, w.weights, w.bias, std::get<ConvSpec>(layer.params).params);
        break;
      }
      case LayerKind::relu:
        current = layers::relu(current);
        break;
      case LayerKind::lrn:
        current = layers::lrn(current, std::get<layers::LrnParams>(layer.params));
        break;
      case LayerKind::maxpool:
        current = layers::max_pool(current, std::get<layers::PoolParams>(layer.params));
        break;
      case LayerKind::fc: {
        const auto& w = params_of(layer);
        current = layers::fully_connected(current, w.weights, w.bias);
        break;
      }
      case LayerKind::dropout:
        current = layers::dropout_inference(current);
        break;
      case LayerKind::softmax:
        current = layers::softmax(current);
        break;
    }
    if (options.on_layer) options.on_layer(layer);
    if (options.keep.empty() || options.keep.contains(layer.name)) kept[layer.name] = current;
    if (options.stop_at && *options.stop_at == layer.name) break;
  }
  return kept;
}

FeatureVector::FeatureVector(std::vector<float> values, std::string source_image_id)
    : values_(std::move(values)), source_image_id_(std::move(source_image_id)) {
  if (values_.size() != kFeatureLength) {
    throw ShapeError("feature length", "feature vector must have " +
                                           std::to_string(kFeatureLength) + " values, got " +
                                           std::to_string(values_.size()));
  }
}

FeatureVector extract_features(const NetworkGraph& graph, const WeightBundle& bundle,
                               const Tensor& input, std::string source_image_id) {
  ForwardOptions options;
  options.stop_at = graph.feature_tap;
  options.keep = {graph.feature_tap};
  auto acts = forward(graph, bundle, input, options);
  return FeatureVector(acts.at(graph.feature_tap).values(), std::move(source_image_id));
}

}  // namespace featpipe
