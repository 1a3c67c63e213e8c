#include "featpipe/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include "featpipe/error.hpp"
#include "featpipe/rng.hpp"
#include "json.hpp"

namespace featpipe::baselines {

using nlohmann::json;

namespace {

double luma(const Raster& r, std::size_t x, std::size_t y) {
  return 0.299 * r.at(x, y, 0) + 0.587 * r.at(x, y, 1) + 0.114 * r.at(x, y, 2);
}

// Fixed summation order: 16 lane-wise partial sums folded left to right,
// then the scalar tail.
float squared_distance(std::span<const float> a, std::span<const float> b) {
  using Lane = float __attribute__((vector_size(64)));
  constexpr std::size_t kWidth = 16;
  Lane acc{};
  std::size_t i = 0;
  for (; i + kWidth <= a.size(); i += kWidth) {
    Lane x, y;
    std::memcpy(&x, a.data() + i, sizeof(Lane));
    std::memcpy(&y, b.data() + i, sizeof(Lane));
    const Lane d = x - y;
    acc += d * d;
  }
  float sum = 0.0f;
  for (std::size_t l = 0; l < kWidth; ++l) sum += acc[l];
  for (; i < a.size(); ++i) {
    const float d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

}  // namespace

std::vector<float> raw_pixel_vector(const Raster& raster) {
  const Raster small = resize_bilinear(raster, kRawPixelSide, kRawPixelSide);
  std::vector<float> out(kRawPixelSide * kRawPixelSide);
  for (std::size_t y = 0; y < kRawPixelSide; ++y) {
    for (std::size_t x = 0; x < kRawPixelSide; ++x) {
      out[y * kRawPixelSide + x] = static_cast<float>(luma(small, x, y) / 255.0);
    }
  }
  return out;
}

std::vector<Descriptor> extract_patch_descriptors(const Raster& raster,
                                                  const DescriptorConfig& config) {
  if (config.patch == 0 || config.stride == 0 || config.resize == 0) {
    throw ConfigError("descriptor patch, stride and resize must be positive");
  }
  std::vector<Descriptor> out;
  if (config.resize < config.patch) return out;
  const Raster img = resize_bilinear(raster, config.resize, config.resize);
  std::vector<double> gray(config.resize * config.resize);
  for (std::size_t y = 0; y < config.resize; ++y) {
    for (std::size_t x = 0; x < config.resize; ++x) gray[y * config.resize + x] = luma(img, x, y);
  }
  const std::size_t per_axis = (config.resize - config.patch) / config.stride + 1;
  const std::size_t len = config.patch * config.patch;
  std::vector<double> patch(len);
  for (std::size_t py = 0; py < per_axis; ++py) {
    for (std::size_t px = 0; px < per_axis; ++px) {
      double mean = 0.0;
      for (std::size_t y = 0; y < config.patch; ++y) {
        for (std::size_t x = 0; x < config.patch; ++x) {
          const double v = gray[(py * config.stride + y) * config.resize + px * config.stride + x];
          patch[y * config.patch + x] = v;
          mean += v;
        }
      }
      mean /= static_cast<double>(len);
      double var = 0.0;
      for (double v : patch) var += (v - mean) * (v - mean);
      var /= static_cast<double>(len);
      if (var < 1e-6) continue;
      const double inv = 1.0 / std::sqrt(var);
      Descriptor d(len);
      for (std::size_t i = 0; i < len; ++i) d[i] = static_cast<float>((patch[i] - mean) * inv);
      out.push_back(std::move(d));
    }
  }
  return out;
}

std::size_t nearest_centroid(const Vocabulary& vocabulary, std::span<const float> descriptor) {
  std::size_t best = 0;
  float best_d = std::numeric_limits<float>::infinity();
  for (std::size_t c = 0; c < vocabulary.centroids.size(); ++c) {
    if (vocabulary.centroids[c].size() != descriptor.size()) {
      throw DataError("descriptor length " + std::to_string(descriptor.size()) +
                      " does not match centroid length " +
                      std::to_string(vocabulary.centroids[c].size()));
    }
    const float d = squared_distance(vocabulary.centroids[c], descriptor);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

KMeansResult kmeans(std::span<const Descriptor> points, std::size_t k, std::size_t iterations,
                    std::uint64_t seed, const DescriptorConfig& config) {
  if (k == 0) throw ConfigError("k-means needs k >= 1");
  if (points.size() < k) {
    throw DataError("k-means needs at least k=" + std::to_string(k) + " points, got " +
                    std::to_string(points.size()));
  }
  const std::size_t dim = points[0].size();
  for (const auto& p : points) {
    if (p.size() != dim) throw DataError("k-means points have ragged lengths");
  }
  const std::size_t n = points.size();
  Rng rng(seed);

  // k-means++ seeding.
  KMeansResult result;
  auto& centroids = result.vocabulary.centroids;
  result.vocabulary.config = config;
  centroids.push_back(points[rng.below(n)]);
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) nearest[i] = squared_distance(points[i], centroids[0]);
  while (centroids.size() < k) {
    const double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
    std::size_t pick = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        target -= nearest[i];
        if (target < 0.0 && nearest[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.below(n);
    }
    centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min<double>(nearest[i], squared_distance(points[i], centroids.back()));
    }
  }

  std::vector<std::size_t> assign(n, k);
  std::vector<double> dist(n);
  for (std::size_t it = 0; it < iterations; ++it) {
    bool changed = false;
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      float best_d = std::numeric_limits<float>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const float d = squared_distance(centroids[c], points[i]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      changed |= assign[i] != best;
      assign[i] = best;
      dist[i] = best_d;
      objective += best_d;
    }
    result.objective_trace.push_back(objective);
    result.iterations = it + 1;
    if (!changed) break;

    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = sums[assign[i]];
      for (std::size_t d = 0; d < dim; ++d) s[d] += points[i][d];
      ++counts[assign[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Reseed to the worst-served point and stop it seeding another.
        const auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
        centroids[c] = points[far];
        dist[far] = -1.0;
        continue;
      }
      for (std::size_t d = 0; d < dim; ++d) {
        centroids[c][d] = static_cast<float>(sums[c][d] / static_cast<double>(counts[c]));
      }
    }
  }
  return result;
}

std::vector<double> encode_descriptors(std::span<const Descriptor> descriptors,
                                       const Vocabulary& vocabulary) {
  const std::size_t k = vocabulary.size();
  if (k == 0) throw DataError("vocabulary is empty");
  std::vector<double> hist(k, 0.0);
  if (descriptors.empty()) {
    std::fill(hist.begin(), hist.end(), 1.0 / static_cast<double>(k));
    return hist;
  }
  for (const auto& d : descriptors) hist[nearest_centroid(vocabulary, d)] += 1.0;
  for (auto& h : hist) h /= static_cast<double>(descriptors.size());
  return hist;
}

std::vector<double> encode_bof(const Raster& raster, const Vocabulary& vocabulary) {
  return encode_descriptors(extract_patch_descriptors(raster, vocabulary.config), vocabulary);
}

std::string serialize(const Vocabulary& vocabulary) {
  json doc = {
      {"config",
       {{"patch", vocabulary.config.patch},
        {"stride", vocabulary.config.stride},
        {"resize", vocabulary.config.resize}}},
      {"centroids", vocabulary.centroids},
  };
  return doc.dump() + "\n";
}

Vocabulary deserialize_vocabulary(std::string_view text) {
  Vocabulary v;
  try {
    const json doc = json::parse(text);
    const auto& cfg = doc.at("config");
    v.config.patch = cfg.at("patch").get<std::size_t>();
    v.config.stride = cfg.at("stride").get<std::size_t>();
    v.config.resize = cfg.at("resize").get<std::size_t>();
    v.centroids = doc.at("centroids").get<std::vector<Descriptor>>();
  } catch (const json::exception& e) {
    throw ModelError(std::string("malformed vocabulary: ") + e.what());
  }
  if (v.centroids.empty()) throw ModelError("vocabulary has no centroids");
  for (const auto& c : v.centroids) {
    if (c.size() != v.config.patch * v.config.patch) {
      throw ModelError("centroid length does not match patch size");
    }
    for (float x : c) {
      if (!std::isfinite(x)) throw ModelError("vocabulary centroid is not finite");
    }
  }
  return v;
}

std::array<double, 2> SoftmaxHead::logits(std::span<const double> x) const {
  if (x.size() != dim) {
    throw DataError("softmax head expects " + std::to_string(dim) + " features, got " +
                    std::to_string(x.size()));
  }
  std::vector<double> scaled;
  if (scaling) {
    scaled = scaling->apply(x);
    x = scaled;
  }
  std::array<double, 2> z = bias;
  for (std::size_t k = 0; k < 2; ++k) {
    const double* row = weights.data() + k * dim;
    for (std::size_t d = 0; d < dim; ++d) z[k] += row[d] * x[d];
  }
  return z;
}

namespace {

void check_head_inputs(std::span<const std::vector<double>> features, std::span<const int> labels,
                       std::size_t dim) {
  if (features.size() != labels.size()) throw DataError("feature and label counts differ");
  for (const auto& f : features) {
    if (f.size() != dim) {
      throw DataError("softmax head expects " + std::to_string(dim) + " features, got " +
                      std::to_string(f.size()));
    }
    for (double v : f) {
      if (!std::isfinite(v)) throw DataError("softmax head features must be finite");
    }
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw DataError("softmax head labels must be 0 or 1");
  }
}

// p(class 1) computed stably from the logit difference.
std::array<double, 2> probabilities(const std::array<double, 2>& z) {
  const double top = std::max(z[0], z[1]);
  const double e0 = std::exp(z[0] - top);
  const double e1 = std::exp(z[1] - top);
  return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

}  // namespace

SoftmaxHead init_softmax_head(std::size_t dim, const SoftmaxOptions& options) {
  SoftmaxHead head;
  head.dim = dim;
  head.options = options;
  head.weights.resize(2 * dim);
  Rng rng(options.seed);
  for (auto& w : head.weights) w = 0.01 * rng.normal();
  return head;
}

double softmax_loss(const SoftmaxHead& head, std::span<const std::vector<double>> features,
                    std::span<const int> labels) {
  check_head_inputs(features, labels, head.dim);
  double total = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto z = head.logits(features[i]);
    const double top = std::max(z[0], z[1]);
    const double lse = top + std::log(std::exp(z[0] - top) + std::exp(z[1] - top));
    total += lse - z[static_cast<std::size_t>(labels[i])];
  }
  return total / static_cast<double>(features.size());
}

SoftmaxGradient softmax_gradient(const SoftmaxHead& head,
                                 std::span<const std::vector<double>> features,
                                 std::span<const int> labels) {
  check_head_inputs(features, labels, head.dim);
  SoftmaxGradient g;
  g.weights.assign(2 * head.dim, 0.0);
  const double inv_n = 1.0 / static_cast<double>(features.size());
  std::vector<double> scaled;
  for (std::size_t i = 0; i < features.size(); ++i) {
    std::span<const double> x = features[i];
    if (head.scaling) {
      scaled = head.scaling->apply(x);
      x = scaled;
    }
    const auto p = probabilities(head.logits(features[i]));
    for (std::size_t k = 0; k < 2; ++k) {
      const double r = (p[k] - (labels[i] == static_cast<int>(k) ? 1.0 : 0.0)) * inv_n;
      g.bias[k] += r;
      double* row = g.weights.data() + k * head.dim;
      for (std::size_t d = 0; d < head.dim; ++d) row[d] += r * x[d];
    }
  }
  return g;
}

SoftmaxHead train_softmax_head(std::span<const std::vector<double>> features,
                               std::span<const int> labels, const SoftmaxOptions& options) {
  if (features.empty()) throw DataError("softmax head training needs samples");
  const std::size_t dim = features[0].size();
  check_head_inputs(features, labels, dim);
  const bool has0 = std::find(labels.begin(), labels.end(), 0) != labels.end();
  const bool has1 = std::find(labels.begin(), labels.end(), 1) != labels.end();
  if (!has0 || !has1) throw DataError("softmax head training needs both classes; got a single class");
  if (!(options.learning_rate > 0.0)) throw ConfigError("softmax learning rate must be positive");

  SoftmaxHead head = init_softmax_head(dim, options);
  if (options.standardize) {
    svm::Scaling s{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
    const double n = static_cast<double>(features.size());
    for (const auto& x : features) {
      for (std::size_t d = 0; d < dim; ++d) s.mean[d] += x[d] / n;
    }
    for (const auto& x : features) {
      for (std::size_t d = 0; d < dim; ++d) s.scale[d] += (x[d] - s.mean[d]) * (x[d] - s.mean[d]) / n;
    }
    for (auto& v : s.scale) v = v > 0.0 ? std::sqrt(v) : 1.0;
    head.scaling = std::move(s);
  }
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    head.loss_trace.push_back(softmax_loss(head, features, labels));
    const auto g = softmax_gradient(head, features, labels);
    for (std::size_t i = 0; i < head.weights.size(); ++i) head.weights[i] -= options.learning_rate * g.weights[i];
    for (std::size_t k = 0; k < 2; ++k) head.bias[k] -= options.learning_rate * g.bias[k];
  }
  head.loss_trace.push_back(softmax_loss(head, features, labels));
  return head;
}

std::size_t predict_softmax(const SoftmaxHead& head, std::span<const double> x) {
  const auto z = head.logits(x);
  return z[1] > z[0] ? 1 : 0;
}

}  // namespace featpipe::baselines
