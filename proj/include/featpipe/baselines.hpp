#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "featpipe/imaging.hpp"
#include "featpipe/svm.hpp"

// Comparison methods: raw-pixel vectors, bag-of-features histograms, and a
// softmax classifier trained on frozen network features.
namespace featpipe::baselines {

inline constexpr std::size_t kRawPixelSide = 64;

// 64x64 grayscale (0.299 R + 0.587 G + 0.114 B) / 255, row-major.
std::vector<float> raw_pixel_vector(const Raster& raster);

struct DescriptorConfig {
  std::size_t patch = 16;
  std::size_t stride = 8;
  std::size_t resize = 227;

  friend bool operator==(const DescriptorConfig&, const DescriptorConfig&) = default;
};

using Descriptor = std::vector<float>;

// Dense grayscale patches of the resized image, each normalized to zero
// mean and unit variance. Patches with zero variance are dropped.
std::vector<Descriptor> extract_patch_descriptors(const Raster& raster,
                                                  const DescriptorConfig& config = {});

struct Vocabulary {
  DescriptorConfig config;
  std::vector<Descriptor> centroids;

  std::size_t size() const { return centroids.size(); }
};

struct KMeansResult {
  Vocabulary vocabulary;
  // Sum of squared distances to the nearest centroid, one entry per
  // assignment step.
  std::vector<double> objective_trace;
  std::size_t iterations = 0;
};

// Lloyd iterations from k-means++ seeding. Stops at an assignment fixpoint
// or after `iterations` steps. Empty clusters move to the point farthest
// from its centroid.
KMeansResult kmeans(std::span<const Descriptor> descriptors, std::size_t k, std::size_t iterations,
                    std::uint64_t seed, const DescriptorConfig& config = {});

// Index of the closest centroid; ties resolve to the lowest index.
std::size_t nearest_centroid(const Vocabulary& vocabulary, std::span<const float> descriptor);

// L1-normalized hard-assignment histogram; uniform 1/K when empty.
std::vector<double> encode_descriptors(std::span<const Descriptor> descriptors,
                                       const Vocabulary& vocabulary);
std::vector<double> encode_bof(const Raster& raster, const Vocabulary& vocabulary);

// {"config": {...}, "centroids": [[...], ...]}
std::string serialize(const Vocabulary& vocabulary);
Vocabulary deserialize_vocabulary(std::string_view text);

struct SoftmaxOptions {
  double learning_rate = 0.01;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
  bool standardize = false;
};

// Two-class softmax regression head.
struct SoftmaxHead {
  std::size_t dim = 0;
  std::vector<double> weights;  // 2 x dim, row-major
  std::array<double, 2> bias{};
  SoftmaxOptions options;
  std::optional<svm::Scaling> scaling;
  std::vector<double> loss_trace;  // mean cross-entropy before each epoch

  std::array<double, 2> logits(std::span<const double> x) const;
};

struct SoftmaxGradient {
  std::vector<double> weights;
  std::array<double, 2> bias{};
};

// Seeded N(0, 0.01^2) weights and zero bias.
SoftmaxHead init_softmax_head(std::size_t dim, const SoftmaxOptions& options);

// Mean cross-entropy over the batch. labels are class indices 0/1.
double softmax_loss(const SoftmaxHead& head, std::span<const std::vector<double>> features,
                    std::span<const int> labels);
SoftmaxGradient softmax_gradient(const SoftmaxHead& head,
                                 std::span<const std::vector<double>> features,
                                 std::span<const int> labels);

// Full-batch gradient descent from init_softmax_head.
SoftmaxHead train_softmax_head(std::span<const std::vector<double>> features,
                               std::span<const int> labels, const SoftmaxOptions& options);

// argmax of softmax(Wx + b); ties resolve to class 0.
std::size_t predict_softmax(const SoftmaxHead& head, std::span<const double> x);

}  // namespace featpipe::baselines
