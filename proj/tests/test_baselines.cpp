#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "featpipe/baselines.hpp"
#include "featpipe/error.hpp"
#include "support/gradcheck.hpp"

using namespace featpipe;
using namespace featpipe::baselines;

namespace {

Raster noise_image(std::size_t side, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> u(0, 255);
  Raster r(side, side);
  for (auto& p : r.pixels) p = static_cast<std::uint8_t>(u(gen));
  return r;
}

std::vector<Descriptor> random_points(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<float> nd(0.0f, 1.0f);
  std::vector<Descriptor> pts(n, Descriptor(dim));
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : pts[i]) v = nd(gen) + static_cast<float>(i % 3) * 4.0f;
  }
  return pts;
}

}  // namespace

TEST(RawPixels, LengthRangeAndLuma) {
  const auto v = raw_pixel_vector(noise_image(100, 1));
  ASSERT_EQ(v.size(), 4096u);
  for (float x : v) {
    EXPECT_GE(x, 0.0f);
    EXPECT_LE(x, 1.0f);
  }
  Raster red(30, 20);
  for (std::size_t i = 0; i < red.pixels.size(); i += 3) red.pixels[i] = 255;
  for (float x : raw_pixel_vector(red)) EXPECT_NEAR(x, 0.299f, 1e-6f);
}

TEST(Descriptors, DenseGridIsZeroMeanUnitVariance) {
  const auto ds = extract_patch_descriptors(noise_image(227, 2));
  ASSERT_EQ(ds.size(), 27u * 27u);
  for (const auto& d : ds) {
    ASSERT_EQ(d.size(), 256u);
    double mean = 0.0, var = 0.0;
    for (float v : d) mean += v;
    mean /= 256.0;
    for (float v : d) var += (v - mean) * (v - mean);
    var /= 256.0;
    EXPECT_NEAR(mean, 0.0, 1e-5);
    EXPECT_NEAR(var, 1.0, 1e-4);
  }
}

TEST(Descriptors, FlatPatchesAreDropped) {
  EXPECT_TRUE(extract_patch_descriptors(Raster(50, 50, 90)).empty());
  // Left half flat, right half noisy: only patches touching the noise survive.
  Raster r = noise_image(227, 3);
  for (std::size_t y = 0; y < 227; ++y) {
    for (std::size_t x = 0; x < 100; ++x) {
      for (std::size_t c = 0; c < 3; ++c) r.at(x, y, c) = 40;
    }
  }
  const auto ds = extract_patch_descriptors(r);
  EXPECT_GT(ds.size(), 0u);
  EXPECT_LT(ds.size(), 27u * 27u);
  DescriptorConfig bad;
  bad.stride = 0;
  EXPECT_THROW(extract_patch_descriptors(r, bad), ConfigError);
}

TEST(KMeans, ObjectiveNeverIncreases) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto pts = random_points(120, 8, seed);
    const auto result = kmeans(pts, 5, 30, seed);
    ASSERT_FALSE(result.objective_trace.empty());
    for (std::size_t i = 1; i < result.objective_trace.size(); ++i) {
      EXPECT_LE(result.objective_trace[i], result.objective_trace[i - 1] * (1.0 + 1e-6)) << seed;
    }
    EXPECT_EQ(result.vocabulary.size(), 5u);
  }
}

TEST(KMeans, SingleClusterIsTheMean) {
  const auto pts = random_points(30, 4, 7);
  const auto result = kmeans(pts, 1, 10, 1);
  for (std::size_t d = 0; d < 4; ++d) {
    double mean = 0.0;
    for (const auto& p : pts) mean += p[d];
    EXPECT_NEAR(result.vocabulary.centroids[0][d], mean / 30.0, 1e-4);
  }
}

TEST(KMeans, SeededAndValidated) {
  const auto pts = random_points(60, 3, 9);
  const auto a = kmeans(pts, 4, 20, 5);
  const auto b = kmeans(pts, 4, 20, 5);
  EXPECT_EQ(a.vocabulary.centroids, b.vocabulary.centroids);
  EXPECT_EQ(a.objective_trace, b.objective_trace);
  EXPECT_THROW(kmeans(pts, 0, 5, 1), ConfigError);
  EXPECT_THROW(kmeans(random_points(3, 3, 1), 4, 5, 1), DataError);
}

TEST(KMeans, NearestCentroidTieGoesToLowestIndex) {
  Vocabulary v;
  v.centroids = {{1.0f, 0.0f}, {-1.0f, 0.0f}, {0.0f, 5.0f}};
  const std::vector<float> mid{0.0f, 0.0f};
  EXPECT_EQ(nearest_centroid(v, mid), 0u);
  const std::vector<float> right{0.9f, 0.1f};
  EXPECT_EQ(nearest_centroid(v, right), 0u);
  const std::vector<float> up{0.0f, 4.0f};
  EXPECT_EQ(nearest_centroid(v, up), 2u);
  const std::vector<float> wrong{1.0f};
  EXPECT_THROW(nearest_centroid(v, wrong), DataError);
}

TEST(Bof, HistogramIsL1NormalizedOrUniform) {
  const auto pts = random_points(90, 256, 4);
  const auto vocab = kmeans(pts, 6, 10, 2).vocabulary;
  const auto h = encode_descriptors(std::span(pts).first(17), vocab);
  ASSERT_EQ(h.size(), 6u);
  EXPECT_NEAR(std::accumulate(h.begin(), h.end(), 0.0), 1.0, 1e-12);
  for (double x : h) EXPECT_NEAR(x * 17.0, std::round(x * 17.0), 1e-9);
  const auto empty = encode_descriptors({}, vocab);
  for (double x : empty) EXPECT_DOUBLE_EQ(x, 1.0 / 6.0);
  const auto flat = encode_bof(Raster(40, 40, 10), vocab);
  EXPECT_EQ(flat, empty);
}

TEST(Bof, VocabularySerializationRoundTrips) {
  Vocabulary v;
  v.config.patch = 2;
  v.config.stride = 1;
  v.config.resize = 10;
  v.centroids = {{0.1f, -2.5f, 3.0f, 1e-7f}, {0.0f, 1.0f, 2.0f, 3.0f}};
  const auto text = serialize(v);
  const auto back = deserialize_vocabulary(text);
  EXPECT_EQ(back.config, v.config);
  EXPECT_EQ(back.centroids, v.centroids);
  EXPECT_EQ(serialize(back), text);
  EXPECT_THROW(deserialize_vocabulary("{"), ModelError);
  EXPECT_THROW(deserialize_vocabulary(R"({"config":{"patch":2,"stride":1,"resize":10},"centroids":[]})"),
               ModelError);
  EXPECT_THROW(deserialize_vocabulary(R"({"config":{"patch":2,"stride":1,"resize":10},"centroids":[[1,2]]})"),
               ModelError);
}

TEST(Softmax, AnalyticGradientMatchesCentralDifferences) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    EXPECT_LT(gradcheck::softmax_max_relative_error(seed), 1e-4) << seed;
  }
}

TEST(Softmax, TrainingReducesLossAndSeparates) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) {
    const int c = i % 2;
    x.push_back({nd(gen) + (c ? -2.0 : 2.0), nd(gen), 100.0 + nd(gen)});
    y.push_back(c);
  }
  SoftmaxOptions opts;
  opts.learning_rate = 0.5;
  opts.epochs = 100;
  opts.standardize = true;
  const auto head = train_softmax_head(x, y, opts);
  ASSERT_EQ(head.loss_trace.size(), 101u);
  EXPECT_LT(head.loss_trace.back(), head.loss_trace.front());
  for (std::size_t i = 1; i < head.loss_trace.size(); ++i) {
    EXPECT_LE(head.loss_trace[i], head.loss_trace[i - 1] + 1e-12);
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < x.size(); ++i) correct += predict_softmax(head, x[i]) == static_cast<std::size_t>(y[i]);
  EXPECT_GE(correct, 38u);
}

TEST(Softmax, TiesPredictClassZeroAndInputsAreChecked) {
  SoftmaxHead head = init_softmax_head(3, SoftmaxOptions{});
  std::fill(head.weights.begin(), head.weights.end(), 0.0);
  const std::vector<double> x{1.0, 2.0, 3.0};
  EXPECT_EQ(predict_softmax(head, x), 0u);
  const std::vector<double> short_x{1.0};
  EXPECT_THROW(predict_softmax(head, short_x), DataError);
  const std::vector<std::vector<double>> xs{{1.0}, {2.0}};
  const std::vector<int> one_class{0, 0};
  EXPECT_THROW(train_softmax_head(xs, one_class, SoftmaxOptions{}), DataError);
  const std::vector<int> bad_label{0, 2};
  EXPECT_THROW(train_softmax_head(xs, bad_label, SoftmaxOptions{}), DataError);
  SoftmaxOptions zero_lr;
  zero_lr.learning_rate = 0.0;
  const std::vector<int> ok{0, 1};
  EXPECT_THROW(train_softmax_head(xs, ok, zero_lr), ConfigError);
}
