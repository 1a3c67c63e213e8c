#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "featpipe/baselines.hpp"
#include "featpipe/svm.hpp"
#include "featpipe/tuner.hpp"

namespace featpipe {

// Uniform train/predict surface shared by the main pipeline and the
// comparison baselines. Items are indices into the sample store the
// method was built with; labels are class indices (0 or 1).
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual std::string name() const = 0;
  // Values extracted per image, used for the learning-curve feature count.
  virtual std::size_t features_per_image() const = 0;
  virtual void fit(std::span<const std::size_t> items, std::span<const int> labels) = 0;
  virtual int predict(std::size_t item) const = 0;
  // Signed score; non-negative means class 0.
  virtual double decision(std::size_t item) const = 0;
};

struct SvmMethodOptions {
  svm::TrainOptions train;
  // When set, each fit runs the random search first and trains with the
  // winning parameters.
  std::optional<std::size_t> tune_budget;
  tuner::SearchSpace space;
  tuner::CvOptions cv;
};

// SVM on precomputed per-image vectors: fc7 features ("cnn-svm") or raw
// pixels ("rawsvm").
class SvmMethod : public Classifier {
 public:
  SvmMethod(std::string name, std::vector<svm::Sample> samples, SvmMethodOptions options);

  std::string name() const override { return name_; }
  std::size_t features_per_image() const override;
  void fit(std::span<const std::size_t> items, std::span<const int> labels) override;
  int predict(std::size_t item) const override;
  double decision(std::size_t item) const override;

  const svm::SvmModel& model() const { return *model_; }

 private:
  std::string name_;
  std::vector<svm::Sample> samples_;
  SvmMethodOptions options_;
  std::optional<svm::SvmModel> model_;
};

struct BofOptions {
  std::size_t vocabulary_size = 200;
  std::size_t kmeans_iterations = 50;
  // Descriptors sampled from the training images to fit the vocabulary.
  std::size_t max_descriptors = 20000;
  std::uint64_t seed = 0;
  baselines::DescriptorConfig descriptors;
  svm::TrainOptions train;
};

// Bag-of-features histograms classified with an SVM. The vocabulary is
// refitted from the training items on every fit.
class BofMethod : public Classifier {
 public:
  BofMethod(std::vector<std::vector<baselines::Descriptor>> descriptors, BofOptions options);

  std::string name() const override { return "bof"; }
  std::size_t features_per_image() const override { return options_.vocabulary_size; }
  void fit(std::span<const std::size_t> items, std::span<const int> labels) override;
  int predict(std::size_t item) const override;
  double decision(std::size_t item) const override;

 private:
  std::vector<std::vector<baselines::Descriptor>> descriptors_;
  BofOptions options_;
  std::optional<baselines::Vocabulary> vocabulary_;
  std::optional<svm::SvmModel> model_;
};

// Softmax head over frozen network features ("softmax").
class SoftmaxMethod : public Classifier {
 public:
  SoftmaxMethod(std::vector<std::vector<double>> features, baselines::SoftmaxOptions options);

  std::string name() const override { return "softmax"; }
  std::size_t features_per_image() const override;
  void fit(std::span<const std::size_t> items, std::span<const int> labels) override;
  int predict(std::size_t item) const override;
  double decision(std::size_t item) const override;

 private:
  std::vector<std::vector<double>> features_;
  baselines::SoftmaxOptions options_;
  std::optional<baselines::SoftmaxHead> head_;
};

// Class index 0 maps to SVM label +1.
inline int svm_label(int class_index) { return class_index == 0 ? 1 : -1; }
inline int class_index(int svm_sign) { return svm_sign > 0 ? 0 : 1; }

}  // namespace featpipe
