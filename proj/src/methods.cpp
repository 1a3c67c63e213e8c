#include "featpipe/methods.hpp"

#include <algorithm>

#include "featpipe/error.hpp"
#include "featpipe/rng.hpp"

namespace featpipe {

namespace {

void check_item(std::size_t item, std::size_t size) {
  if (item >= size) {
    throw DataError("item " + std::to_string(item) + " out of range for " + std::to_string(size) +
                    " samples");
  }
}

}  // namespace

SvmMethod::SvmMethod(std::string name, std::vector<svm::Sample> samples, SvmMethodOptions options)
    : name_(std::move(name)), samples_(std::move(samples)), options_(std::move(options)) {}

std::size_t SvmMethod::features_per_image() const {
  return samples_.empty() ? 0 : samples_.front().size();
}

void SvmMethod::fit(std::span<const std::size_t> items, std::span<const int> labels) {
  std::vector<svm::Sample> xs;
  std::vector<int> ys;
  for (std::size_t k = 0; k < items.size(); ++k) {
    check_item(items[k], samples_.size());
    xs.push_back(samples_[items[k]]);
    ys.push_back(svm_label(labels[k]));
  }
  svm::TrainOptions train = options_.train;
  if (options_.tune_budget) {
    tuner::CvOptions cv = options_.cv;
    cv.base = train;
    const auto tuned = tuner::optimize(options_.space, xs, ys, *options_.tune_budget, cv);
    train.C = tuned.best.C;
    train.kernel = tuned.best.kernel_spec();
  }
  model_ = svm::train(xs, ys, train);
}

int SvmMethod::predict(std::size_t item) const { return decision(item) >= 0.0 ? 0 : 1; }

double SvmMethod::decision(std::size_t item) const {
  if (!model_) throw Error(ErrorKind::internal, name_ + ": predict before fit");
  check_item(item, samples_.size());
  return svm::decision_value(*model_, samples_[item]);
}

BofMethod::BofMethod(std::vector<std::vector<baselines::Descriptor>> descriptors, BofOptions options)
    : descriptors_(std::move(descriptors)), options_(std::move(options)) {}

void BofMethod::fit(std::span<const std::size_t> items, std::span<const int> labels) {
  std::vector<const baselines::Descriptor*> pool;
  for (std::size_t item : items) {
    check_item(item, descriptors_.size());
    for (const auto& d : descriptors_[item]) pool.push_back(&d);
  }
  if (pool.size() > options_.max_descriptors) {
    Rng rng(options_.seed);
    rng.shuffle(std::span(pool));
    pool.resize(options_.max_descriptors);
  }
  std::vector<baselines::Descriptor> sample;
  sample.reserve(pool.size());
  for (const auto* d : pool) sample.push_back(*d);
  const std::size_t k = std::min(options_.vocabulary_size, sample.size());
  if (k == 0) throw DataError("bof: training images yield no descriptors");
  vocabulary_ = baselines::kmeans(sample, k, options_.kmeans_iterations, options_.seed,
                                  options_.descriptors)
                    .vocabulary;

  std::vector<svm::Sample> xs;
  std::vector<int> ys;
  for (std::size_t n = 0; n < items.size(); ++n) {
    xs.push_back(baselines::encode_descriptors(descriptors_[items[n]], *vocabulary_));
    ys.push_back(svm_label(labels[n]));
  }
  model_ = svm::train(xs, ys, options_.train);
}

int BofMethod::predict(std::size_t item) const { return decision(item) >= 0.0 ? 0 : 1; }

double BofMethod::decision(std::size_t item) const {
  if (!model_) throw Error(ErrorKind::internal, "bof: predict before fit");
  check_item(item, descriptors_.size());
  return svm::decision_value(*model_, baselines::encode_descriptors(descriptors_[item], *vocabulary_));
}

SoftmaxMethod::SoftmaxMethod(std::vector<std::vector<double>> features,
                             baselines::SoftmaxOptions options)
    : features_(std::move(features)), options_(options) {}

std::size_t SoftmaxMethod::features_per_image() const {
  return features_.empty() ? 0 : features_.front().size();
}

void SoftmaxMethod::fit(std::span<const std::size_t> items, std::span<const int> labels) {
  std::vector<std::vector<double>> xs;
  for (std::size_t item : items) {
    check_item(item, features_.size());
    xs.push_back(features_[item]);
  }
  head_ = baselines::train_softmax_head(xs, labels, options_);
}

int SoftmaxMethod::predict(std::size_t item) const {
  if (!head_) throw Error(ErrorKind::internal, "softmax: predict before fit");
  check_item(item, features_.size());
  return static_cast<int>(baselines::predict_softmax(*head_, features_[item]));
}

double SoftmaxMethod::decision(std::size_t item) const {
  if (!head_) throw Error(ErrorKind::internal, "softmax: predict before fit");
  check_item(item, features_.size());
  const auto z = head_->logits(features_[item]);
  return z[0] - z[1];
}

}  // namespace featpipe
