#include "featpipe/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "featpipe/error.hpp"
#include "featpipe/rng.hpp"

namespace featpipe {

SplitResult split_balanced(const DatasetManifest& manifest, std::size_t per_class_train,
                           std::uint64_t seed, bool mirror_test) {
  if (per_class_train == 0) throw ConfigError("per-class training count must be positive");
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    by_class.at(manifest.records[i].label).push_back(i);
  }
  const std::size_t needed = mirror_test ? 2 * per_class_train : per_class_train + 1;
  for (std::size_t c = 0; c < 2; ++c) {
    if (by_class[c].size() < needed) {
      throw DataError("class " + manifest.classes[c] + " has " + std::to_string(by_class[c].size()) +
                      " records, need " + std::to_string(needed) + " for " +
                      std::to_string(per_class_train) + " training images per class");
    }
  }
  Rng rng(seed);
  SplitResult out;
  out.train.classes = manifest.classes;
  out.test.classes = manifest.classes;
  for (auto& members : by_class) {
    rng.shuffle(std::span(members));
    const std::size_t test_end = mirror_test ? 2 * per_class_train : members.size();
    for (std::size_t k = 0; k < test_end; ++k) {
      ImageRecord rec = manifest.records[members[k]];
      const bool to_train = k < per_class_train;
      rec.split = to_train ? Split::train : Split::test;
      (to_train ? out.train : out.test).records.push_back(std::move(rec));
    }
  }
  return out;
}

ConfusionMatrix::ConfusionMatrix(ClassNames classes, std::array<std::array<std::size_t, 2>, 2> counts)
    : classes_(std::move(classes)), counts_(counts) {}

std::size_t ConfusionMatrix::total() const {
  return counts_[0][0] + counts_[0][1] + counts_[1][0] + counts_[1][1];
}

std::size_t ConfusionMatrix::correct() const { return counts_[0][0] + counts_[1][1]; }

double ConfusionMatrix::accuracy() const {
  return total() ? static_cast<double>(correct()) / static_cast<double>(total()) : 0.0;
}

double ConfusionMatrix::cell_share(std::size_t actual, std::size_t predicted) const {
  return total() ? static_cast<double>(counts_[actual][predicted]) / static_cast<double>(total()) : 0.0;
}

std::optional<double> ConfusionMatrix::row_rate(std::size_t actual) const {
  const std::size_t row = counts_[actual][0] + counts_[actual][1];
  if (row == 0) return std::nullopt;
  return static_cast<double>(counts_[actual][actual]) / static_cast<double>(row);
}

std::optional<double> ConfusionMatrix::column_rate(std::size_t predicted) const {
  const std::size_t col = counts_[0][predicted] + counts_[1][predicted];
  if (col == 0) return std::nullopt;
  return static_cast<double>(counts_[predicted][predicted]) / static_cast<double>(col);
}

ConfusionMatrix confusion(std::span<const std::string> predicted, std::span<const std::string> actual,
                          const ClassNames& classes) {
  if (predicted.size() != actual.size()) {
    throw DataError("got " + std::to_string(predicted.size()) + " predictions for " +
                    std::to_string(actual.size()) + " labels");
  }
  if (predicted.empty()) throw DataError("confusion matrix needs at least one prediction");
  std::array<std::array<std::size_t, 2>, 2> counts{};
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const auto a = classes.index_of(actual[i]);
    const auto p = classes.index_of(predicted[i]);
    if (!a) throw DataError("unknown class name '" + actual[i] + "'");
    if (!p) throw DataError("unknown class name '" + predicted[i] + "'");
    ++counts[*a][*p];
  }
  return ConfusionMatrix(classes, counts);
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * fraction);
  return buf;
}

std::vector<LabeledItem> balanced_order(std::span<const LabeledItem> pool, std::uint64_t seed) {
  std::array<std::vector<LabeledItem>, 2> by_class;
  for (const auto& it : pool) {
    if (it.label != 0 && it.label != 1) throw DataError("labels must be class indices 0 or 1");
    by_class[static_cast<std::size_t>(it.label)].push_back(it);
  }
  Rng rng(seed);
  for (auto& members : by_class) rng.shuffle(std::span(members));
  std::vector<LabeledItem> order;
  order.reserve(pool.size());
  const std::size_t longest = std::max(by_class[0].size(), by_class[1].size());
  for (std::size_t k = 0; k < longest; ++k) {
    for (const auto& members : by_class) {
      if (k < members.size()) order.push_back(members[k]);
    }
  }
  return order;
}

std::size_t subset_size(double fraction, std::size_t pool_size) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("learning-curve fractions must lie in (0, 1]");
  }
  const auto n = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(pool_size)));
  if (n < 2) {
    throw DataError("fraction " + std::to_string(fraction) + " of " + std::to_string(pool_size) +
                    " images leaves fewer than one image per class");
  }
  return n;
}

std::vector<LearningCurvePoint> learning_curve(Classifier& method, std::span<const LabeledItem> train,
                                               std::span<const LabeledItem> test,
                                               std::span<const double> fractions, std::uint64_t seed) {
  if (test.empty()) throw DataError("learning curve needs a non-empty test set");
  if (!std::is_sorted(fractions.begin(), fractions.end())) {
    throw ConfigError("learning-curve fractions must be sorted");
  }
  const auto order = balanced_order(train, seed);
  std::vector<LearningCurvePoint> points;
  for (double f : fractions) {
    const std::size_t n = subset_size(f, order.size());
    std::vector<std::size_t> items;
    std::vector<int> labels;
    for (std::size_t k = 0; k < n; ++k) {
      items.push_back(order[k].item);
      labels.push_back(order[k].label);
    }
    if (std::count(labels.begin(), labels.end(), 0) == 0 ||
        std::count(labels.begin(), labels.end(), 1) == 0) {
      throw DataError("fraction " + std::to_string(f) + " leaves a class without training images");
    }
    method.fit(items, labels);
    std::size_t right = 0;
    for (const auto& t : test) right += method.predict(t.item) == t.label;
    points.push_back({f, n, n * method.features_per_image(),
                      static_cast<double>(right) / static_cast<double>(test.size()), method.name(),
                      seed});
  }
  return points;
}

FeatureStats feature_stats(std::span<const std::vector<float>> features, double bin_width) {
  if (features.empty()) throw DataError("feature statistics need at least one vector");
  if (!(bin_width > 0.0)) throw ConfigError("histogram bin width must be positive");
  FeatureStats s;
  s.bin_width = bin_width;
  s.min = std::numeric_limits<float>::infinity();
  s.max = -std::numeric_limits<float>::infinity();
  for (const auto& f : features) {
    for (float v : f) {
      if (!std::isfinite(v)) throw DataError("feature value is not finite");
      s.min = std::min(s.min, v);
      s.max = std::max(s.max, v);
      ++s.total;
    }
  }
  if (s.total == 0) throw DataError("feature vectors are empty");
  auto bin_of = [&](float v) { return static_cast<long>(std::floor(v / bin_width + 0.5)); };
  s.first_bin = bin_of(s.min);
  s.counts.assign(static_cast<std::size_t>(bin_of(s.max) - s.first_bin + 1), 0);
  for (const auto& f : features) {
    for (float v : f) ++s.counts[static_cast<std::size_t>(bin_of(v) - s.first_bin)];
  }
  const auto top = std::max_element(s.counts.begin(), s.counts.end());
  s.mode_bin = s.first_bin + static_cast<long>(top - s.counts.begin());
  return s;
}

}  // namespace featpipe
