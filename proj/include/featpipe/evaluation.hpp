#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "featpipe/dataset.hpp"
#include "featpipe/methods.hpp"

namespace featpipe {

struct SplitResult {
  DatasetManifest train;
  DatasetManifest test;
};

// Seeded per-class shuffle; the first `per_class_train` records of each
// class go to train. With `mirror_test` the test side takes the next
// `per_class_train` records of each class, otherwise every remaining one.
SplitResult split_balanced(const DatasetManifest& manifest, std::size_t per_class_train,
                           std::uint64_t seed, bool mirror_test = false);

// 2x2 counts indexed [actual][predicted].
class ConfusionMatrix {
 public:
  ConfusionMatrix(ClassNames classes, std::array<std::array<std::size_t, 2>, 2> counts);

  const ClassNames& classes() const { return classes_; }
  std::size_t count(std::size_t actual, std::size_t predicted) const { return counts_[actual][predicted]; }
  std::size_t total() const;
  std::size_t correct() const;
  double accuracy() const;
  // Fraction of all predictions falling in this cell.
  double cell_share(std::size_t actual, std::size_t predicted) const;
  // Correct fraction of a row (recall); nullopt for an empty row.
  std::optional<double> row_rate(std::size_t actual) const;
  // Correct fraction of a column (precision); nullopt for an empty column.
  std::optional<double> column_rate(std::size_t predicted) const;

 private:
  ClassNames classes_;
  std::array<std::array<std::size_t, 2>, 2> counts_;
};

// Throws DataError on mismatched or empty inputs and unknown class names.
ConfusionMatrix confusion(std::span<const std::string> predicted, std::span<const std::string> actual,
                          const ClassNames& classes);

// One decimal place with a percent sign, e.g. 0.49524 -> "49.5%".
std::string format_percent(double fraction);

struct LabeledItem {
  std::size_t item = 0;  // index into the method's sample store
  int label = 0;         // class index
};

struct LearningCurvePoint {
  double fraction = 0.0;
  std::size_t n_images = 0;
  std::size_t n_features = 0;
  double accuracy = 0.0;
  std::string method;
  std::uint64_t seed = 0;
};

// Interleaved per-class shuffles: every prefix is class-balanced within one.
std::vector<LabeledItem> balanced_order(std::span<const LabeledItem> pool, std::uint64_t seed);

// round(f * |pool|), rejecting prefixes that cannot hold both classes.
std::size_t subset_size(double fraction, std::size_t pool_size);

// For each fraction f (sorted, in (0, 1]), fits `method` on the first
// round(f * |train|) items of balanced_order(train, seed) and scores it on
// the whole test set.
std::vector<LearningCurvePoint> learning_curve(Classifier& method, std::span<const LabeledItem> train,
                                               std::span<const LabeledItem> test,
                                               std::span<const double> fractions, std::uint64_t seed);

struct FeatureStats {
  float min = 0.0f;
  float max = 0.0f;
  double bin_width = 0.0;
  // Bin b covers [(b - 1/2) w, (b + 1/2) w); counts[i] is bin first_bin + i.
  long first_bin = 0;
  std::vector<std::size_t> counts;
  long mode_bin = 0;  // lowest bin among those with the largest count
  std::size_t total = 0;

  double bin_lower(long bin) const { return (static_cast<double>(bin) - 0.5) * bin_width; }
  double bin_upper(long bin) const { return (static_cast<double>(bin) + 0.5) * bin_width; }
};

FeatureStats feature_stats(std::span<const std::vector<float>> features, double bin_width);

}  // namespace featpipe
