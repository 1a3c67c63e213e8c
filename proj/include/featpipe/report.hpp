#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "featpipe/evaluation.hpp"

// CSV and standalone SVG 1.1 renderings of evaluation artifacts. Every
// renderer is a pure function of its inputs, so output bytes are stable.
namespace featpipe::report {

// Throws ConfigError when the path cannot be written.
void write_text(const std::filesystem::path& path, std::string_view content);

// `method,fraction,n_images,n_features,accuracy,seed`
std::string learning_curve_csv(std::span<const LearningCurvePoint> points);

// `actual,predicted,count`
std::string confusion_csv(const ConfusionMatrix& matrix);

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::optional<std::pair<double, double>> x_range;
  std::optional<std::pair<double, double>> y_range;
  bool step = false;  // draw as a staircase (incumbent traces)
};

// Axes with ticks, one polyline per non-empty series, and a legend.
std::string line_chart_svg(std::span<const Series> series, const ChartOptions& options);

// Grid in the layout of a classification confusion plot: counts with
// share-of-total in the 2x2 body, per-row and per-column correct rates in
// the margins, overall accuracy in the corner.
std::string confusion_svg(const ConfusionMatrix& matrix);

// Bars over [lo, hi] for a feature histogram.
std::string histogram_svg(const FeatureStats& stats, double lo, double hi, const std::string& title);

// `bin_lower,bin_upper,count`
std::string histogram_csv(const FeatureStats& stats);

// One series per method, x = fraction, y = accuracy.
std::vector<Series> learning_curve_series(std::span<const LearningCurvePoint> points);

}  // namespace featpipe::report
