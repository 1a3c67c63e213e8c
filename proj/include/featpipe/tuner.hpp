#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "featpipe/svm.hpp"

// Seeded random search over SVM hyperparameters scored by stratified
// k-fold cross-validation error.
namespace featpipe::tuner {

struct Range {
  double lower = 0.0;
  double upper = 0.0;
};

struct SearchSpace {
  Range c{1e-3, 1e3};
  Range gamma{1e-6, 1e1};
  std::vector<svm::KernelKind> kernels{svm::KernelKind::rbf};

  // Throws ConfigError for empty kernel list or a non-positive/inverted range.
  void validate() const;
};

struct Params {
  double C = 1.0;
  double gamma = 1.0;
  svm::KernelKind kernel = svm::KernelKind::rbf;

  svm::KernelSpec kernel_spec() const;
};

struct CvOptions {
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  // Solver settings other than C and kernel.
  svm::TrainOptions base;
  unsigned threads = 1;
};

// Fold index (0..folds-1) per sample; each class is shuffled with the seed
// and dealt round-robin across folds.
std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t folds,
                                          std::uint64_t seed);

// Mean over folds of the held-out misclassification rate, in [0, 1].
double cv_objective(std::span<const svm::Sample> samples, std::span<const int> labels,
                    const Params& params, const CvOptions& options);

struct TraceEntry {
  std::size_t index = 0;  // 1-based evaluation number
  Params params;
  double objective = 0.0;
  double incumbent = 0.0;  // best objective up to and including this entry
};

struct TuneResult {
  Params best;
  double best_objective = 0.0;
  std::vector<TraceEntry> trace;
};

// Evaluates `budget` configurations. The first is always the default
// (C = 1, gamma = 1/dim, first listed kernel); the rest are log-uniform
// draws. Ties keep the earliest evaluation.
TuneResult optimize(const SearchSpace& space, std::span<const svm::Sample> samples,
                    std::span<const int> labels, std::size_t budget, const CvOptions& options);

// `eval_index,C,gamma,kernel,objective,incumbent`
void write_trace_csv(std::span<const TraceEntry> trace, const std::filesystem::path& path);

}  // namespace featpipe::tuner
