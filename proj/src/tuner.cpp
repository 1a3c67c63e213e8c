#include "featpipe/tuner.hpp"

#include <cmath>
#include <fstream>

#include "featpipe/csv.hpp"
#include "featpipe/error.hpp"
#include "featpipe/parallel.hpp"
#include "featpipe/rng.hpp"

namespace featpipe::tuner {

void SearchSpace::validate() const {
  if (kernels.empty()) throw ConfigError("search space lists no kernels");
  for (const auto& [name, r] : {std::pair{"C", c}, std::pair{"gamma", gamma}}) {
    if (!(r.lower > 0.0) || !(r.lower < r.upper)) {
      throw ConfigError(std::string("search range for ") + name + " must satisfy 0 < lower < upper");
    }
  }
}

svm::KernelSpec Params::kernel_spec() const {
  return kernel == svm::KernelKind::rbf ? svm::KernelSpec::rbf(gamma) : svm::KernelSpec::linear();
}

std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t folds,
                                          std::uint64_t seed) {
  if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] > 0 ? positives : negatives).push_back(i);
  for (const auto* cls : {&positives, &negatives}) {
    if (cls->size() < folds) {
      throw DataError("class with " + std::to_string(cls->size()) +
                      " members is too small for " + std::to_string(folds) + "-fold stratification");
    }
  }
  Rng rng(seed);
  std::vector<std::size_t> assignment(labels.size());
  for (auto* cls : {&positives, &negatives}) {
    rng.shuffle(std::span(*cls));
    for (std::size_t k = 0; k < cls->size(); ++k) assignment[(*cls)[k]] = k % folds;
  }
  return assignment;
}

double cv_objective(std::span<const svm::Sample> samples, std::span<const int> labels,
                    const Params& params, const CvOptions& options) {
  const auto fold_of = stratified_folds(labels, options.folds, options.seed);
  svm::TrainOptions train = options.base;
  train.C = params.C;
  train.kernel = params.kernel_spec();

  std::vector<double> fold_error(options.folds, 0.0);
  for (std::size_t f = 0; f < options.folds; ++f) {
    std::vector<svm::Sample> xs;
    std::vector<int> ys;
    std::vector<std::size_t> held;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (fold_of[i] == f) {
        held.push_back(i);
      } else {
        xs.push_back(samples[i]);
        ys.push_back(labels[i]);
      }
    }
    const auto model = svm::train(xs, ys, train);
    std::size_t wrong = 0;
    for (std::size_t i : held) wrong += svm::predict_sign(model, samples[i]) != labels[i];
    fold_error[f] = static_cast<double>(wrong) / static_cast<double>(held.size());
  }
  double total = 0.0;
  for (double e : fold_error) total += e;
  return total / static_cast<double>(options.folds);
}

TuneResult optimize(const SearchSpace& space, std::span<const svm::Sample> samples,
                    std::span<const int> labels, std::size_t budget, const CvOptions& options) {
  space.validate();
  if (budget == 0) throw ConfigError("tuning budget must be at least 1");
  if (samples.empty()) throw DataError("tuning needs samples");

  // Draw every configuration up front so the trace order never depends on
  // evaluation scheduling.
  std::vector<Params> candidates;
  candidates.reserve(budget);
  candidates.push_back({1.0, 1.0 / static_cast<double>(samples[0].size()), space.kernels.front()});
  Rng rng(options.seed);
  while (candidates.size() < budget) {
    Params p;
    p.kernel = space.kernels[rng.below(space.kernels.size())];
    p.C = rng.log_uniform(space.c.lower, space.c.upper);
    p.gamma = rng.log_uniform(space.gamma.lower, space.gamma.upper);
    candidates.push_back(p);
  }

  std::vector<double> objectives(budget);
  CvOptions inner = options;
  inner.threads = 1;
  parallel_for(budget, options.threads,
               [&](std::size_t k) { objectives[k] = cv_objective(samples, labels, candidates[k], inner); });

  TuneResult result;
  result.best_objective = objectives[0];
  result.best = candidates[0];
  for (std::size_t k = 0; k < budget; ++k) {
    if (objectives[k] < result.best_objective) {
      result.best_objective = objectives[k];
      result.best = candidates[k];
    }
    result.trace.push_back({k + 1, candidates[k], objectives[k], result.best_objective});
  }
  return result;
}

void write_trace_csv(std::span<const TraceEntry> trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "eval_index,C,gamma,kernel,objective,incumbent\n";
  for (const auto& e : trace) {
    out << e.index << ',' << csv::format_double(e.params.C) << ',' << csv::format_double(e.params.gamma)
        << ',' << svm::to_string(e.params.kernel) << ',' << csv::format_double(e.objective) << ','
        << csv::format_double(e.incumbent) << '\n';
  }
  if (!out) throw ConfigError("failed writing " + path.string());
}

}  // namespace featpipe::tuner
