#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Binary kernel SVM trained by sequential minimal optimization.
namespace featpipe::svm {

enum class KernelKind { linear, rbf };

std::string_view to_string(KernelKind kind);
KernelKind parse_kernel_kind(std::string_view text);

struct KernelSpec {
  KernelKind kind = KernelKind::linear;
  double gamma = 0.0;  // rbf only, must be positive

  static KernelSpec linear() { return {KernelKind::linear, 0.0}; }
  static KernelSpec rbf(double gamma) { return {KernelKind::rbf, gamma}; }

  // Throws ConfigError on a non-positive rbf gamma.
  void validate() const;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

using Sample = std::vector<double>;

// linear: <x, y>; rbf: exp(-gamma * |x - y|^2).
double kernel_eval(const KernelSpec& kernel, std::span<const double> x, std::span<const double> y);

struct TrainOptions {
  double C = 1.0;
  KernelSpec kernel = KernelSpec::linear();
  double tol = 1e-3;
  // Stop after max_passes * n consecutive updates that leave every
  // multiplier unchanged.
  int max_passes = 10;
  // Hard cap on SMO updates; 0 picks max(10^6, 100 n).
  std::size_t max_iterations = 0;
  std::uint64_t seed = 0;
  // z-score features with training statistics before solving.
  bool standardize = false;
};

// Per-feature affine map x -> (x - mean) / scale.
struct Scaling {
  std::vector<double> mean;
  std::vector<double> scale;

  Sample apply(std::span<const double> x) const;
};

struct SvmModel {
  std::vector<Sample> support_vectors;
  std::vector<double> dual_coefs;  // alpha_i * y_i
  double bias = 0.0;
  KernelSpec kernel;
  std::array<std::string, 2> class_map{"+1", "-1"};  // [0] for +1, [1] for -1
  double C = 1.0;
  double tol = 1e-3;
  std::size_t iterations = 0;
  std::optional<Scaling> scaling;

  std::size_t dimension() const { return support_vectors.empty() ? 0 : support_vectors[0].size(); }

  // Throws ModelError when the stored model breaks an invariant.
  void validate() const;
};

// Full dual solution over the training set, exposed for verification.
struct DualSolution {
  std::vector<double> alpha;
  double bias = 0.0;
  std::size_t iterations = 0;
  double final_gap = 0.0;  // max violating pair gap at exit
};

// Solves the dual on (already scaled) samples. labels are +1 / -1.
DualSolution solve_dual(std::span<const Sample> samples, std::span<const int> labels,
                        const TrainOptions& options);

// 1/2 a'Qa - sum(a) negated, i.e. the maximized dual objective.
double dual_objective(std::span<const Sample> samples, std::span<const int> labels,
                      std::span<const double> alpha, const KernelSpec& kernel);

// Throws DataError for fewer than two samples, a single class, label values
// other than +1/-1, ragged or non-finite features.
SvmModel train(std::span<const Sample> samples, std::span<const int> labels,
               const TrainOptions& options,
               const std::array<std::string, 2>& class_map = {"+1", "-1"});

double decision_value(const SvmModel& model, std::span<const double> x);

// +1 or -1; an exact zero decision maps to +1.
int predict_sign(const SvmModel& model, std::span<const double> x);

const std::string& predict(const SvmModel& model, std::span<const double> x);

// Canonical JSON. Doubles are written in shortest round-trip form so that
// serialize(deserialize(s)) == s.
std::string serialize(const SvmModel& model);
SvmModel deserialize(std::string_view text);

}  // namespace featpipe::svm
