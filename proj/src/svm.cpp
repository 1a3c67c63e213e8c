#include "featpipe/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "featpipe/error.hpp"
#include "featpipe/rng.hpp"
#include "json.hpp"

namespace featpipe::svm {

using nlohmann::json;

std::string_view to_string(KernelKind kind) { return kind == KernelKind::rbf ? "rbf" : "linear"; }

KernelKind parse_kernel_kind(std::string_view text) {
  if (text == "linear") return KernelKind::linear;
  if (text == "rbf") return KernelKind::rbf;
  throw ConfigError("unknown kernel '" + std::string(text) + "' (expected linear or rbf)");
}

void KernelSpec::validate() const {
  if (kind == KernelKind::rbf && !(gamma > 0.0 && std::isfinite(gamma))) {
    throw ConfigError("rbf kernel needs gamma > 0");
  }
}

double kernel_eval(const KernelSpec& kernel, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DataError("kernel arguments differ in length: " + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()));
  }
  if (kernel.kind == KernelKind::linear) {
    return std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
  }
  double dist = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    dist += d * d;
  }
  return std::exp(-kernel.gamma * dist);
}

Sample Scaling::apply(std::span<const double> x) const {
  if (x.size() != mean.size()) {
    throw DataError("feature length " + std::to_string(x.size()) + " does not match model dimension " +
                    std::to_string(mean.size()));
  }
  Sample out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean[i]) / scale[i];
  return out;
}

namespace {

// Kernel rows over the training set: fully cached below a size limit,
// computed on demand above it.
class KernelRows {
 public:
  KernelRows(std::span<const Sample> samples, const KernelSpec& kernel)
      : samples_(samples), kernel_(kernel), n_(samples.size()) {
    if (n_ <= kFullCacheLimit) {
      full_.resize(n_ * n_);
      for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = i; j < n_; ++j) {
          const double k = kernel_eval(kernel_, samples_[i], samples_[j]);
          full_[i * n_ + j] = k;
          full_[j * n_ + i] = k;
        }
      }
    }
  }

  std::span<const double> row(std::size_t i, std::vector<double>& scratch) const {
    if (!full_.empty()) return std::span(full_).subspan(i * n_, n_);
    scratch.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) scratch[j] = kernel_eval(kernel_, samples_[i], samples_[j]);
    return scratch;
  }

  double diag(std::size_t i) const {
    return full_.empty() ? kernel_eval(kernel_, samples_[i], samples_[i]) : full_[i * n_ + i];
  }

 private:
  static constexpr std::size_t kFullCacheLimit = 4000;
  std::span<const Sample> samples_;
  KernelSpec kernel_;
  std::size_t n_;
  std::vector<double> full_;
};

void check_training_set(std::span<const Sample> samples, std::span<const int> labels) {
  if (samples.size() != labels.size()) {
    throw DataError("got " + std::to_string(samples.size()) + " samples but " +
                    std::to_string(labels.size()) + " labels");
  }
  if (samples.size() < 2) throw DataError("SVM training needs at least two samples");
  bool pos = false;
  bool neg = false;
  for (int y : labels) {
    if (y == 1) {
      pos = true;
    } else if (y == -1) {
      neg = true;
    } else {
      throw DataError("SVM labels must be +1 or -1, got " + std::to_string(y));
    }
  }
  if (!pos || !neg) throw DataError("SVM training needs both classes; got a single class");
  const std::size_t dim = samples[0].size();
  if (dim == 0) throw DataError("SVM samples must be non-empty");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].size() != dim) {
      throw DataError("sample " + std::to_string(i) + " has dimension " +
                      std::to_string(samples[i].size()) + ", expected " + std::to_string(dim));
    }
    for (double v : samples[i]) {
      if (!std::isfinite(v)) throw DataError("sample " + std::to_string(i) + " has a non-finite value");
    }
  }
}

}  // namespace

DualSolution solve_dual(std::span<const Sample> samples, std::span<const int> labels,
                        const TrainOptions& options) {
  check_training_set(samples, labels);
  options.kernel.validate();
  if (!(options.C > 0.0) || !std::isfinite(options.C)) throw ConfigError("SVM C must be positive");
  if (!(options.tol > 0.0)) throw ConfigError("SVM tol must be positive");

  const std::size_t n = samples.size();
  const double C = options.C;
  const KernelRows kernel(samples, options.kernel);
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // gradient of 1/2 a'Qa - e'a
  std::vector<double> y(labels.begin(), labels.end());

  // Scan order for working-set selection; the seed decides ties.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(options.seed);
  rng.shuffle(std::span(order));

  auto in_up = [&](std::size_t t) { return (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0); };
  auto in_low = [&](std::size_t t) { return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C); };

  const std::size_t max_iter =
      options.max_iterations ? options.max_iterations : std::max<std::size_t>(1'000'000, 100 * n);
  const std::size_t stall_limit = static_cast<std::size_t>(std::max(1, options.max_passes)) * n;
  constexpr double kTau = 1e-12;

  std::vector<double> scratch_i;
  std::vector<double> scratch_j;
  DualSolution sol;
  std::size_t stalled = 0;
  std::size_t iter = 0;
  double gap = 0.0;
  for (; iter < max_iter; ++iter) {
    double up_max = -std::numeric_limits<double>::infinity();
    double low_min = std::numeric_limits<double>::infinity();
    std::size_t i = n;
    std::size_t j = n;
    for (std::size_t t : order) {
      const double v = -y[t] * grad[t];
      if (in_up(t) && v > up_max) {
        up_max = v;
        i = t;
      }
      if (in_low(t) && v < low_min) {
        low_min = v;
        j = t;
      }
    }
    gap = up_max - low_min;
    if (i == n || j == n || gap < options.tol) break;

    const auto row_i = kernel.row(i, scratch_i);
    const auto row_j = kernel.row(j, scratch_j);
    const double qij = y[i] * y[j] * row_i[j];
    const double qii = kernel.diag(i);
    const double qjj = kernel.diag(j);
    const double old_i = alpha[i];
    const double old_j = alpha[j];
    if (y[i] != y[j]) {
      double quad = qii + qjj + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = qii + qjj - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double di = alpha[i] - old_i;
    const double dj = alpha[j] - old_j;
    if (std::abs(di) < 1e-15 && std::abs(dj) < 1e-15) {
      if (++stalled >= stall_limit) break;
      continue;
    }
    stalled = 0;
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += y[t] * (y[i] * row_i[t] * di + y[j] * row_j[t] * dj);
    }
  }

  // Bias from free multipliers, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= C) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  double rho = 0.0;
  if (free_count > 0) {
    rho = free_sum / static_cast<double>(free_count);
  } else if (std::isfinite(ub) && std::isfinite(lb)) {
    rho = 0.5 * (ub + lb);
  } else if (std::isfinite(ub)) {
    rho = ub;
  } else if (std::isfinite(lb)) {
    rho = lb;
  }
  sol.alpha = std::move(alpha);
  sol.bias = -rho;
  sol.iterations = iter;
  sol.final_gap = gap;
  return sol;
}

double dual_objective(std::span<const Sample> samples, std::span<const int> labels,
                      std::span<const double> alpha, const KernelSpec& kernel) {
  double linear = 0.0;
  double quad = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    linear += alpha[i];
    if (alpha[i] == 0.0) continue;
    for (std::size_t j = 0; j < samples.size(); ++j) {
      if (alpha[j] == 0.0) continue;
      quad += alpha[i] * alpha[j] * labels[i] * labels[j] * kernel_eval(kernel, samples[i], samples[j]);
    }
  }
  return linear - 0.5 * quad;
}

SvmModel train(std::span<const Sample> samples, std::span<const int> labels,
               const TrainOptions& options, const std::array<std::string, 2>& class_map) {
  check_training_set(samples, labels);
  std::optional<Scaling> scaling;
  std::vector<Sample> scaled;
  std::span<const Sample> work = samples;
  if (options.standardize) {
    const std::size_t dim = samples[0].size();
    Scaling s{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
    const double n = static_cast<double>(samples.size());
    for (const auto& x : samples) {
      for (std::size_t d = 0; d < dim; ++d) s.mean[d] += x[d] / n;
    }
    for (const auto& x : samples) {
      for (std::size_t d = 0; d < dim; ++d) s.scale[d] += (x[d] - s.mean[d]) * (x[d] - s.mean[d]) / n;
    }
    for (auto& v : s.scale) v = v > 0.0 ? std::sqrt(v) : 1.0;
    scaled.reserve(samples.size());
    for (const auto& x : samples) scaled.push_back(s.apply(x));
    work = scaled;
    scaling = std::move(s);
  }

  const DualSolution sol = solve_dual(work, labels, options);
  SvmModel model;
  model.kernel = options.kernel;
  model.C = options.C;
  model.tol = options.tol;
  model.iterations = sol.iterations;
  model.bias = sol.bias;
  model.class_map = class_map;
  model.scaling = std::move(scaling);
  for (std::size_t i = 0; i < work.size(); ++i) {
    if (sol.alpha[i] > 1e-8) {
      model.support_vectors.push_back(work[i]);
      model.dual_coefs.push_back(sol.alpha[i] * labels[i]);
    }
  }
  return model;
}

void SvmModel::validate() const {
  if (support_vectors.empty()) throw ModelError("SVM model has no support vectors");
  if (support_vectors.size() != dual_coefs.size()) {
    throw ModelError("SVM model has " + std::to_string(support_vectors.size()) +
                     " support vectors but " + std::to_string(dual_coefs.size()) + " coefficients");
  }
  const std::size_t dim = support_vectors[0].size();
  for (const auto& sv : support_vectors) {
    if (sv.size() != dim || dim == 0) throw ModelError("SVM support vectors have ragged dimensions");
  }
  if (!(C > 0.0)) throw ModelError("SVM model C must be positive");
  try {
    kernel.validate();
  } catch (const ConfigError& e) {
    throw ModelError(e.what());
  }
  double sum = 0.0;
  for (double c : dual_coefs) {
    if (!std::isfinite(c)) throw ModelError("SVM dual coefficient is not finite");
    if (std::abs(c) > C + 1e-9) throw ModelError("SVM dual coefficient exceeds C");
    sum += c;
  }
  if (std::abs(sum) > 1e-6) throw ModelError("SVM dual coefficients do not sum to zero");
  if (scaling && (scaling->mean.size() != dim || scaling->scale.size() != dim)) {
    throw ModelError("SVM scaling does not match support vector dimension");
  }
}

double decision_value(const SvmModel& model, std::span<const double> x) {
  if (x.size() != model.dimension()) {
    throw DataError("feature length " + std::to_string(x.size()) + " does not match model dimension " +
                    std::to_string(model.dimension()));
  }
  Sample scaled;
  if (model.scaling) {
    scaled = model.scaling->apply(x);
    x = scaled;
  }
  double f = model.bias;
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
    f += model.dual_coefs[i] * kernel_eval(model.kernel, model.support_vectors[i], x);
  }
  return f;
}

int predict_sign(const SvmModel& model, std::span<const double> x) {
  return decision_value(model, x) >= 0.0 ? 1 : -1;
}

const std::string& predict(const SvmModel& model, std::span<const double> x) {
  return model.class_map[predict_sign(model, x) > 0 ? 0 : 1];
}

std::string serialize(const SvmModel& model) {
  json kernel = {{"kind", std::string(to_string(model.kernel.kind))}};
  if (model.kernel.kind == KernelKind::rbf) kernel["gamma"] = model.kernel.gamma;
  json doc = {
      {"format", "featpipe-svm"},
      {"version", 1},
      {"kernel", kernel},
      {"C", model.C},
      {"bias", model.bias},
      {"class_map", {{"+1", model.class_map[0]}, {"-1", model.class_map[1]}}},
      {"support_vectors", model.support_vectors},
      {"dual_coefs", model.dual_coefs},
      {"training", {{"tol", model.tol}, {"iterations", model.iterations}}},
  };
  if (model.scaling) doc["scaling"] = {{"mean", model.scaling->mean}, {"scale", model.scaling->scale}};
  return doc.dump() + "\n";
}

namespace {

double number_field(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_number()) {
    throw ModelError(std::string("SVM model field '") + key + "' must be a number");
  }
  return doc[key].get<double>();
}

std::vector<double> number_array(const json& j, const std::string& what) {
  if (!j.is_array()) throw ModelError("SVM model field '" + what + "' must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw ModelError("SVM model field '" + what + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

SvmModel deserialize(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ModelError(std::string("SVM model is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != "featpipe-svm") {
    throw ModelError("not a featpipe-svm model document");
  }
  SvmModel m;
  if (!doc.contains("kernel") || !doc["kernel"].is_object() || !doc["kernel"].contains("kind") ||
      !doc["kernel"]["kind"].is_string()) {
    throw ModelError("SVM model field 'kernel' must be an object with a 'kind'");
  }
  try {
    m.kernel.kind = parse_kernel_kind(doc["kernel"]["kind"].get<std::string>());
  } catch (const ConfigError& e) {
    throw ModelError(e.what());
  }
  if (m.kernel.kind == KernelKind::rbf) m.kernel.gamma = number_field(doc["kernel"], "gamma");
  m.C = number_field(doc, "C");
  m.bias = number_field(doc, "bias");
  const json& cm = doc.value("class_map", json());
  if (!cm.is_object() || !cm.contains("+1") || !cm.contains("-1") || !cm["+1"].is_string() ||
      !cm["-1"].is_string()) {
    throw ModelError("SVM model field 'class_map' must map '+1' and '-1' to names");
  }
  m.class_map = {cm["+1"].get<std::string>(), cm["-1"].get<std::string>()};
  if (!doc.contains("support_vectors") || !doc["support_vectors"].is_array()) {
    throw ModelError("SVM model field 'support_vectors' must be an array");
  }
  for (const auto& sv : doc["support_vectors"]) m.support_vectors.push_back(number_array(sv, "support_vectors"));
  m.dual_coefs = number_array(doc.value("dual_coefs", json()), "dual_coefs");
  if (doc.contains("training")) {
    const auto& t = doc["training"];
    if (!t.is_object()) throw ModelError("SVM model field 'training' must be an object");
    m.tol = number_field(t, "tol");
    if (!t.contains("iterations") || !t["iterations"].is_number_unsigned()) {
      throw ModelError("SVM model field 'training.iterations' must be a non-negative integer");
    }
    m.iterations = t["iterations"].get<std::size_t>();
  }
  if (doc.contains("scaling")) {
    const auto& s = doc["scaling"];
    if (!s.is_object()) throw ModelError("SVM model field 'scaling' must be an object");
    m.scaling = Scaling{number_array(s.value("mean", json()), "scaling.mean"),
                        number_array(s.value("scale", json()), "scaling.scale")};
  }
  m.validate();
  return m;
}

}  // namespace featpipe::svm
