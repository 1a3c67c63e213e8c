#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>

#include "featpipe/csv.hpp"
#include "featpipe/dataset.hpp"
#include "featpipe/error.hpp"
#include "featpipe/evaluation.hpp"
#include "featpipe/features_io.hpp"
#include "featpipe/fixture.hpp"
#include "featpipe/imaging.hpp"
#include "featpipe/methods.hpp"
#include "featpipe/montage.hpp"
#include "featpipe/network.hpp"
#include "featpipe/parallel.hpp"
#include "featpipe/report.hpp"
#include "featpipe/rng.hpp"
#include "featpipe/weights.hpp"

namespace featpipe::cli {

namespace fs = std::filesystem;

namespace {

// ---- shared config readers ----

ClassNames read_classes(Config& cfg) {
  const auto names = cfg.strings("classes");
  if (names.size() != 2 || names[0].empty() || names[1].empty() || names[0] == names[1]) {
    throw ConfigError("classes must name two distinct non-empty classes");
  }
  ClassNames out;
  out.names = {names[0], names[1]};
  return out;
}

ChannelMeans read_means(Config& cfg) {
  const auto v = cfg.numbers("preprocess.mean");
  if (v.size() != 3) throw ConfigError("preprocess.mean needs three values");
  return {static_cast<float>(v[0]), static_cast<float>(v[1]), static_cast<float>(v[2])};
}

fs::path out_dir(Config& cfg) {
  const fs::path dir = cfg.path("out");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir.string());
  return dir;
}

WeightBundle read_bundle(Config& cfg, const NetworkGraph& graph) {
  const std::string text = cfg.string("bundle");
  if (text.rfind("random:", 0) == 0) {
    const std::string seed_text = text.substr(7);
    char* end = nullptr;
    const auto seed = std::strtoull(seed_text.c_str(), &end, 10);
    if (seed_text.empty() || *end != '\0') throw ConfigError("bundle random:SEED needs an integer seed");
    return random_bundle(graph, seed);
  }
  fs::path path = text;
  if (fs::is_directory(path) || path.extension() != ".json") path /= "manifest.json";
  return load_bundle(path, graph);
}

DatasetManifest read_manifest(Config& cfg, const ClassNames& classes) {
  return load_manifest(cfg.path("manifest"), classes);
}

svm::TrainOptions read_svm(Config& cfg, std::size_t dimension, std::uint64_t seed) {
  svm::TrainOptions o;
  o.C = cfg.number("svm.C");
  if (!(o.C > 0)) throw ConfigError("svm.C must be positive");
  o.kernel.kind = svm::parse_kernel_kind(cfg.string("svm.kernel"));
  const double gamma = cfg.number("svm.gamma");
  if (gamma < 0) throw ConfigError("svm.gamma must be non-negative");
  if (o.kernel.kind == svm::KernelKind::rbf) {
    o.kernel.gamma = gamma > 0 ? gamma : 1.0 / static_cast<double>(std::max<std::size_t>(dimension, 1));
  }
  o.tol = cfg.number("svm.tol");
  if (!(o.tol > 0)) throw ConfigError("svm.tol must be positive");
  o.max_passes = cfg.count("svm.max_passes", 1);
  o.standardize = cfg.boolean("svm.standardize");
  o.seed = seed;
  return o;
}

int label_index(const ClassNames& classes, const std::string& label, const std::string& where) {
  const auto idx = classes.index_of(label);
  if (!idx) throw DataError(where + ": unknown label '" + label + "'");
  return static_cast<int>(*idx);
}

std::mutex& progress_mutex() {
  static std::mutex m;
  return m;
}

// ---- image loading and per-image representations ----

struct LoadedImages {
  std::vector<Raster> rasters;
  std::vector<std::optional<std::string>> errors;
};

LoadedImages load_images(std::span<const ImageRecord> records, unsigned threads) {
  LoadedImages out;
  out.rasters.resize(records.size());
  out.errors.resize(records.size());
  parallel_for(records.size(), threads, [&](std::size_t i) {
    try {
      out.rasters[i] = read_image(records[i].resolved);
    } catch (const DataError& e) {
      out.errors[i] = e.what();
    }
  });
  return out;
}

std::vector<std::vector<float>> cnn_features(const NetworkGraph& graph, const WeightBundle& bundle,
                                             std::span<const Raster> rasters, const ChannelMeans& means,
                                             unsigned threads, std::ostream& err) {
  std::vector<std::vector<float>> out(rasters.size());
  std::atomic<std::size_t> done{0};
  parallel_for(rasters.size(), threads, [&](std::size_t i) {
    const auto f = extract_features(graph, bundle, prepare_network_input(rasters[i], means));
    out[i].assign(f.values().begin(), f.values().end());
    const auto n = ++done;
    if (n % 25 == 0 || n == rasters.size()) {
      std::lock_guard lock(progress_mutex());
      err << "features " << n << "/" << rasters.size() << "\n";
    }
  });
  return out;
}

std::vector<std::vector<double>> widen(const std::vector<std::vector<float>>& rows) {
  std::vector<std::vector<double>> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.emplace_back(r.begin(), r.end());
  return out;
}

// Train and test images of a split manifest, decoded once, with each
// method's representation computed on demand.
class Workspace {
 public:
  Workspace(Config& cfg, std::ostream& err) : cfg_(cfg), err_(err) {
    classes_ = read_classes(cfg);
    const auto manifest = read_manifest(cfg, classes_);
    threads_ = cfg.threads();
    seed_ = cfg.seed();
    for (const auto& r : manifest.records) {
      if (r.split == Split::train) train_records_.push_back(r);
    }
    for (const auto& r : manifest.records) {
      if (r.split == Split::test) test_records_.push_back(r);
    }
    if (train_records_.empty() || test_records_.empty()) {
      throw DataError("manifest needs both train and test records (see the split command)");
    }
    records_ = train_records_;
    records_.insert(records_.end(), test_records_.begin(), test_records_.end());
    auto loaded = load_images(records_, threads_);
    for (std::size_t i = 0; i < records_.size(); ++i) {
      if (loaded.errors[i]) throw DataError(*loaded.errors[i]);
    }
    rasters_ = std::move(loaded.rasters);
  }

  const ClassNames& classes() const { return classes_; }
  std::uint64_t seed() const { return seed_; }
  unsigned threads() const { return threads_; }
  std::size_t train_count() const { return train_records_.size(); }
  const std::vector<ImageRecord>& records() const { return records_; }

  std::vector<LabeledItem> train_items() const { return items(0, train_records_.size()); }
  std::vector<LabeledItem> test_items() const { return items(train_records_.size(), records_.size()); }

  std::unique_ptr<Classifier> make(const std::string& method) {
    if (method == "cnn-svm") {
      const auto& f = features();
      SvmMethodOptions o;
      o.train = read_svm(cfg_, kFeatureLength, seed_);
      return std::make_unique<SvmMethod>("cnn-svm", widen(f), o);
    }
    if (method == "rawsvm") {
      std::vector<svm::Sample> samples;
      for (const auto& r : rasters_) {
        const auto v = baselines::raw_pixel_vector(r);
        samples.emplace_back(v.begin(), v.end());
      }
      SvmMethodOptions o;
      o.train = read_svm(cfg_, samples.front().size(), seed_);
      return std::make_unique<SvmMethod>("rawsvm", std::move(samples), o);
    }
    if (method == "bof") {
      BofOptions o;
      o.vocabulary_size = cfg_.count("bof.k", 1);
      o.descriptors.patch = cfg_.count("bof.patch", 1);
      o.descriptors.stride = cfg_.count("bof.stride", 1);
      if (o.descriptors.patch > o.descriptors.resize) throw ConfigError("bof.patch exceeds the image side");
      o.kmeans_iterations = cfg_.count("bof.iters", 1);
      o.max_descriptors = cfg_.count("bof.max_descriptors", 1);
      o.seed = seed_;
      o.train = read_svm(cfg_, o.vocabulary_size, seed_);
      std::vector<std::vector<baselines::Descriptor>> descriptors(rasters_.size());
      parallel_for(rasters_.size(), threads_, [&](std::size_t i) {
        descriptors[i] = baselines::extract_patch_descriptors(rasters_[i], o.descriptors);
      });
      return std::make_unique<BofMethod>(std::move(descriptors), o);
    }
    if (method == "softmax") {
      const auto& f = features();
      baselines::SoftmaxOptions o;
      o.learning_rate = cfg_.number("softmax.lr");
      if (!(o.learning_rate > 0)) throw ConfigError("softmax.lr must be positive");
      o.epochs = cfg_.count("softmax.epochs", 1);
      o.standardize = cfg_.boolean("softmax.standardize");
      o.seed = seed_;
      return std::make_unique<SoftmaxMethod>(widen(f), o);
    }
    throw ConfigError("unknown method '" + method + "' (expected cnn-svm, rawsvm, bof or softmax)");
  }

 private:
  std::vector<LabeledItem> items(std::size_t begin, std::size_t end) const {
    std::vector<LabeledItem> out;
    for (std::size_t i = begin; i < end; ++i) out.push_back({i, static_cast<int>(records_[i].label)});
    return out;
  }

  const std::vector<std::vector<float>>& features() {
    if (!features_) {
      const auto graph = builtin_alexnet_graph();
      const auto means = read_means(cfg_);
      const auto bundle = read_bundle(cfg_, graph);
      features_ = cnn_features(graph, bundle, rasters_, means, threads_, err_);
    }
    return *features_;
  }

  Config& cfg_;
  std::ostream& err_;
  ClassNames classes_;
  unsigned threads_ = 1;
  std::uint64_t seed_ = 1;
  std::vector<ImageRecord> train_records_, test_records_, records_;
  std::vector<Raster> rasters_;
  std::optional<std::vector<std::vector<float>>> features_;
};

// ---- prediction files and evaluation ----

struct PredictionRow {
  std::string image_id;
  std::string actual;
  std::string predicted;
  double decision = 0.0;
};

std::string predictions_csv(std::span<const PredictionRow> rows) {
  std::string out = "image_id,actual,predicted,decision_value\n";
  for (const auto& r : rows) {
    out += csv::join({r.image_id, r.actual, r.predicted, csv::format_double(r.decision)}) + "\n";
  }
  return out;
}

void evaluate_rows(std::span<const PredictionRow> rows, const ClassNames& classes, const fs::path& dir,
                   std::ostream& out) {
  std::vector<std::string> predicted, actual;
  for (const auto& r : rows) {
    predicted.push_back(r.predicted);
    actual.push_back(r.actual);
  }
  const auto matrix = confusion(predicted, actual, classes);
  report::write_text(dir / "confusion.csv", report::confusion_csv(matrix));
  report::write_text(dir / "confusion.svg", report::confusion_svg(matrix));
  char line[128];
  std::snprintf(line, sizeof(line), "accuracy %.4f (%zu/%zu)\n", matrix.accuracy(), matrix.correct(),
                matrix.total());
  out << line;
}

std::vector<PredictionRow> read_predictions(const fs::path& path) {
  const auto table = csv::read_file(path);
  auto column = [&](std::string_view name) {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) {
      throw DataError(path.string() + ": predictions file lacks column '" + std::string(name) + "'");
    }
    return static_cast<std::size_t>(it - table.header.begin());
  };
  const auto id = column("image_id"), actual = column("actual"), predicted = column("predicted");
  std::vector<PredictionRow> rows;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != table.header.size()) {
      throw DataError(path.string() + ":" + std::to_string(table.line_numbers[r]) + ": expected " +
                      std::to_string(table.header.size()) + " fields");
    }
    rows.push_back({row[id], row[actual], row[predicted], 0.0});
  }
  return rows;
}

struct LabeledSamples {
  std::vector<FeatureRecord> records;
  std::vector<svm::Sample> samples;
  std::vector<int> labels;  // +1 / -1
};

LabeledSamples read_labeled_features(Config& cfg, const ClassNames& classes) {
  const fs::path path = cfg.path("features");
  LabeledSamples out;
  out.records = read_features(path);
  if (out.records.empty()) throw DataError(path.string() + ": no feature records");
  for (const auto& r : out.records) {
    out.samples.emplace_back(r.values.begin(), r.values.end());
    out.labels.push_back(svm_label(label_index(classes, r.label, path.string())));
  }
  if (std::count(out.labels.begin(), out.labels.end(), 1) == 0 ||
      std::count(out.labels.begin(), out.labels.end(), -1) == 0) {
    throw DataError(path.string() + ": training needs records of both classes");
  }
  return out;
}

std::string write_model(const svm::SvmModel& model, const fs::path& dir) {
  const fs::path path = dir / "model.json";
  report::write_text(path, svm::serialize(model));
  return path.string();
}

// ---- commands ----

void cmd_extract(Context& ctx) {
  auto& cfg = ctx.config;
  const auto classes = read_classes(cfg);
  const auto manifest = read_manifest(cfg, classes);
  const auto means = read_means(cfg);
  const auto format = cfg.string("extract.format");
  if (format != "csv" && format != "binary") throw ConfigError("extract.format must be csv or binary");
  const unsigned threads = cfg.threads();
  const auto dir = out_dir(cfg);
  const auto graph = builtin_alexnet_graph();
  const auto bundle = read_bundle(cfg, graph);

  auto loaded = load_images(manifest.records, threads);
  std::size_t skipped = 0;
  std::vector<std::size_t> good;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    if (!loaded.errors[i]) {
      good.push_back(i);
    } else if (ctx.skip_bad) {
      ctx.err << "warning: skipping " << *loaded.errors[i] << "\n";
      ++skipped;
    } else {
      throw DataError(*loaded.errors[i]);
    }
  }
  std::vector<Raster> rasters;
  for (auto i : good) rasters.push_back(std::move(loaded.rasters[i]));
  const auto feats = cnn_features(graph, bundle, rasters, means, threads, ctx.err);

  std::map<Split, std::vector<FeatureRecord>> by_split;
  for (std::size_t k = 0; k < good.size(); ++k) {
    const auto& r = manifest.records[good[k]];
    by_split[r.split].push_back({r.path, classes[r.label], feats[k]});
  }
  for (const auto& [split, records] : by_split) {
    const std::string stem = split == Split::unassigned ? "features" : "features_" + std::string(to_string(split));
    if (format == "csv") {
      write_features_csv(dir / (stem + ".csv"), records);
    } else {
      write_features_binary(dir / (stem + ".json"), records);
    }
  }
  ctx.out << "extracted " << good.size() << " images (" << skipped << " skipped)\n";
}

void cmd_train(Context& ctx) {
  auto& cfg = ctx.config;
  const auto classes = read_classes(cfg);
  const auto data = read_labeled_features(cfg, classes);
  const auto options = read_svm(cfg, data.samples.front().size(), cfg.seed());
  const auto dir = out_dir(cfg);
  const auto model = svm::train(data.samples, data.labels, options, {classes[0], classes[1]});
  write_model(model, dir);
  ctx.out << "trained on " << data.samples.size() << " samples, " << model.support_vectors.size()
          << " support vectors\n";
}

void cmd_tune(Context& ctx) {
  auto& cfg = ctx.config;
  const auto classes = read_classes(cfg);
  const auto data = read_labeled_features(cfg, classes);
  const auto seed = cfg.seed();
  tuner::CvOptions cv;
  cv.folds = cfg.count("tuner.folds", 2);
  cv.seed = seed;
  cv.threads = cfg.threads();
  cv.base = read_svm(cfg, data.samples.front().size(), seed);
  tuner::SearchSpace space;
  space.kernels.clear();
  for (const auto& k : cfg.strings("tuner.kernels")) space.kernels.push_back(svm::parse_kernel_kind(k));
  const auto c_range = cfg.numbers("tuner.c_range");
  const auto g_range = cfg.numbers("tuner.gamma_range");
  if (c_range.size() != 2 || g_range.size() != 2) throw ConfigError("tuner ranges need two values");
  space.c = {c_range[0], c_range[1]};
  space.gamma = {g_range[0], g_range[1]};
  const auto budget = cfg.count("tuner.budget", 1);
  const auto dir = out_dir(cfg);

  const auto result = tuner::optimize(space, data.samples, data.labels, budget, cv);
  tuner::write_trace_csv(result.trace, dir / "tune_trace.csv");
  report::Series observed{"objective", {}}, incumbent{"minimum objective", {}};
  for (const auto& e : result.trace) {
    observed.points.emplace_back(static_cast<double>(e.index), e.objective);
    incumbent.points.emplace_back(static_cast<double>(e.index), e.incumbent);
  }
  report::ChartOptions chart;
  chart.title = "Hyperparameter search";
  chart.x_label = "function evaluations";
  chart.y_label = "cross-validation error";
  chart.step = true;
  const report::Series both[] = {observed, incumbent};
  report::write_text(dir / "tune_trace.svg", report::line_chart_svg(both, chart));

  svm::TrainOptions final_options = cv.base;
  final_options.C = result.best.C;
  final_options.kernel = result.best.kernel_spec();
  write_model(svm::train(data.samples, data.labels, final_options, {classes[0], classes[1]}), dir);
  ctx.out << "best objective " << csv::format_double(result.best_objective) << " (C=" << csv::format_double(result.best.C)
          << ", kernel=" << svm::to_string(result.best.kernel);
  if (result.best.kernel == svm::KernelKind::rbf) ctx.out << ", gamma=" << csv::format_double(result.best.gamma);
  ctx.out << ")\n";
}

void cmd_predict(Context& ctx) {
  auto& cfg = ctx.config;
  const fs::path model_path = cfg.path("model");
  const fs::path features_path = cfg.path("features");
  const auto dir = out_dir(cfg);
  std::string text;
  {
    std::ifstream in(model_path);
    if (!in) throw ModelError("cannot open model " + model_path.string());
    text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  const auto model = svm::deserialize(text);
  const auto records = read_features(features_path, model.dimension());
  std::vector<PredictionRow> rows;
  for (const auto& r : records) {
    const svm::Sample x(r.values.begin(), r.values.end());
    const double d = svm::decision_value(model, x);
    rows.push_back({r.image_id, r.label, svm::predict(model, x), d});
  }
  report::write_text(dir / "predictions.csv", predictions_csv(rows));
  ctx.out << "predicted " << rows.size() << " images\n";
}

void cmd_evaluate(Context& ctx) {
  auto& cfg = ctx.config;
  const auto classes = read_classes(cfg);
  const auto rows = read_predictions(cfg.path("predictions"));
  evaluate_rows(rows, classes, out_dir(cfg), ctx.out);
}

void cmd_learning_curve(Context& ctx) {
  auto& cfg = ctx.config;
  auto fractions = cfg.numbers("curve.fractions");
  const auto methods = cfg.strings("curve.methods");
  if (methods.empty()) throw ConfigError("curve.methods is empty");
  const auto dir = out_dir(cfg);
  Workspace ws(cfg, ctx.err);
  const auto train = ws.train_items();
  const auto test = ws.test_items();
  std::vector<LearningCurvePoint> points;
  for (const auto& name : methods) {
    auto method = ws.make(name);
    ctx.err << "learning curve: " << name << "\n";
    const auto curve = learning_curve(*method, train, test, fractions, ws.seed());
    points.insert(points.end(), curve.begin(), curve.end());
    ctx.out << name << " accuracy at f=" << csv::format_double(curve.back().fraction) << ": "
            << format_percent(curve.back().accuracy) << "\n";
  }
  report::write_text(dir / "learning_curve.csv", report::learning_curve_csv(points));
  report::ChartOptions chart;
  chart.title = "Learning curve";
  chart.x_label = "fraction of training images";
  chart.y_label = "test accuracy";
  chart.x_range = std::pair{0.0, 1.0};
  chart.y_range = std::pair{0.0, 1.0};
  const auto series = report::learning_curve_series(points);
  report::write_text(dir / "learning_curve.svg", report::line_chart_svg(series, chart));
}

void run_baseline(Context& ctx, const std::string& method_name) {
  auto& cfg = ctx.config;
  const auto dir = out_dir(cfg);
  Workspace ws(cfg, ctx.err);
  auto method = ws.make(method_name);
  const auto train = ws.train_items();
  std::vector<std::size_t> items;
  std::vector<int> labels;
  for (const auto& t : train) {
    items.push_back(t.item);
    labels.push_back(t.label);
  }
  method->fit(items, labels);
  std::vector<PredictionRow> rows;
  for (const auto& t : ws.test_items()) {
    const auto& rec = ws.records()[t.item];
    const double d = method->decision(t.item);
    rows.push_back({rec.path, ws.classes()[rec.label], ws.classes()[d >= 0.0 ? 0 : 1], d});
  }
  report::write_text(dir / "predictions.csv", predictions_csv(rows));
  evaluate_rows(rows, ws.classes(), dir, ctx.out);
}

void cmd_visualize(Context& ctx) {
  auto& cfg = ctx.config;
  const auto graph = builtin_alexnet_graph();
  const auto bundle = read_bundle(cfg, graph);
  const auto dir = out_dir(cfg);
  write_png(conv1_montage(bundle), dir / "conv1_montage.png");
  ctx.out << "wrote " << (dir / "conv1_montage.png").string() << "\n";
}

void cmd_stats(Context& ctx) {
  auto& cfg = ctx.config;
  const auto records = read_features(cfg.path("features"));
  const double width = cfg.number("stats.bin_width");
  if (!(width > 0)) throw ConfigError("stats.bin_width must be positive");
  const auto range = cfg.numbers("stats.range");
  if (range.size() != 2 || !(range[0] < range[1])) throw ConfigError("stats.range needs two increasing values");
  const auto dir = out_dir(cfg);
  std::vector<std::vector<float>> values;
  for (const auto& r : records) values.push_back(r.values);
  const auto stats = feature_stats(values, width);
  report::write_text(dir / "feature_histogram.csv", report::histogram_csv(stats));
  report::write_text(dir / "feature_histogram.svg",
                     report::histogram_svg(stats, range[0], range[1], "Feature value distribution"));
  ctx.out << "values " << stats.total << " min " << csv::format_float(stats.min) << " max "
          << csv::format_float(stats.max) << " mode [" << csv::format_double(stats.bin_lower(stats.mode_bin))
          << ", " << csv::format_double(stats.bin_upper(stats.mode_bin)) << ")\n";
}

void cmd_split(Context& ctx) {
  auto& cfg = ctx.config;
  const auto classes = read_classes(cfg);
  const fs::path manifest_path = cfg.path("manifest");
  const auto manifest = load_manifest(manifest_path, classes);
  const auto per_class = cfg.count("split.per_class_train", 1);
  const bool mirror = cfg.boolean("split.mirror_test");
  const auto seed = cfg.seed();
  const auto dir = out_dir(cfg);
  const auto result = split_balanced(manifest, per_class, seed, mirror);

  DatasetManifest combined;
  combined.classes = classes;
  const fs::path base = fs::absolute(dir).lexically_normal();
  for (const auto* part : {&result.train, &result.test}) {
    for (auto r : part->records) {
      r.path = fs::absolute(r.resolved).lexically_normal().lexically_relative(base).generic_string();
      combined.records.push_back(std::move(r));
    }
  }
  write_manifest(combined, dir / "split_manifest.csv");
  ctx.out << "train " << result.train.records.size() << " test " << result.test.records.size() << "\n";
}

void cmd_synth_bundle(Context& ctx) {
  auto& cfg = ctx.config;
  const auto seed = cfg.seed();
  const auto dir = out_dir(cfg);
  const auto path = write_bundle(random_bundle(builtin_alexnet_graph(), seed), dir / "bundle");
  ctx.out << "wrote " << path.string() << "\n";
}

Raster synth_image(std::size_t side, bool disc, Rng& rng) {
  Raster img(side, side);
  const double radius = 0.2 * static_cast<double>(side);
  const double cx = rng.uniform(radius, static_cast<double>(side) - radius);
  const double cy = rng.uniform(radius, static_cast<double>(side) - radius);
  for (std::size_t y = 0; y < side; ++y) {
    for (std::size_t x = 0; x < side; ++x) {
      double v = 80.0 + 20.0 * rng.normal();
      const double dx = static_cast<double>(x) + 0.5 - cx, dy = static_cast<double>(y) + 0.5 - cy;
      if (disc && dx * dx + dy * dy <= radius * radius) v += 150.0;
      const auto level = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      for (std::size_t c = 0; c < 3; ++c) img.at(x, y, c) = level;
    }
  }
  return img;
}

void cmd_synth_dataset(Context& ctx) {
  auto& cfg = ctx.config;
  const auto classes = read_classes(cfg);
  const auto count = cfg.count("synth.count", 4);
  if (count % 2) throw ConfigError("synth.count must be even");
  const auto side = cfg.count("synth.size", 8);
  const double train_fraction = cfg.number("synth.train_fraction");
  if (!(train_fraction > 0 && train_fraction < 1)) throw ConfigError("synth.train_fraction must lie in (0, 1)");
  const auto seed = cfg.seed();
  const auto dir = out_dir(cfg);
  std::error_code ec;
  fs::create_directories(dir / "images", ec);
  if (ec) throw ConfigError("cannot create " + (dir / "images").string());

  const std::size_t per_class = count / 2;
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(per_class)));
  if (n_train == 0 || n_train == per_class) throw ConfigError("synth.train_fraction leaves a split empty");
  Rng rng(seed);
  DatasetManifest manifest;
  manifest.classes = classes;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t label = i % 2;
    char name[32];
    std::snprintf(name, sizeof(name), "img_%04zu.png", i);
    write_png(synth_image(side, label == 0, rng), dir / "images" / name);
    ImageRecord r;
    r.path = std::string("images/") + name;
    r.label = label;
    r.split = i / 2 < n_train ? Split::train : Split::test;
    manifest.records.push_back(std::move(r));
  }
  write_manifest(manifest, dir / "manifest.csv");
  ctx.out << "wrote " << count << " images\n";
}

void cmd_check_fixture(Context& ctx) {
  auto& cfg = ctx.config;
  const auto graph = builtin_alexnet_graph();
  const auto fixture = load_fixture(cfg.path("fixture"));
  const auto bundle = read_bundle(cfg, graph);
  const auto check = featpipe::check_fixture(fixture, graph, bundle);
  ctx.out << "fc7 max abs error " << csv::format_double(check.fc7_max_abs_error) << " at index "
          << check.fc7_worst_index << " (tolerance " << csv::format_double(kFixtureFc7Tolerance) << ")\n";
  ctx.out << "prob max abs error " << csv::format_double(check.prob_max_abs_error) << "\n";
  if (!check.passed) throw ModelError("fixture mismatch: fc7 differs beyond tolerance");
  ctx.out << "fixture ok\n";
}

const std::vector<std::string> kSvmKeys = {"svm.C", "svm.kernel", "svm.gamma", "svm.tol", "svm.max_passes",
                                           "svm.standardize"};
const std::vector<std::string> kBofKeys = {"bof.k", "bof.patch", "bof.stride", "bof.iters", "bof.max_descriptors"};
const std::vector<std::string> kSoftmaxKeys = {"softmax.lr", "softmax.epochs", "softmax.standardize"};

std::vector<std::string> keys(std::initializer_list<std::vector<std::string>> parts) {
  std::vector<std::string> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

const std::vector<Command>& commands() {
  const std::vector<std::string> workspace = {"classes", "manifest", "threads", "seed", "out"};
  const std::vector<std::string> cnn = {"bundle", "preprocess.mean"};
  static const std::vector<Command> all = {
      {"extract", "Extract fc7 features for every image of a manifest",
       {"features.csv | features_train.csv, features_test.csv (or .json + .bin)"},
       keys({{"bundle", "manifest", "classes", "preprocess.mean", "extract.format", "threads", "out"}}),
       cmd_extract},
      {"train", "Train an SVM on a feature file", {"model.json"},
       keys({{"features", "classes", "seed", "out"}, kSvmKeys}), cmd_train},
      {"tune", "Random-search SVM hyperparameters by cross-validation, then train",
       {"tune_trace.csv", "tune_trace.svg", "model.json"},
       keys({{"features", "classes", "seed", "threads", "out", "tuner.budget", "tuner.folds", "tuner.kernels",
              "tuner.c_range", "tuner.gamma_range"},
             kSvmKeys}),
       cmd_tune},
      {"predict", "Classify a feature file with a trained model", {"predictions.csv"},
       keys({{"model", "features", "out"}}), cmd_predict},
      {"evaluate", "Confusion matrix and accuracy of a predictions file", {"confusion.csv", "confusion.svg"},
       keys({{"predictions", "classes", "out"}}), cmd_evaluate},
      {"learning-curve", "Accuracy against training fraction for one or more methods",
       {"learning_curve.csv", "learning_curve.svg"},
       keys({workspace, cnn, {"curve.fractions", "curve.methods"}, kSvmKeys, kBofKeys, kSoftmaxKeys}),
       cmd_learning_curve},
      {"baseline bof", "Bag-of-features SVM baseline", {"predictions.csv", "confusion.csv", "confusion.svg"},
       keys({workspace, kSvmKeys, kBofKeys}), [](Context& c) { run_baseline(c, "bof"); }},
      {"baseline rawsvm", "Raw-pixel SVM baseline", {"predictions.csv", "confusion.csv", "confusion.svg"},
       keys({workspace, kSvmKeys}), [](Context& c) { run_baseline(c, "rawsvm"); }},
      {"baseline softmax", "Softmax head on frozen network features",
       {"predictions.csv", "confusion.csv", "confusion.svg"}, keys({workspace, cnn, kSoftmaxKeys}),
       [](Context& c) { run_baseline(c, "softmax"); }},
      {"visualize", "Render the first-layer filters as a montage", {"conv1_montage.png"},
       keys({{"bundle", "out"}}), cmd_visualize},
      {"stats", "Value range and histogram of a feature file", {"feature_histogram.csv", "feature_histogram.svg"},
       keys({{"features", "stats.bin_width", "stats.range", "out"}}), cmd_stats},
      {"split", "Assign a class-balanced train/test split", {"split_manifest.csv"},
       keys({{"manifest", "classes", "split.per_class_train", "split.mirror_test", "seed", "out"}}), cmd_split},
      {"synth-bundle", "Write a seeded random weight bundle", {"bundle/manifest.json", "bundle/weights.bin"},
       keys({{"seed", "out"}}), cmd_synth_bundle},
      {"synth-dataset", "Generate a two-class disc/no-disc image set", {"manifest.csv", "images/*.png"},
       keys({{"classes", "synth.count", "synth.size", "synth.train_fraction", "seed", "out"}}), cmd_synth_dataset},
      {"check-fixture", "Compare the engine against golden activations", {},
       keys({{"bundle", "fixture"}}), cmd_check_fixture},
  };
  return all;
}

}  // namespace featpipe::cli
