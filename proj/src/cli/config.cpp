#include "config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include "featpipe/error.hpp"

namespace featpipe::cli {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<KeySpec>& key_registry() {
  static const std::vector<KeySpec> keys = {
      {"bundle", KeyType::path, nullptr, "weight bundle manifest.json, or random:SEED for a seeded synthetic bundle"},
      {"manifest", KeyType::path, nullptr, "dataset manifest CSV (path,label[,split])"},
      {"features", KeyType::path, nullptr, "feature file (.csv, or .json for the binary variant)"},
      {"model", KeyType::path, nullptr, "trained SVM model JSON"},
      {"predictions", KeyType::path, nullptr, "predictions CSV written by predict"},
      {"fixture", KeyType::path, nullptr, "golden fixture directory holding index.json"},
      {"classes", KeyType::string_list, json::array({"hookah", "nonhookah"}), "the two class names, positive first"},
      {"preprocess.mean", KeyType::number_list, json::array({123.68, 116.78, 103.94}), "per-channel RGB means"},
      {"out", KeyType::path, "out", "output directory"},
      {"seed", KeyType::integer, 1, "global seed (positive)"},
      {"threads", KeyType::integer, nullptr, "worker threads (default: FEATPIPE_THREADS or 1)"},
      {"extract.format", KeyType::string, "csv", "feature file format: csv or binary"},
      {"svm.C", KeyType::number, 1.0, "box constraint"},
      {"svm.kernel", KeyType::string, "linear", "linear or rbf"},
      {"svm.gamma", KeyType::number, 0.0, "rbf gamma; 0 means 1/dimension"},
      {"svm.tol", KeyType::number, 1e-3, "KKT tolerance"},
      {"svm.max_passes", KeyType::integer, 10, "stop after this many sweeps without progress"},
      {"svm.standardize", KeyType::boolean, false, "z-score features before training"},
      {"tuner.budget", KeyType::integer, 30, "number of evaluated configurations"},
      {"tuner.folds", KeyType::integer, 5, "cross-validation folds"},
      {"tuner.kernels", KeyType::string_list, json::array({"rbf"}), "kernels to search"},
      {"tuner.c_range", KeyType::number_list, json::array({1e-3, 1e3}), "log-uniform range for C"},
      {"tuner.gamma_range", KeyType::number_list, json::array({1e-6, 1e1}), "log-uniform range for gamma"},
      {"bof.k", KeyType::integer, 200, "vocabulary size"},
      {"bof.patch", KeyType::integer, 16, "descriptor patch side"},
      {"bof.stride", KeyType::integer, 8, "descriptor stride"},
      {"bof.iters", KeyType::integer, 50, "k-means iterations"},
      {"bof.max_descriptors", KeyType::integer, 20000, "descriptors sampled to fit the vocabulary"},
      {"softmax.lr", KeyType::number, 0.01, "learning rate"},
      {"softmax.epochs", KeyType::integer, 200, "full-batch gradient steps"},
      {"softmax.standardize", KeyType::boolean, true, "z-score features before training"},
      {"curve.fractions", KeyType::number_list, json::array({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}),
       "training fractions"},
      {"curve.methods", KeyType::string_list, json::array({"cnn-svm", "rawsvm", "bof", "softmax"}),
       "methods to compare"},
      {"split.per_class_train", KeyType::integer, nullptr, "training images per class"},
      {"split.mirror_test", KeyType::boolean, false, "test takes as many images per class as train"},
      {"stats.bin_width", KeyType::number, 0.5, "histogram bin width"},
      {"stats.range", KeyType::number_list, json::array({-20.0, 20.0}), "histogram plot range"},
      {"synth.count", KeyType::integer, 400, "number of generated images"},
      {"synth.size", KeyType::integer, 64, "generated image side in pixels"},
      {"synth.train_fraction", KeyType::number, 0.5, "share of each class assigned to train"},
  };
  return keys;
}

const KeySpec& key_spec(const std::string& name) {
  for (const auto& k : key_registry()) {
    if (k.name == name) return k;
  }
  throw ConfigError("unknown config key '" + name + "'");
}

namespace {

void check_type(const KeySpec& spec, const json& v) {
  bool ok = false;
  switch (spec.type) {
    case KeyType::path:
    case KeyType::string: ok = v.is_string(); break;
    case KeyType::number: ok = v.is_number(); break;
    case KeyType::integer: ok = v.is_number_integer(); break;
    case KeyType::boolean: ok = v.is_boolean(); break;
    case KeyType::number_list:
      ok = v.is_array();
      for (const auto& e : v) ok = ok && e.is_number();
      break;
    case KeyType::string_list:
      ok = v.is_array();
      for (const auto& e : v) ok = ok && e.is_string();
      break;
  }
  if (!ok) throw ConfigError("config key '" + spec.name + "' has the wrong type");
}

void flatten(const json& node, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
  for (const auto& [k, v] : node.items()) {
    const std::string name = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object()) {
      flatten(v, name, out);
    } else {
      out.emplace_back(name, v);
    }
  }
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(text.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(const std::string& key, const std::string& text) {
  double v = 0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size() || !std::isfinite(v)) {
    throw ConfigError("config key '" + key + "' expects a number, got '" + text + "'");
  }
  return v;
}

}  // namespace

Config::Config() {
  for (const auto& k : key_registry()) {
    if (!k.fallback.is_null()) values_[k.name] = k.fallback;
  }
}

void Config::load_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("malformed config file " + path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config file " + path.string() + " must hold a JSON object");
  std::vector<std::pair<std::string, json>> entries;
  flatten(doc, "", entries);
  for (auto& [name, v] : entries) {
    const auto& spec = key_spec(name);
    check_type(spec, v);
    if (spec.type == KeyType::path) {
      fs::path p = v.get<std::string>();
      if (p.is_relative() && v.get<std::string>().rfind("random:", 0) != 0) p = path.parent_path() / p;
      v = p.string();
    }
    values_[name] = v;
  }
}

void Config::set_from_text(const std::string& key, const std::string& text) {
  const auto& spec = key_spec(key);
  json v;
  switch (spec.type) {
    case KeyType::path:
    case KeyType::string: v = text; break;
    case KeyType::number: v = parse_number(key, text); break;
    case KeyType::integer: {
      std::int64_t i = 0;
      const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), i);
      if (ec != std::errc() || p != text.data() + text.size()) {
        throw ConfigError("config key '" + key + "' expects an integer, got '" + text + "'");
      }
      v = i;
      break;
    }
    case KeyType::boolean:
      if (text == "true" || text == "1") {
        v = true;
      } else if (text == "false" || text == "0") {
        v = false;
      } else {
        throw ConfigError("config key '" + key + "' expects true or false, got '" + text + "'");
      }
      break;
    case KeyType::number_list:
      v = json::array();
      for (const auto& part : split_commas(text)) v.push_back(parse_number(key, part));
      break;
    case KeyType::string_list:
      v = json::array();
      for (const auto& part : split_commas(text)) v.push_back(part);
      break;
  }
  values_[key] = v;
}

bool Config::has(const std::string& key) const { return values_.contains(key); }

const json& Config::value(const std::string& key) {
  key_spec(key);
  read_.insert(key);
  if (!values_.contains(key)) throw ConfigError("missing required config key '" + key + "' (use --" + key + ")");
  return values_.at(key);
}

fs::path Config::path(const std::string& key) { return value(key).get<std::string>(); }
std::string Config::string(const std::string& key) { return value(key).get<std::string>(); }
double Config::number(const std::string& key) { return value(key).get<double>(); }
std::int64_t Config::integer(const std::string& key) { return value(key).get<std::int64_t>(); }
bool Config::boolean(const std::string& key) { return value(key).get<bool>(); }
std::vector<double> Config::numbers(const std::string& key) { return value(key).get<std::vector<double>>(); }
std::vector<std::string> Config::strings(const std::string& key) {
  return value(key).get<std::vector<std::string>>();
}

std::size_t Config::count(const std::string& key, std::size_t min) {
  const auto v = integer(key);
  if (v < 0 || static_cast<std::size_t>(v) < min) {
    throw ConfigError("config key '" + key + "' must be at least " + std::to_string(min));
  }
  return static_cast<std::size_t>(v);
}

unsigned Config::threads() {
  read_.insert("threads");
  std::int64_t n = 1;
  if (values_.contains("threads")) {
    n = values_.at("threads").get<std::int64_t>();
  } else if (const char* env = std::getenv("FEATPIPE_THREADS"); env && *env) {
    const std::string text = env;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
    if (ec != std::errc() || p != text.data() + text.size()) {
      throw ConfigError("FEATPIPE_THREADS must be a positive integer, got '" + text + "'");
    }
  }
  if (n < 1 || n > 1024) throw ConfigError("thread count must be between 1 and 1024");
  return static_cast<unsigned>(n);
}

std::uint64_t Config::seed() {
  const auto v = integer("seed");
  if (v < 1) throw ConfigError("seed must be positive");
  return static_cast<std::uint64_t>(v);
}

}  // namespace featpipe::cli
