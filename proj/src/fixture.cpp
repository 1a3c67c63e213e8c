#include "featpipe/fixture.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "featpipe/error.hpp"
#include "json.hpp"

namespace featpipe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::pair<const char*, Shape> kArrays[] = {
    {"input", {3, 227, 227}},
    {"fc7", {4096}},
    {"prob", {1000}},
};

Tensor read_array(const fs::path& path, const Shape& shape) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open fixture array " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::size_t n = element_count(shape);
  if (bytes.size() != n * sizeof(float)) {
    throw ModelError(path.string() + ": expected " + std::to_string(n * sizeof(float)) + " bytes for shape " +
                     to_string(shape) + ", found " + std::to_string(bytes.size()));
  }
  std::vector<float> values(n);
  std::memcpy(values.data(), bytes.data(), bytes.size());
  return Tensor(shape, std::move(values));
}

void write_array(const fs::path& path, const Tensor& t) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(t.data().data()), static_cast<std::streamsize>(t.size() * sizeof(float)));
}

}  // namespace

GoldenFixture load_fixture(const fs::path& dir) {
  const fs::path index_path = dir / "index.json";
  std::ifstream in(index_path);
  if (!in) throw ModelError("cannot open fixture index " + index_path.string());
  json index;
  try {
    index = json::parse(in);
  } catch (const json::exception& e) {
    throw ModelError("malformed fixture index " + index_path.string() + ": " + e.what());
  }
  GoldenFixture fx;
  try {
    const auto& arrays = index.at("arrays");
    if (arrays.size() != std::size(kArrays)) {
      throw ModelError(index_path.string() + ": fixture must list exactly input, fc7 and prob");
    }
    Tensor* slots[] = {&fx.input, &fx.fc7, &fx.prob};
    for (std::size_t i = 0; i < std::size(kArrays); ++i) {
      const auto& [name, shape] = kArrays[i];
      if (!arrays.contains(name)) throw ModelError(index_path.string() + ": fixture lacks array " + name);
      const auto& entry = arrays.at(name);
      if (entry.at("dtype").get<std::string>() != "f32le") {
        throw ModelError(index_path.string() + ": array " + name + " must be f32le");
      }
      const auto declared = entry.at("shape").get<Shape>();
      if (declared != shape) {
        throw ModelError(index_path.string() + ": array " + name + " has shape " + to_string(declared) +
                         ", expected " + to_string(shape));
      }
      *slots[i] = read_array(dir / entry.at("file").get<std::string>(), shape);
    }
    fx.description = index.value("description", std::string{});
  } catch (const json::exception& e) {
    throw ModelError("malformed fixture index " + index_path.string() + ": " + e.what());
  }
  return fx;
}

void write_fixture(const GoldenFixture& fx, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const Tensor* slots[] = {&fx.input, &fx.fc7, &fx.prob};
  json arrays = json::object();
  for (std::size_t i = 0; i < std::size(kArrays); ++i) {
    const auto& [name, shape] = kArrays[i];
    if (slots[i]->shape() != shape) {
      throw ShapeError(name, std::string("fixture array ") + name + " must have shape " + to_string(shape));
    }
    const std::string file = std::string(name) + ".f32le";
    write_array(dir / file, *slots[i]);
    arrays[name] = {{"file", file}, {"shape", shape}, {"dtype", "f32le"}};
  }
  json index = {{"format", "featpipe-fixture"}, {"description", fx.description}, {"arrays", arrays}};
  std::ofstream out(dir / "index.json", std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + (dir / "index.json").string());
  out << index.dump(2) << '\n';
}

FixtureCheck check_fixture(const GoldenFixture& fx, const NetworkGraph& graph, const WeightBundle& bundle) {
  ForwardOptions opts;
  opts.keep = {graph.feature_tap, "prob"};
  const auto acts = forward(graph, bundle, fx.input, opts);
  const Tensor& fc7 = acts.at(graph.feature_tap);
  const Tensor& prob = acts.at("prob");
  FixtureCheck out;
  for (std::size_t i = 0; i < fc7.size(); ++i) {
    const double e = std::abs(static_cast<double>(fc7[i]) - fx.fc7[i]);
    if (e > out.fc7_max_abs_error || std::isnan(e)) {
      out.fc7_max_abs_error = std::isnan(e) ? INFINITY : e;
      out.fc7_worst_index = i;
    }
  }
  for (std::size_t i = 0; i < prob.size(); ++i) {
    out.prob_max_abs_error = std::max(out.prob_max_abs_error, std::abs(static_cast<double>(prob[i]) - fx.prob[i]));
  }
  out.passed = out.fc7_max_abs_error <= kFixtureFc7Tolerance;
  return out;
}

}  // namespace featpipe
