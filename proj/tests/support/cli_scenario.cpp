#include "support/cli_scenario.hpp"

#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <stdexcept>

#include "app.hpp"
#include "featpipe/fixture.hpp"
#include "featpipe/imaging.hpp"
#include "featpipe/weights.hpp"

namespace fs = std::filesystem;

namespace cli_scenario {

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void must(const std::vector<std::string>& args) {
  const auto r = run(args);
  if (r.code != 0) {
    std::string joined;
    for (const auto& a : args) joined += a + " ";
    throw std::runtime_error("setup command failed (" + std::to_string(r.code) + "): " + joined + "\n" + r.err);
  }
}

std::map<std::string, std::string> files_under(const fs::path& root) {
  std::map<std::string, std::string> out;
  if (!fs::exists(root)) return out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return out;
}

}  // namespace

CliResult run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliResult r;
  r.code = featpipe::cli::run(args, out, err, &r.keys);
  r.out = out.str();
  r.err = err.str();
  return r;
}

Workspace prepare(const fs::path& base) {
  Workspace ws;
  ws.base = base;
  ws.data = base / "data";
  fs::create_directories(base);
  must({"synth-dataset", "--out", ws.data.string(), "--synth.count", "24", "--synth.size", "48", "--seed", "3"});
  must({"synth-bundle", "--out", base.string(), "--seed", "5"});
  ws.bundle = base / "bundle";
  must({"extract", "--bundle", ws.bundle.string(), "--manifest", (ws.data / "manifest.csv").string(), "--out",
        (base / "features").string(), "--threads", "1"});
  ws.features_train = base / "features" / "features_train.csv";
  ws.features_test = base / "features" / "features_test.csv";
  must({"train", "--features", ws.features_train.string(), "--out", (base / "model").string()});
  ws.model = base / "model" / "model.json";
  must({"predict", "--model", ws.model.string(), "--features", ws.features_test.string(), "--out",
        (base / "pred").string()});
  ws.predictions = base / "pred" / "predictions.csv";

  const auto graph = featpipe::builtin_alexnet_graph();
  const auto bundle = featpipe::load_bundle(ws.bundle / "manifest.json", graph);
  featpipe::GoldenFixture fx;
  fx.input = featpipe::prepare_network_input(featpipe::read_image(ws.data / "images" / "img_0000.png"));
  featpipe::ForwardOptions opts;
  opts.keep = {"fc7", "prob"};
  const auto acts = featpipe::forward(graph, bundle, fx.input, opts);
  fx.fc7 = acts.at("fc7");
  fx.prob = acts.at("prob");
  fx.description = "engine output for img_0000";
  ws.fixture = base / "fixture";
  featpipe::write_fixture(fx, ws.fixture);
  return ws;
}

std::vector<Step> steps(const Workspace& ws) {
  const auto manifest = (ws.data / "manifest.csv").string();
  const auto bundle = ws.bundle.string();
  const std::vector<std::string> workspace{"--manifest", manifest, "--threads", "1", "--seed", "2"};
  auto with = [](std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  return {
      {"extract", {"extract", "--bundle", bundle, "--manifest", manifest, "--threads", "1", "--out", "{out}"}},
      {"train", {"train", "--features", ws.features_train.string(), "--svm.kernel", "rbf", "--out", "{out}"}},
      {"tune", {"tune", "--features", ws.features_train.string(), "--tuner.budget", "6", "--tuner.folds", "3",
                "--threads", "1", "--out", "{out}"}},
      {"predict", {"predict", "--model", ws.model.string(), "--features", ws.features_test.string(), "--out", "{out}"}},
      {"evaluate", {"evaluate", "--predictions", ws.predictions.string(), "--out", "{out}"}},
      {"learning-curve", with({"learning-curve", "--bundle", bundle, "--curve.fractions", "0.5,1", "--bof.k", "20", "--bof.iters", "10",
                               "--softmax.epochs", "50", "--out", "{out}"},
                              workspace)},
      {"baseline bof", with({"baseline", "bof", "--bof.k", "20", "--bof.iters", "10", "--out", "{out}"}, workspace)},
      {"baseline rawsvm", with({"baseline", "rawsvm", "--out", "{out}"}, workspace)},
      {"baseline softmax", with({"baseline", "softmax", "--bundle", bundle, "--softmax.epochs", "50", "--out", "{out}"},
                                workspace)},
      {"visualize", {"visualize", "--bundle", bundle, "--out", "{out}"}},
      {"stats", {"stats", "--features", ws.features_train.string(), "--out", "{out}"}},
      {"split", {"split", "--manifest", manifest, "--split.per_class_train", "6", "--seed", "4", "--out", "{out}"}},
      {"synth-bundle", {"synth-bundle", "--seed", "9", "--out", "{out}"}},
      {"synth-dataset", {"synth-dataset", "--synth.count", "10", "--synth.size", "24", "--out", "{out}"}},
      {"check-fixture", {"check-fixture", "--bundle", bundle, "--fixture", ws.fixture.string()}},
  };
}

CliResult run_step(const Step& step, const fs::path& out) {
  auto args = step.args;
  for (auto& a : args) {
    if (a == "{out}") a = out.string();
  }
  return run(args);
}

std::vector<std::string> compare_trees(const fs::path& a, const fs::path& b) {
  const auto fa = files_under(a);
  const auto fb = files_under(b);
  std::vector<std::string> diffs;
  if (fa.empty()) diffs.push_back("<none>");
  for (const auto& [name, bytes] : fa) {
    auto it = fb.find(name);
    if (it == fb.end() || it->second != bytes) diffs.push_back(name);
  }
  for (const auto& [name, bytes] : fb) {
    if (!fa.contains(name)) diffs.push_back(name);
  }
  return diffs;
}

}  // namespace cli_scenario
