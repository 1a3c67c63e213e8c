// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "featpipe/csv.hpp"
#include "featpipe/evaluation.hpp"
#include "featpipe/layers.hpp"
#include "featpipe/network.hpp"
#include "featpipe/tuner.hpp"
#include "featpipe/weights.hpp"
#include "support/cli_scenario.hpp"
#include "support/fakes.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"
#include "support/svm_suite.hpp"
#include "support/tempdir.hpp"
#include "support/toy.hpp"
#include "support/xmlcheck.hpp"

using namespace featpipe;
namespace fs = std::filesystem;

namespace {

constexpr std::size_t kLayerCases = 100;
constexpr double kLayerRelTol = 1e-5;
constexpr double kLayerSeconds = 60.0;
constexpr std::size_t kSvmMinCases = 50;
constexpr double kSvmGapTol = 1e-3;
constexpr double kSvmKktTol = 1e-3 + 1e-9;
constexpr double kSvmEqTol = 1e-9;
constexpr double kSvmSeconds = 120.0;
constexpr std::size_t kTunerBudget = 30;
constexpr double kTunerSeparableObjective = 0.0;
constexpr double kGradRelTol = 1e-4;
constexpr double kAccuracyTol = 5e-5;
constexpr double kRawSvmMinAccuracy = 0.95;
constexpr double kEndToEndSeconds = 600.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

Outcome layer_oracles() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(2024);
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(gen);
  };
  double conv_worst = 0, lrn_worst = 0, fc_worst = 0;
  std::size_t grouped = 0, pool_mismatch = 0;
  for (std::size_t i = 0; i < kLayerCases; ++i) {
    const std::size_t groups = i % 2 ? 2 : 1;
    grouped += groups == 2;
    const std::size_t c = groups * pick(1, 4), o = groups * pick(1, 5);
    const std::size_t k = 2 * pick(0, 2) + 1, stride = pick(1, 3), pad = pick(0, 2);
    const std::size_t h = pick(k, 16), w = pick(k, 16);
    const auto x = oracle::random_tensor({c, h, w}, gen);
    const auto wt = oracle::random_tensor({o, c / groups, k, k}, gen);
    const auto b = oracle::random_tensor({o}, gen).values();
    const auto got = layers::conv2d(x, wt, b, {stride, pad, groups});
    conv_worst = std::max(conv_worst, oracle::relative_error(got, oracle::conv2d(x, wt, b, stride, pad, groups)));
  }
  for (std::size_t i = 0; i < kLayerCases; ++i) {
    layers::LrnParams p;
    p.size = 2 * pick(0, 3) + 1;
    p.k = static_cast<float>(1.0 + 0.1 * static_cast<double>(pick(0, 10)));
    p.alpha = static_cast<float>(1e-4 * static_cast<double>(pick(1, 100)));
    p.beta = static_cast<float>(0.5 + 0.05 * static_cast<double>(pick(0, 8)));
    const auto x = oracle::random_tensor({pick(1, 20), pick(1, 8), pick(1, 8)}, gen, -50, 50);
    const auto want = oracle::lrn(x, p.k, p.size, p.alpha, p.beta);
    lrn_worst = std::max(lrn_worst, oracle::relative_error(layers::lrn(x, p), want));
  }
  for (std::size_t i = 0; i < kLayerCases; ++i) {
    const layers::PoolParams p{pick(1, 3), pick(1, 3)};
    const auto x = oracle::random_tensor({pick(1, 6), pick(p.size, 15), pick(p.size, 15)}, gen);
    pool_mismatch += !(layers::max_pool(x, p) == oracle::max_pool(x, p.size, p.stride));
  }
  for (std::size_t i = 0; i < kLayerCases; ++i) {
    const Shape in = i % 3 ? Shape{pick(1, 300)} : Shape{pick(1, 4), pick(1, 5), pick(1, 5)};
    const std::size_t m = pick(1, 64);
    const auto x = oracle::random_tensor(in, gen);
    const auto wt = oracle::random_tensor({m, element_count(in)}, gen);
    const auto b = oracle::random_tensor({m}, gen).values();
    fc_worst = std::max(fc_worst, oracle::relative_error(layers::fully_connected(x, wt, b),
                                                         oracle::fully_connected(x, wt, b)));
  }
  const double secs = seconds_since(t0);
  Outcome r;
  r.pass = conv_worst <= kLayerRelTol && lrn_worst <= kLayerRelTol && fc_worst <= kLayerRelTol &&
           pool_mismatch == 0 && grouped > 0 && secs < kLayerSeconds;
  r.detail = std::to_string(kLayerCases) + " cases each; conv " + fmt("%.2e", conv_worst) + " (" +
             std::to_string(grouped) + " grouped), lrn " + fmt("%.2e", lrn_worst) + ", fc " + fmt("%.2e", fc_worst) +
             ", maxpool mismatches " + std::to_string(pool_mismatch) + ", " + fmt("%.1f s", secs);
  return r;
}

Outcome graph_census() {
  const auto graph = builtin_alexnet_graph();
  const std::vector<std::pair<std::string, Shape>> expected = {
      {"data", {3, 227, 227}}, {"conv1", {96, 55, 55}}, {"relu1", {96, 55, 55}}, {"norm1", {96, 55, 55}},
      {"pool1", {96, 27, 27}}, {"conv2", {256, 27, 27}}, {"relu2", {256, 27, 27}}, {"norm2", {256, 27, 27}},
      {"pool2", {256, 13, 13}}, {"conv3", {384, 13, 13}}, {"relu3", {384, 13, 13}}, {"conv4", {384, 13, 13}},
      {"relu4", {384, 13, 13}}, {"conv5", {256, 13, 13}}, {"relu5", {256, 13, 13}}, {"pool5", {256, 6, 6}},
      {"fc6", {4096}}, {"relu6", {4096}}, {"drop6", {4096}}, {"fc7", {4096}}, {"relu7", {4096}},
      {"drop7", {4096}}, {"fc8", {1000}}, {"prob", {1000}}, {"output", {1000}},
  };
  std::map<LayerKind, int> counts;
  for (const auto& l : graph.layers) ++counts[l.kind];
  const std::map<LayerKind, int> want_counts = {
      {LayerKind::input, 1}, {LayerKind::conv, 5},    {LayerKind::relu, 7},    {LayerKind::lrn, 2},
      {LayerKind::maxpool, 3}, {LayerKind::fc, 3},    {LayerKind::dropout, 2}, {LayerKind::softmax, 1},
      {LayerKind::output, 1},
  };
  const auto bundle = random_bundle(graph, 1);
  std::mt19937_64 gen(1);
  const auto acts = forward(graph, bundle, oracle::random_tensor({3, 227, 227}, gen, -120, 130));
  std::size_t shape_mismatch = 0;
  for (const auto& [name, shape] : expected) {
    const auto it = acts.find(name);
    shape_mismatch += it == acts.end() || it->second.shape() != shape;
  }
  Outcome r;
  r.pass = activation_shapes(graph) == expected && counts == want_counts && shape_mismatch == 0;
  r.detail = std::to_string(expected.size()) + " layers, forward shape mismatches " + std::to_string(shape_mismatch) +
             ", kind counts " + (counts == want_counts ? "match" : "differ");
  return r;
}

Outcome feature_contract() {
  const auto graph = builtin_alexnet_graph();
  auto bundle = random_bundle(graph, 5);
  bundle.layers.at("fc7").bias[17] = -1000.0f;
  std::mt19937_64 gen(6);
  const auto f = extract_features(graph, bundle, oracle::random_tensor({3, 227, 227}, gen, -120, 130), "probe");
  std::size_t negatives = 0;
  for (float v : f.values()) negatives += v < 0.0f;
  Outcome r;
  r.pass = f.values().size() == 4096 && f.values()[17] < 0.0f;
  r.detail = "length " + std::to_string(f.values().size()) + ", component 17 = " +
             csv::format_float(f.values()[17]) + ", " + std::to_string(negatives) + " negative components";
  return r;
}

Outcome svm_oracle_suite() {
  const auto t0 = Clock::now();
  const auto results = svm_suite::run_all();
  const double secs = seconds_since(t0);
  double gap = 0, kkt = 0, box = 0, eq = 0;
  std::size_t probes = 0, mismatches = 0;
  for (const auto& c : results) {
    gap = std::max(gap, c.objective_gap);
    kkt = std::max(kkt, c.kkt_violation);
    box = std::max(box, c.box_violation);
    eq = std::max(eq, c.equality_residual);
    probes += c.probes;
    mismatches += c.mismatches;
  }
  Outcome r;
  r.pass = results.size() >= kSvmMinCases && gap <= kSvmGapTol && kkt <= kSvmKktTol && box == 0.0 &&
           eq <= kSvmEqTol && mismatches == 0 && secs < kSvmSeconds;
  r.detail = std::to_string(results.size()) + " cases, max gap " + fmt("%.2e", gap) + ", kkt " + fmt("%.2e", kkt) +
             ", box " + fmt("%.1e", box) + ", eq " + fmt("%.1e", eq) + ", prediction mismatches " +
             std::to_string(mismatches) + "/" + std::to_string(probes) + ", " + fmt("%.1f s", secs);
  return r;
}

Outcome tuner_checks() {
  std::vector<int> y;
  const auto x = toy::separable(20, 1, y);
  tuner::CvOptions cv;
  cv.seed = 1;
  const auto a = tuner::optimize(tuner::SearchSpace{}, x, y, kTunerBudget, cv);
  const auto b = tuner::optimize(tuner::SearchSpace{}, x, y, kTunerBudget, cv);
  bool monotone = true, reproducible = a.trace.size() == b.trace.size();
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    if (i > 0 && a.trace[i].incumbent > a.trace[i - 1].incumbent) monotone = false;
    if (reproducible && (a.trace[i].params.C != b.trace[i].params.C || a.trace[i].objective != b.trace[i].objective)) {
      reproducible = false;
    }
  }
  std::vector<int> yo;
  const auto xo = toy::overlapping(25, 3, yo);
  const auto noisy = tuner::optimize(tuner::SearchSpace{}, xo, yo, 12, cv);
  for (std::size_t i = 1; i < noisy.trace.size(); ++i) {
    if (noisy.trace[i].incumbent > noisy.trace[i - 1].incumbent) monotone = false;
  }
  Outcome r;
  r.pass = monotone && reproducible && a.trace.size() == kTunerBudget &&
           a.best_objective == kTunerSeparableObjective;
  r.detail = "trace length " + std::to_string(a.trace.size()) + ", monotone " + (monotone ? "yes" : "no") +
             ", reproducible " + (reproducible ? "yes" : "no") + ", separable final objective " +
             csv::format_double(a.best_objective);
  return r;
}

Outcome gradient_check() {
  double worst = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) worst = std::max(worst, gradcheck::softmax_max_relative_error(seed));
  Outcome r;
  r.pass = worst < kGradRelTol;
  r.detail = "10 random heads, h = " + csv::format_double(gradcheck::kStep) + ", max relative error " + fmt("%.2e", worst);
  return r;
}

Outcome confusion_arithmetic() {
  const ConfusionMatrix m(ClassNames{}, {{{208, 2}, {0, 210}}});
  const std::string acc = format_percent(m.accuracy());
  const std::vector<std::string> shares{format_percent(m.cell_share(0, 0)), format_percent(m.cell_share(0, 1)),
                                        format_percent(m.cell_share(1, 0)), format_percent(m.cell_share(1, 1))};
  Outcome r;
  r.pass = std::abs(m.accuracy() - 0.9952) <= kAccuracyTol && acc == "99.5%" &&
           shares == std::vector<std::string>{"49.5%", "0.5%", "0.0%", "50.0%"};
  r.detail = "accuracy " + fmt("%.4f", m.accuracy()) + " (" + acc + "), shares " + shares[0] + "/" + shares[1] + "/" +
             shares[2] + "/" + shares[3];
  return r;
}

Outcome learning_curve_harness() {
  const auto train = fakes::parity_pool(420);
  const auto test = fakes::parity_pool(40, 1000);
  fakes::RecordingClassifier clf;
  const std::vector<double> fractions{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  const auto points = learning_curve(clf, train, test, fractions, 1);
  bool nested = true, balanced = true;
  for (std::size_t i = 0; i < clf.fits.size(); ++i) {
    const auto ones = std::count(clf.fit_labels[i].begin(), clf.fit_labels[i].end(), 1);
    balanced = balanced && std::abs(2 * ones - static_cast<long>(clf.fits[i].size())) <= 1;
    if (i > 0) nested = nested && std::equal(clf.fits[i - 1].begin(), clf.fits[i - 1].end(), clf.fits[i].begin());
  }
  Outcome r;
  r.pass = points.front().n_images == 42 && points.front().n_features == 172032 && nested && balanced &&
           points.back().n_images == 420;
  r.detail = "f=0.1 -> " + std::to_string(points.front().n_images) + " images, " +
             std::to_string(points.front().n_features) + " features; nested " + (nested ? "yes" : "no") +
             ", balanced " + (balanced ? "yes" : "no");
  return r;
}

Outcome end_to_end(const fs::path& base) {
  const auto t0 = Clock::now();
  const auto data = base / "e2e_data";
  const auto out = base / "e2e_curve";
  auto gen = cli_scenario::run({"synth-dataset", "--synth.count", "400", "--seed", "1", "--out", data.string()});
  if (gen.code != 0) return {false, "synth-dataset exited " + std::to_string(gen.code) + ": " + gen.err};
  const auto run = cli_scenario::run({"learning-curve", "--manifest", (data / "manifest.csv").string(), "--bundle",
                                      "random:7", "--curve.methods", "cnn-svm,rawsvm,bof,softmax", "--threads", "1",
                                      "--seed", "1", "--out", out.string()});
  const double secs = seconds_since(t0);
  if (run.code != 0) return {false, "learning-curve exited " + std::to_string(run.code) + ": " + run.err};

  Outcome r;
  std::map<std::string, std::map<double, double>> acc;
  std::string csv_problem;
  try {
    const auto table = csv::read_file(out / "learning_curve.csv");
    if (table.header != csv::Row{"method", "fraction", "n_images", "n_features", "accuracy", "seed"}) {
      csv_problem = "bad header";
    }
    for (const auto& row : table.rows) {
      if (row.size() != 6) {
        csv_problem = "ragged row";
        break;
      }
      const double a = csv::parse_double(row[4], "accuracy");
      if (a < 0 || a > 1) csv_problem = "accuracy out of range";
      acc[row[0]][csv::parse_double(row[1], "fraction")] = a;
    }
    if (table.rows.size() != 40) csv_problem = std::to_string(table.rows.size()) + " rows";
  } catch (const std::exception& e) {
    csv_problem = e.what();
  }
  const std::string svg_problem = xmlcheck::problems(read_file(out / "learning_curve.svg"));
  const double raw = acc.count("rawsvm") && acc["rawsvm"].count(1.0) ? acc["rawsvm"][1.0] : -1.0;
  r.pass = csv_problem.empty() && svg_problem.empty() && acc.size() == 4 && raw >= kRawSvmMinAccuracy &&
           secs < kEndToEndSeconds;
  std::ostringstream d;
  d << "400 images, " << fmt("%.0f s", secs) << "; accuracy at f=1:";
  for (const auto& [method, curve] : acc) d << " " << method << " " << format_percent(curve.rbegin()->second);
  d << "; csv " << (csv_problem.empty() ? "ok" : csv_problem) << ", svg " << (svg_problem.empty() ? "ok" : svg_problem);
  r.detail = d.str();
  return r;
}

Outcome determinism(const fs::path& base) {
  const auto ws = cli_scenario::prepare(base / "det_ws");
  std::size_t commands = 0;
  std::vector<std::string> failures;
  const auto steps = cli_scenario::steps(ws);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto a = base / ("det_a_" + std::to_string(i));
    const auto b = base / ("det_b_" + std::to_string(i));
    const auto ra = cli_scenario::run_step(steps[i], a);
    const auto rb = cli_scenario::run_step(steps[i], b);
    ++commands;
    if (ra.code != 0 || rb.code != 0) {
      failures.push_back(steps[i].command + " exit " + std::to_string(ra.code));
      continue;
    }
    const auto diffs = steps[i].command == "check-fixture"
                           ? (ra.out == rb.out ? std::vector<std::string>{} : std::vector<std::string>{"stdout"})
                           : cli_scenario::compare_trees(a, b);
    if (!diffs.empty()) failures.push_back(steps[i].command + " (" + diffs.front() + ")");
  }
  Outcome r;
  r.pass = failures.empty() && commands == 15;
  r.detail = std::to_string(commands) + " commands run twice with --threads 1";
  for (const auto& f : failures) r.detail += "; differs: " + f;
  return r;
}

}  // namespace

int main() {
  TempDir scratch;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"layer-oracle-suite", layer_oracles},
      {"graph-shape-census", graph_census},
      {"feature-contract", feature_contract},
      {"svm-oracle-suite", svm_oracle_suite},
      {"tuner", tuner_checks},
      {"softmax-gradient-check", gradient_check},
      {"confusion-arithmetic", confusion_arithmetic},
      {"learning-curve-harness", learning_curve_harness},
      {"end-to-end-synthetic", [&] { return end_to_end(scratch.path()); }},
      {"determinism", [&] { return determinism(scratch.path()); }},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
