#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "featpipe/csv.hpp"
#include "featpipe/svm.hpp"
#include "support/cli_scenario.hpp"
#include "support/tempdir.hpp"

namespace fs = std::filesystem;
using cli_scenario::run;

namespace {

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::set<std::string> documented_keys(const std::vector<std::string>& command) {
  auto args = command;
  args.push_back("--help");
  const auto r = run(args);
  EXPECT_EQ(r.code, 0);
  const auto at = r.out.find("Config keys read:");
  EXPECT_NE(at, std::string::npos) << r.out;
  std::istringstream line(r.out.substr(at + 17, r.out.find('\n', at) - at - 17));
  std::set<std::string> keys;
  for (std::string k; line >> k;) keys.insert(k);
  return keys;
}

std::vector<std::string> command_words(const std::string& name) {
  std::istringstream in(name);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

}  // namespace

class CliScenario : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir();
    ws_ = new cli_scenario::Workspace(cli_scenario::prepare(dir_->path() / "ws"));
  }
  static void TearDownTestSuite() {
    delete ws_;
    delete dir_;
  }
  static TempDir* dir_;
  static cli_scenario::Workspace* ws_;
};

TempDir* CliScenario::dir_ = nullptr;
cli_scenario::Workspace* CliScenario::ws_ = nullptr;

TEST_F(CliScenario, EveryCommandIsDeterministicAndReadsItsDocumentedKeys) {
  const auto steps = cli_scenario::steps(*ws_);
  std::set<std::string> covered;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& step = steps[i];
    covered.insert(step.command);
    const auto a = dir_->path() / ("run_a_" + std::to_string(i));
    const auto b = dir_->path() / ("run_b_" + std::to_string(i));
    const auto ra = cli_scenario::run_step(step, a);
    const auto rb = cli_scenario::run_step(step, b);
    ASSERT_EQ(ra.code, 0) << step.command << "\n" << ra.err;
    ASSERT_EQ(rb.code, 0) << step.command << "\n" << rb.err;
    if (step.command == "check-fixture") {
      EXPECT_EQ(ra.out, rb.out);
      EXPECT_NE(ra.out.find("fixture ok"), std::string::npos);
    } else {
      EXPECT_EQ(cli_scenario::compare_trees(a, b), std::vector<std::string>{}) << step.command;
    }
    EXPECT_EQ(ra.keys, documented_keys(command_words(step.command))) << step.command;
  }
  EXPECT_EQ(covered.size(), 15u);
}

TEST(Cli, LearningCurveWritesRowsPerMethodAndFraction) {
  TempDir dir;
  ASSERT_EQ(run({"synth-dataset", "--synth.count", "40", "--synth.size", "32", "--out", (dir.path() / "d").string()}).code, 0);
  const auto out = dir.path() / "curve";
  const auto r = run({"learning-curve", "--manifest", (dir.path() / "d" / "manifest.csv").string(), "--curve.methods",
                      "rawsvm", "--curve.fractions", "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0", "--out",
                      out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto table = featpipe::csv::read_file(out / "learning_curve.csv");
  EXPECT_EQ(table.header,
            (featpipe::csv::Row{"method", "fraction", "n_images", "n_features", "accuracy", "seed"}));
  ASSERT_EQ(table.rows.size(), 10u);
  EXPECT_EQ(table.rows[0][2], "2");
  EXPECT_EQ(table.rows[0][3], "8192");
  EXPECT_EQ(table.rows[9][2], "20");
}

TEST_F(CliScenario, PredictRejectsWrongFeatureDimension) {
  featpipe::svm::TrainOptions opts;
  const std::vector<featpipe::svm::Sample> x{{1, 0, 0, 0, 0}, {-1, 0, 0, 0, 0}};
  const std::vector<int> y{1, -1};
  const auto model = featpipe::svm::train(x, y, opts, {"hookah", "nonhookah"});
  write(dir_->path() / "small_model.json", featpipe::svm::serialize(model));
  const auto r = run({"predict", "--model", (dir_->path() / "small_model.json").string(), "--features",
                      ws_->features_test.string(), "--out", (dir_->path() / "p5").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("expected 5, found 4096"), std::string::npos) << r.err;
  const auto poly = run({"train", "--svm.kernel", "poly", "--features", ws_->features_train.string(), "--out",
                         (dir_->path() / "poly").string()});
  EXPECT_EQ(poly.code, 2) << poly.err;
}

TEST(Cli, UndecodableImageFailsUnlessSkipped) {
  TempDir dir;
  const auto data = dir.path() / "broken";
  ASSERT_EQ(run({"synth-dataset", "--synth.count", "4", "--synth.size", "16", "--out", data.string()}).code, 0);
  write(data / "bad.png", "not an image");
  write(data / "manifest.csv", "path,label\nimages/img_0000.png,hookah\nbad.png,nonhookah\n");
  const std::vector<std::string> args{"extract", "--bundle", "random:5", "--manifest",
                                      (data / "manifest.csv").string(), "--out", (data / "out").string()};
  const auto failed = run(args);
  EXPECT_EQ(failed.code, 3);
  EXPECT_NE(failed.err.find("bad.png"), std::string::npos) << failed.err;
  auto skipping = args;
  skipping.push_back("--skip-bad");
  const auto ok = run(skipping);
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_NE(ok.out.find("extracted 1 images (1 skipped)"), std::string::npos) << ok.out;
  EXPECT_NE(ok.err.find("bad.png"), std::string::npos);
  EXPECT_EQ(featpipe::csv::read_file(data / "out" / "features.csv").rows.size(), 1u);
}

TEST(Cli, EvaluatePrintsAccuracyLine) {
  TempDir dir;
  std::string csv = "image_id,actual,predicted,decision_value\n";
  for (int i = 0; i < 420; ++i) {
    const bool hookah = i < 210;
    const bool wrong = i < 2;
    csv += "img" + std::to_string(i) + "," + (hookah ? "hookah" : "nonhookah") + "," +
           (hookah && !wrong ? "hookah" : "nonhookah") + ",0\n";
  }
  write(dir.path() / "p.csv", csv);
  const auto r = run({"evaluate", "--predictions", (dir.path() / "p.csv").string(), "--out", dir.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "accuracy 0.9952 (418/420)\n");
  EXPECT_NE(read_file(dir.path() / "confusion.svg").find("49.5%"), std::string::npos);
  EXPECT_EQ(read_file(dir.path() / "confusion.csv"),
            "actual,predicted,count\nhookah,hookah,208\nhookah,nonhookah,2\n"
            "nonhookah,hookah,0\nnonhookah,nonhookah,210\n");
}

TEST(Cli, MissingBundleIsAModelError) {
  TempDir dir;
  const auto r = run({"visualize", "--bundle", (dir.path() / "nothing").string(), "--out", dir.path().string()});
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.err.find("manifest.json"), std::string::npos) << r.err;
}

TEST(Cli, ConfigErrorsExitTwo) {
  TempDir dir;
  write(dir.path() / "bad.json", R"({"svm": {"C": 1, "no_such_key": 2}})");
  EXPECT_EQ(run({"train", "--config", (dir.path() / "bad.json").string()}).code, 2);
  write(dir.path() / "broken.json", "{");
  EXPECT_EQ(run({"train", "--config", (dir.path() / "broken.json").string()}).code, 2);
  EXPECT_EQ(run({"train", "--svm.C", "abc"}).code, 2);
  EXPECT_EQ(run({"no-such-command"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"train", "--unknown-flag"}).code, 2);
  EXPECT_EQ(run({"synth-bundle", "--seed", "0", "--out", dir.path().string()}).code, 2);
}

TEST(Cli, ConfigFileValuesAndOverrides) {
  TempDir dir;
  write(dir.path() / "c.json", R"({"synth": {"count": 6, "size": 16}, "out": "gen", "seed": 4})");
  auto r = run({"synth-dataset", "--config", (dir.path() / "c.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(featpipe::csv::read_file(dir.path() / "gen" / "manifest.csv").rows.size(), 6u);
  r = run({"synth-dataset", "--config", (dir.path() / "c.json").string(), "--synth.count", "8"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(featpipe::csv::read_file(dir.path() / "gen" / "manifest.csv").rows.size(), 8u);
}

TEST(Cli, HelpListsCommandsAndExitCodes) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  for (const char* c : {"extract", "train", "tune", "predict", "evaluate", "learning-curve", "baseline",
                        "visualize", "stats", "split", "synth-bundle", "synth-dataset", "check-fixture"}) {
    EXPECT_NE(r.out.find(c), std::string::npos) << c;
  }
  EXPECT_NE(r.out.find("Exit codes"), std::string::npos);
}
