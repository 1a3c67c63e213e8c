#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

// Drives every CLI command against a small synthetic workspace.
namespace cli_scenario {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
  std::set<std::string> keys;
};

CliResult run(const std::vector<std::string>& args);

// One invocation per command; "{out}" in args is replaced by the output dir.
struct Step {
  std::string command;
  std::vector<std::string> args;
};

// Shared inputs built once under `base`: a 24-image synthetic set, a seeded
// bundle, extracted features, a trained model, predictions and a fixture.
struct Workspace {
  std::filesystem::path base;
  std::filesystem::path data;
  std::filesystem::path bundle;
  std::filesystem::path features_train;
  std::filesystem::path features_test;
  std::filesystem::path model;
  std::filesystem::path predictions;
  std::filesystem::path fixture;
};

// Throws std::runtime_error if a setup command fails.
Workspace prepare(const std::filesystem::path& base);

std::vector<Step> steps(const Workspace& ws);

CliResult run_step(const Step& step, const std::filesystem::path& out);

// Relative paths of files that differ, exist on one side only, or "<none>"
// when the first directory holds no files at all.
std::vector<std::string> compare_trees(const std::filesystem::path& a, const std::filesystem::path& b);

}  // namespace cli_scenario
