#pragma once

#include <filesystem>
#include <string>

#include "featpipe/network.hpp"
#include "featpipe/tensor.hpp"
#include "featpipe/weights.hpp"

namespace featpipe {

// Golden activations: `index.json` plus input.f32le (3x227x227),
// fc7.f32le (4096) and prob.f32le (1000) in one directory.
struct GoldenFixture {
  Tensor input;
  Tensor fc7;
  Tensor prob;
  std::string description;
};

inline constexpr double kFixtureFc7Tolerance = 1e-3;

// Throws ModelError on a missing file, wrong array set, shape or size.
GoldenFixture load_fixture(const std::filesystem::path& dir);

void write_fixture(const GoldenFixture& fixture, const std::filesystem::path& dir);

struct FixtureCheck {
  double fc7_max_abs_error = 0.0;
  double prob_max_abs_error = 0.0;
  std::size_t fc7_worst_index = 0;
  bool passed = false;  // fc7 within kFixtureFc7Tolerance in every component
};

FixtureCheck check_fixture(const GoldenFixture& fixture, const NetworkGraph& graph, const WeightBundle& bundle);

}  // namespace featpipe
