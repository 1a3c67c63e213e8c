#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace featpipe::cli {

struct Context {
  Config& config;
  std::ostream& out;
  std::ostream& err;
  bool skip_bad = false;
};

struct Command {
  // Space-separated path, e.g. "baseline bof".
  std::string name;
  std::string description;
  // Output files written under `out`.
  std::vector<std::string> outputs;
  // Every config key the command reads.
  std::vector<std::string> keys;
  std::function<void(Context&)> run;
};

const std::vector<Command>& commands();

}  // namespace featpipe::cli
