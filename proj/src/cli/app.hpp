#pragma once

#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace featpipe::cli {

// Exit codes: 0 ok, 1 internal, 2 config, 3 data, 4 model or bundle.
// `args` excludes the program name. When `keys_read` is given it receives
// the config keys the command consulted.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        std::set<std::string>* keys_read = nullptr);

}  // namespace featpipe::cli
