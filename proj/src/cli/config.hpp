#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

namespace featpipe::cli {

enum class KeyType { path, string, number, integer, boolean, number_list, string_list };

struct KeySpec {
  std::string name;
  KeyType type;
  nlohmann::json fallback;  // null: no default, the key must be supplied
  std::string help;
};

// Every key a command may read.
const std::vector<KeySpec>& key_registry();
const KeySpec& key_spec(const std::string& name);

// Layered configuration: registry defaults, then a JSON file, then
// command-line overrides. Each typed getter records the key as read.
class Config {
 public:
  Config();

  // Nested objects are flattened to dotted names. Relative path values
  // are resolved against the file's directory. Unknown keys are errors.
  void load_file(const std::filesystem::path& path);
  // Text from a `--dotted.key VALUE` flag, parsed per the key's type.
  void set_from_text(const std::string& key, const std::string& text);

  bool has(const std::string& key) const;

  std::filesystem::path path(const std::string& key);
  std::string string(const std::string& key);
  double number(const std::string& key);
  std::int64_t integer(const std::string& key);
  std::size_t count(const std::string& key, std::size_t min = 0);
  bool boolean(const std::string& key);
  std::vector<double> numbers(const std::string& key);
  std::vector<std::string> strings(const std::string& key);

  // `threads` key, then FEATPIPE_THREADS, then 1.
  unsigned threads();
  // `seed` key; must be positive.
  std::uint64_t seed();

  const std::set<std::string>& keys_read() const { return read_; }

 private:
  const nlohmann::json& value(const std::string& key);

  nlohmann::json values_ = nlohmann::json::object();
  std::set<std::string> read_;
};

}  // namespace featpipe::cli
