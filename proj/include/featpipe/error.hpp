#pragma once

#include <stdexcept>
#include <string>

namespace featpipe {

// Broad failure classes. The CLI maps each one onto its exit code.
enum class ErrorKind {
  internal,
  config,
  data,
  model,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Tensor shape disagreement. `dimension` names the offending extent
// (e.g. "input channels", "kernel height").
class ShapeError : public Error {
 public:
  ShapeError(std::string dimension, const std::string& what)
      : Error(ErrorKind::internal, what), dimension_(std::move(dimension)) {}

  const std::string& dimension() const noexcept { return dimension_; }

 private:
  std::string dimension_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

struct DataError : Error {
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

// Weight bundles, trained models and fixtures.
struct ModelError : Error {
  explicit ModelError(const std::string& what) : Error(ErrorKind::model, what) {}
};

}  // namespace featpipe
