#pragma once

#include <stdexcept>
#include <string>

namespace fpt {

/// Base for every error the library raises. `kind()` is a stable, single-word
/// tag used by the command-line tools when printing machine-parsable errors.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct DimensionError : Error {
  explicit DimensionError(const std::string& what) : Error("dimension", what) {}
};

struct IndexError : Error {
  explicit IndexError(const std::string& what) : Error("index", what) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error("parse", what) {}
};

struct EvaluationError : Error {
  explicit EvaluationError(const std::string& what) : Error("evaluation", what) {}
};

struct ModeError : Error {
  explicit ModeError(const std::string& what) : Error("mode", what) {}
};

struct EmptyDocumentError : Error {
  explicit EmptyDocumentError(const std::string& what) : Error("empty_document", what) {}
};

struct DataError : Error {
  explicit DataError(const std::string& what) : Error("data", what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

struct TrainingError : Error {
  explicit TrainingError(const std::string& what) : Error("training", what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error("io", what) {}
};

}  // namespace fpt
