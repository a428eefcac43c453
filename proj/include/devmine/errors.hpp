#pragma once

#include <stdexcept>
#include <string>

namespace devmine {

/// Bad configuration or invalid arguments supplied by the caller.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidArgumentError : ConfigError {
  explicit InvalidArgumentError(const std::string& msg) : ConfigError(msg) {}
};

/// Problems with input data (files, logs, labels).
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct MissingColumnError : DataError {
  explicit MissingColumnError(const std::string& column)
      : DataError("missing required column: " + column) {}
};

struct TimestampParseError : DataError {
  explicit TimestampParseError(const std::string& value)
      : DataError("unparseable timestamp: \"" + value + "\"") {}
};

struct EmptyLogError : DataError {
  EmptyLogError() : DataError("event log contains no rows") {}
};

struct LabelingError : DataError {
  explicit LabelingError(const std::string& msg) : DataError(msg) {}
};

struct UnlabeledTraceError : DataError {
  explicit UnlabeledTraceError(const std::string& case_id)
      : DataError("trace has no class label: " + case_id) {}
};

}  // namespace devmine
