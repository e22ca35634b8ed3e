#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace vlx {

/// Base class for all toolkit errors. `code()` is a stable, machine-readable
/// identifier; the CLI surfaces it as {"error": "<code>"}.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class CapabilityUnsupportedError : public Error {
 public:
  explicit CapabilityUnsupportedError(const std::string& message)
      : Error("capability_unsupported", message) {}
};

/// Transport-level failure talking to a model server, raised after the retry
/// budget is exhausted, or a response that violates the wire contract.
class BackendUnavailableError : public Error {
 public:
  explicit BackendUnavailableError(const std::string& message)
      : Error("backend_unavailable", message) {}
};

/// Raised by the fixture backend when no table entry matches a request.
class FixtureMissError : public Error {
 public:
  explicit FixtureMissError(const std::string& message)
      : Error("fixture_miss", message) {}
};

class GroundingEmptyError : public Error {
 public:
  explicit GroundingEmptyError(const std::string& message)
      : Error("grounding_empty", message) {}
};

class ZeroVectorError : public Error {
 public:
  explicit ZeroVectorError(const std::string& message)
      : Error("zero_vector", message) {}
};

class DimensionMismatchError : public Error {
 public:
  explicit DimensionMismatchError(const std::string& message)
      : Error("dimension_mismatch", message) {}
};

class MalformedTemplateError : public Error {
 public:
  explicit MalformedTemplateError(const std::string& message)
      : Error("malformed_template", message) {}
};

class UnknownWaypointError : public Error {
 public:
  explicit UnknownWaypointError(const std::string& message)
      : Error("unknown_waypoint", message) {}
};

class StoreWriteError : public Error {
 public:
  explicit StoreWriteError(const std::string& message)
      : Error("store_write_error", message) {}
};

/// A patrol store whose on-disk state cannot be read back.
class StoreError : public Error {
 public:
  explicit StoreError(const std::string& message)
      : Error("store_error", message) {}
};

/// Baseline and current embeddings come from different embedding spaces.
class EmbeddingSpaceMismatchError : public Error {
 public:
  explicit EmbeddingSpaceMismatchError(const std::string& message)
      : Error("embedding_space_mismatch", message) {}
};

class ImageIoError : public Error {
 public:
  explicit ImageIoError(const std::string& message)
      : Error("image_io_error", message) {}
};

/// Precondition violation on an operation argument.
class InvalidArgumentError : public Error {
 public:
  explicit InvalidArgumentError(const std::string& message)
      : Error("invalid_argument", message) {}
};

/// Configuration or fixture file rejected. `field_path()` names the
/// offending field, e.g. "noise.n_variants".
class ConfigError : public Error {
 public:
  ConfigError(std::string field_path, const std::string& message)
      : Error("config_error", field_path + ": " + message),
        field_path_(std::move(field_path)) {}

  const std::string& field_path() const noexcept { return field_path_; }

 private:
  std::string field_path_;
};

}  // namespace vlx
