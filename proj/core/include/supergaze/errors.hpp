#pragma once

#include <stdexcept>
#include <string>

namespace supergaze {

/// Bad or inconsistent configuration (wrong scale, frame count, dimensions,
/// unknown subset, missing config file).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Structurally invalid input data (malformed annotation files, bad
/// checkpoint containers, schema version mismatches).
class SchemaError : public std::runtime_error {
public:
  explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Failure inside the per-frame processing pipeline; carries the frame id.
class PipelineError : public std::runtime_error {
public:
  PipelineError(const std::string& frame_id, const std::string& msg)
      : std::runtime_error("frame '" + frame_id + "': " + msg), frame_id_(frame_id) {}

  const std::string& frame_id() const { return frame_id_; }

private:
  std::string frame_id_;
};

}  // namespace supergaze
