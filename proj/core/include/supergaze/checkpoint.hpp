#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "supergaze/nn.hpp"

namespace supergaze::ckpt {

struct TensorInfo {
  std::string name;
  std::vector<int> shape;
};

/// Single-file parameter archive: magic + format version + JSON header
/// (config echo and tensor index) + raw little-endian doubles. Values
/// round-trip bitwise.
void save_checkpoint(const std::filesystem::path& path, const nlohmann::json& config,
                     const nn::ParamRefs& params);

/// Loads values into the given parameters, matched by name. Unknown or
/// missing names and shape mismatches are schema violations. Returns the
/// stored config echo.
nlohmann::json load_checkpoint(const std::filesystem::path& path, const nn::ParamRefs& params);

/// Warm-start loader: copies every archive tensor whose name and shape
/// both match a given parameter, silently skipping the rest (positional
/// tables change size across modes). Returns the names loaded.
std::vector<std::string> load_matching(const std::filesystem::path& path,
                                       const nn::ParamRefs& params);

/// Reads only the config echo.
nlohmann::json peek_config(const std::filesystem::path& path);

/// Tensor index without payload.
std::vector<TensorInfo> list_tensors(const std::filesystem::path& path);

}  // namespace supergaze::ckpt
