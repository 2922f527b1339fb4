#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "supergaze/model.hpp"
#include "supergaze/training.hpp"

namespace supergaze::cfg {

/// Device fallback: the SUPERGAZE_DEVICE environment variable when set,
/// otherwise "cpu".
std::string default_device();

nlohmann::json model_to_json(const net::ModelConfig& m);
net::ModelConfig model_from_json(const nlohmann::json& j);

/// Complete description of a run: model, optimization, data sources, and
/// pipeline components. Round-trips through JSON; the CLI overlays its
/// flags on top of a loaded file.
struct RunConfig {
  net::ModelConfig model;
  train::TrainConfig train;

  std::string dataset_root;
  std::string dataset_format = "jsonl";  // jsonl | csv | gaze360 | gfie
  std::string detector = "blob";         // see make_detector
  std::string sr = "identity";           // see make_super_resolver
  std::string intervals_path;            // empty: published defaults
  std::string out_dir = "runs";
  int runs = 1;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);

  /// Missing file is a configuration error; unparseable or ill-typed
  /// content is a schema violation.
  static RunConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

}  // namespace supergaze::cfg
