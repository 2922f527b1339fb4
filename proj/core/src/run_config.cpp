#include "supergaze/run_config.hpp"

#include <cstdlib>
#include <fstream>

#include "supergaze/errors.hpp"

namespace supergaze::cfg {

std::string default_device() {
  const char* env = std::getenv("SUPERGAZE_DEVICE");
  return (env != nullptr && *env != '\0') ? env : "cpu";
}

nlohmann::json model_to_json(const net::ModelConfig& m) {
  return {{"mode", m.mode},
          {"backbone", m.backbone},
          {"sr", prep::to_string(m.sr)},
          {"scales", m.schedule.scales},
          {"attention", net::to_string(m.fuse.variant)},
          {"depth", m.fuse.depth},
          {"heads", m.fuse.heads},
          {"mlp_ratio", m.fuse.mlp_ratio}};
}

net::ModelConfig model_from_json(const nlohmann::json& j) {
  net::ModelConfig m;
  m.mode = j.value("mode", m.mode);
  m.backbone = j.value("backbone", m.backbone);
  if (j.contains("sr")) m.sr = prep::parse_sr_mode(j.at("sr").get<std::string>());
  if (j.contains("scales")) m.schedule.scales = j.at("scales").get<std::vector<int>>();
  if (j.contains("attention")) {
    m.fuse.variant = net::parse_attention_variant(j.at("attention").get<std::string>());
  }
  m.fuse.depth = j.value("depth", m.fuse.depth);
  m.fuse.heads = j.value("heads", m.fuse.heads);
  m.fuse.mlp_ratio = j.value("mlp_ratio", m.fuse.mlp_ratio);
  m.validate_and_default();
  return m;
}

nlohmann::json RunConfig::to_json() const {
  return {{"model", model_to_json(model)},
          {"train", train.to_json()},
          {"dataset_root", dataset_root},
          {"dataset_format", dataset_format},
          {"detector", detector},
          {"sr", sr},
          {"intervals", intervals_path},
          {"out_dir", out_dir},
          {"runs", runs}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig c;
  c.train.device = default_device();
  if (j.contains("model")) c.model = model_from_json(j.at("model"));
  if (j.contains("train")) {
    c.train = train::TrainConfig::from_json(j.at("train"));
    // An explicit device in the file wins; otherwise keep the environment default.
    if (!j.at("train").contains("device")) c.train.device = default_device();
  }
  c.dataset_root = j.value("dataset_root", c.dataset_root);
  c.dataset_format = j.value("dataset_format", c.dataset_format);
  c.detector = j.value("detector", c.detector);
  c.sr = j.value("sr", c.sr);
  c.intervals_path = j.value("intervals", c.intervals_path);
  c.out_dir = j.value("out_dir", c.out_dir);
  c.runs = j.value("runs", c.runs);
  if (c.runs < 1) throw SchemaError("runs must be at least 1");
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("run configuration not found: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("run configuration " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw SchemaError("run configuration must be a JSON object");
  try {
    return from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("run configuration " + path.string() + ": " + e.what());
  }
}

void RunConfig::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw PipelineError(path.string(), "cannot write run configuration");
  out << to_json().dump(2) << '\n';
}

}  // namespace supergaze::cfg
