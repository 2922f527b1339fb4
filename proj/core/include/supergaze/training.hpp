#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "supergaze/data.hpp"
#include "supergaze/model.hpp"
#include "supergaze/nn.hpp"

namespace supergaze::train {

struct TrainConfig {
  int epochs = 100;
  int batch_size = 64;
  double learning_rate = 1e-4;  // constant; no schedule, decay, or clipping
  uint64_t seed = 0;
  std::string device = "cpu";
  bool select_best_val = false;        // default: final-epoch checkpoint
  double early_stop_train_ae = 0.0;    // degrees; 0 disables the early stop
  std::string warm_start;              // checkpoint to copy matching weights from

  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
  void validate() const;
};

struct RunRecord {
  nlohmann::json config_echo;
  std::vector<double> train_loss;   // one entry per completed epoch
  std::vector<double> train_ae;     // degrees, when the early stop is active
  std::vector<double> val_ae;       // degrees, when validation data is given
  std::string checkpoint_path;
  uint64_t seed = 0;

  nlohmann::json to_json() const;
  void save(const std::filesystem::path& path) const;
};

/// Mean absolute difference over the three trigonometric components.
double l1_loss(const codec::TrigGaze& pred, const codec::TrigGaze& target);
double l1_loss(const Tensor& pred, const codec::TrigGaze& target);

/// Adaptive-moment optimizer with canonical defaults
/// (beta1 0.9, beta2 0.999, eps 1e-8), bias-corrected.
class Adam {
public:
  explicit Adam(nn::ParamRefs params, double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);

  void zero_grads();
  void step();
  void set_learning_rate(double lr) { lr_ = lr; }

private:
  nn::ParamRefs params_;
  std::vector<Tensor> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

/// Preprocessed training inputs, cached once before the epoch loop so the
/// image pipeline does not rerun per epoch.
struct TrainData {
  std::vector<prep::FrameInputs> static_inputs;      // static mode
  std::vector<prep::TemporalInputs> temporal_inputs;  // temporal mode
  std::vector<codec::TrigGaze> targets;
  std::vector<codec::GazeVector> gaze;  // ground truth for AE tracking

  std::size_t size() const { return targets.size(); }
  bool temporal() const { return !temporal_inputs.empty(); }
};

/// Runs preprocessing over the samples (for temporal mode: over their
/// 7-frame windows) and encodes the targets.
TrainData prepare_training_data(const net::ModelConfig& config, const prep::Preprocessor& prep,
                                const std::vector<data::GazeSample>& samples,
                                const std::function<ImageTensor(const data::GazeSample&)>& loader);

/// One optimization run. Per-sample forward/backward with gradient
/// accumulation over each shuffled batch, one optimizer step per batch.
/// Non-finite loss aborts with a pipeline error naming the epoch. Writes
/// model.ckpt and run.json into run_dir.
RunRecord train(net::GazeEstimator& model, const TrainConfig& cfg, const TrainData& train_data,
                const std::filesystem::path& run_dir, const nlohmann::json& config_echo,
                const TrainData* val_data = nullptr);

/// Mean angular error of the model over cached inputs, evaluation mode.
double dataset_ae(net::GazeEstimator& model, const TrainData& d);

struct MultiRunResult {
  std::vector<RunRecord> records;
  std::vector<std::string> failures;  // diagnostics of failed runs
};

/// `runs` independent trainings with seeds base, base+1, ...; failures are
/// recorded and the remaining runs proceed.
MultiRunResult multi_run(const net::ModelConfig& model_config, const TrainConfig& cfg,
                         const TrainData& train_data, const std::filesystem::path& run_root,
                         const nlohmann::json& config_echo, int runs,
                         const TrainData* val_data = nullptr);

}  // namespace supergaze::train
