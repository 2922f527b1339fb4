#include "supergaze/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "supergaze/checkpoint.hpp"
#include "supergaze/errors.hpp"
#include "supergaze/gaze_codec.hpp"
#include "supergaze/rng.hpp"

namespace supergaze::train {

nlohmann::json TrainConfig::to_json() const {
  return {{"epochs", epochs},
          {"batch_size", batch_size},
          {"learning_rate", learning_rate},
          {"seed", seed},
          {"device", device},
          {"select_best_val", select_best_val},
          {"early_stop_train_ae", early_stop_train_ae},
          {"warm_start", warm_start}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.device = j.value("device", cfg.device);
  cfg.select_best_val = j.value("select_best_val", cfg.select_best_val);
  cfg.early_stop_train_ae = j.value("early_stop_train_ae", cfg.early_stop_train_ae);
  cfg.warm_start = j.value("warm_start", cfg.warm_start);
  cfg.validate();
  return cfg;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (early_stop_train_ae < 0.0) throw ConfigError("early_stop_train_ae must be non-negative");
}

nlohmann::json RunRecord::to_json() const {
  return {{"config", config_echo},
          {"train_loss", train_loss},
          {"train_ae", train_ae},
          {"val_ae", val_ae},
          {"checkpoint", checkpoint_path},
          {"seed", seed}};
}

void RunRecord::save(const std::filesystem::path& path) const {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw PipelineError(path.string(), "cannot write run record");
  out << to_json().dump(2) << '\n';
}

double l1_loss(const codec::TrigGaze& pred, const codec::TrigGaze& target) {
  return (std::abs(pred.sy - target.sy) + std::abs(pred.cy - target.cy) +
          std::abs(pred.sp - target.sp)) /
         3.0;
}

double l1_loss(const Tensor& pred, const codec::TrigGaze& target) {
  return l1_loss(codec::TrigGaze{pred(0), pred(1), pred(2)}, target);
}

Adam::Adam(nn::ParamRefs params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const nn::Param* p : params_) {
    m_.emplace_back(p->value.shape());
    v_.emplace_back(p->value.shape());
  }
}

void Adam::zero_grads() {
  for (nn::Param* p : params_) p->zero_grad();
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    nn::Param& p = *params_[i];
    if (!p.trainable) continue;
    double* val = p.value.data();
    const double* grad = p.grad.data();
    double* m = m_[i].data();
    double* v = v_[i].data();
    const std::size_t n = p.value.size();
    for (std::size_t k = 0; k < n; ++k) {
      const double g = grad[k];
      m[k] = beta1_ * m[k] + (1.0 - beta1_) * g;
      v[k] = beta2_ * v[k] + (1.0 - beta2_) * g * g;
      const double m_hat = m[k] / bc1;
      const double v_hat = v[k] / bc2;
      val[k] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
    }
  }
}

TrainData prepare_training_data(const net::ModelConfig& config, const prep::Preprocessor& prep,
                                const std::vector<data::GazeSample>& samples,
                                const std::function<ImageTensor(const data::GazeSample&)>& loader) {
  TrainData out;
  auto prior_of = [](const data::GazeSample& s,
                     const ImageTensor& img) -> std::optional<prep::EyeRegions> {
    if (!s.left_eye_box && !s.right_eye_box) return std::nullopt;
    prep::EyeRegions regions;
    if (s.left_eye_box) regions.left = s.left_eye_box->to_pixels(img.width(), img.height());
    if (s.right_eye_box) regions.right = s.right_eye_box->to_pixels(img.width(), img.height());
    return regions;
  };

  if (config.temporal()) {
    const auto windows = data::temporal_windows(samples);
    out.temporal_inputs.reserve(windows.size());
    out.targets.reserve(windows.size());
    for (const auto& w : windows) {
      std::vector<ImageTensor> frames;
      std::vector<std::string> ids;
      std::vector<std::optional<prep::EyeRegions>> priors;
      frames.reserve(w.frame_indices.size());
      for (std::size_t idx : w.frame_indices) {
        const data::GazeSample& s = samples[idx];
        frames.push_back(loader(s));
        ids.push_back(s.image_path);
        priors.push_back(prior_of(s, frames.back()));
      }
      out.temporal_inputs.push_back(prep.temporal_inputs(frames, ids, priors));
      const data::GazeSample& label = samples[w.label_index];
      out.targets.push_back(codec::encode(codec::vector_to_angles(label.gaze)));
      out.gaze.push_back(label.gaze);
    }
    return out;
  }

  out.static_inputs.reserve(samples.size());
  out.targets.reserve(samples.size());
  for (const data::GazeSample& s : samples) {
    const ImageTensor img = loader(s);
    out.static_inputs.push_back(prep.static_inputs(img, s.image_path, prior_of(s, img)));
    out.targets.push_back(codec::encode(codec::vector_to_angles(s.gaze)));
    out.gaze.push_back(s.gaze);
  }
  return out;
}

namespace {

Tensor forward_cached(net::GazeEstimator& model, const TrainData& d, std::size_t i,
                      bool training) {
  return d.temporal() ? model.forward(d.temporal_inputs[i], training)
                      : model.forward(d.static_inputs[i], training);
}

}  // namespace

double dataset_ae(net::GazeEstimator& model, const TrainData& d) {
  double sum = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Tensor trig = forward_cached(model, d, i, /*training=*/false);
    model.clear_cache();
    const auto pred = net::prediction_from_trig({trig(0), trig(1), trig(2)});
    sum += codec::angular_error_deg(pred.vector, d.gaze[i]);
  }
  return d.size() == 0 ? 0.0 : sum / static_cast<double>(d.size());
}

RunRecord train(net::GazeEstimator& model, const TrainConfig& cfg, const TrainData& train_data,
                const std::filesystem::path& run_dir, const nlohmann::json& config_echo,
                const TrainData* val_data) {
  cfg.validate();
  if (train_data.size() == 0) throw ConfigError("training set is empty");

  std::filesystem::create_directories(run_dir);
  RunRecord record;
  record.config_echo = config_echo;
  record.seed = cfg.seed;
  const std::filesystem::path ckpt_path = run_dir / "model.ckpt";
  record.checkpoint_path = ckpt_path.string();

  nn::ParamRefs params;
  model.collect(params);
  Adam opt(params, cfg.learning_rate);
  Rng rng(cfg.seed);

  std::vector<std::size_t> order(train_data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const bool track_train_ae = cfg.early_stop_train_ae > 0.0;
  double best_val = std::numeric_limits<double>::infinity();
  bool saved = false;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(stop - start);
      opt.zero_grads();
      double batch_loss = 0.0;
      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t i = order[b];
        const codec::TrigGaze& target = train_data.targets[i];
        const Tensor trig = forward_cached(model, train_data, i, /*training=*/true);
        batch_loss += l1_loss(trig, target);
        // Subgradient of the mean absolute difference, averaged over the batch.
        const double t[3] = {target.sy, target.cy, target.sp};
        Tensor d_trig({3});
        for (int k = 0; k < 3; ++k) {
          const double diff = trig(k) - t[k];
          d_trig(k) = (diff > 0.0 ? 1.0 : diff < 0.0 ? -1.0 : 0.0) * inv_batch / 3.0;
        }
        model.backward(d_trig);
      }
      batch_loss *= inv_batch;
      if (!std::isfinite(batch_loss)) {
        throw PipelineError("train",
                            "loss diverged (non-finite) at epoch " + std::to_string(epoch) +
                                ", batch offset " + std::to_string(start));
      }
      opt.step();
      loss_sum += batch_loss * static_cast<double>(stop - start);
    }
    record.train_loss.push_back(loss_sum / static_cast<double>(order.size()));

    if (track_train_ae) record.train_ae.push_back(dataset_ae(model, train_data));
    if (val_data != nullptr) {
      const double v = dataset_ae(model, *val_data);
      record.val_ae.push_back(v);
      if (cfg.select_best_val && v < best_val) {
        best_val = v;
        ckpt::save_checkpoint(ckpt_path, config_echo, params);
        saved = true;
      }
    }
    if (track_train_ae && record.train_ae.back() < cfg.early_stop_train_ae) break;
  }

  // Default policy: keep the final-epoch weights. Best-validation selection
  // already wrote its checkpoint above.
  if (!cfg.select_best_val || !saved) {
    ckpt::save_checkpoint(ckpt_path, config_echo, params);
  }
  record.save(run_dir / "run.json");
  return record;
}

MultiRunResult multi_run(const net::ModelConfig& model_config, const TrainConfig& cfg,
                         const TrainData& train_data, const std::filesystem::path& run_root,
                         const nlohmann::json& config_echo, int runs, const TrainData* val_data) {
  if (runs < 1) throw ConfigError("runs must be at least 1");
  MultiRunResult out;
  for (int r = 0; r < runs; ++r) {
    TrainConfig run_cfg = cfg;
    run_cfg.seed = cfg.seed + static_cast<uint64_t>(r);
    nlohmann::json echo = config_echo;
    echo["train"] = run_cfg.to_json();
    echo["run_index"] = r;
    const std::filesystem::path run_dir = run_root / ("run" + std::to_string(r));
    try {
      net::GazeEstimator model(model_config, run_cfg.seed);
      if (!run_cfg.warm_start.empty()) {
        nn::ParamRefs params;
        model.collect(params);
        ckpt::load_matching(run_cfg.warm_start, params);
      }
      out.records.push_back(train(model, run_cfg, train_data, run_dir, echo, val_data));
    } catch (const std::exception& e) {
      out.failures.push_back("run " + std::to_string(r) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace supergaze::train
