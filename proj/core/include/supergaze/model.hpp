#pragma once

#include <memory>
#include <string>
#include <vector>

#include "supergaze/backbone.hpp"
#include "supergaze/dheca.hpp"
#include "supergaze/gaze_codec.hpp"
#include "supergaze/preprocessing.hpp"

namespace supergaze::net {

struct ModelConfig {
  std::string mode = "static";        // static | temporal
  std::string backbone = "resnet18";  // resnet18 | toy
  prep::SrMode sr = prep::SrMode::kNone;
  prep::ScaleSchedule schedule;  // defaulted from mode when left empty
  DhecaConfig fuse;              // fuse.dim is set from the backbone width at build

  bool temporal() const { return mode == "temporal"; }
  /// Fills mode-dependent defaults and enforces the mode/schedule pairing.
  void validate_and_default();
};

struct GazePrediction {
  codec::TrigGaze trig;      // raw network output
  codec::YawPitch decoded;   // fused decoding, clamped into valid ranges
  codec::GazeVector vector;  // unit gaze direction from the decoded angles
};

GazePrediction prediction_from_trig(const codec::TrigGaze& trig);

/// Static or temporal gaze estimator: two convolutional branch
/// extractors, the head/eye fusion module, and a 2C -> C -> 3
/// prediction MLP emitting the trigonometric triple.
class GazeEstimator {
public:
  GazeEstimator(ModelConfig config, uint64_t seed);

  const ModelConfig& config() const { return config_; }
  int feature_dim() const { return head_net_->channels(); }
  int head_token_count() const { return head_len_; }
  int eye_token_count() const { return eye_len_; }

  FeatureExtractor& head_net() { return *head_net_; }
  FeatureExtractor& eye_net() { return *eye_net_; }
  DhecaModule& fuser() { return *fuse_; }

  /// Raw trigonometric output [3]; training=true keeps activation
  /// caches so backward() can run afterwards.
  Tensor forward(const prep::FrameInputs& in, bool training,
                 std::vector<AttentionTrace>* traces = nullptr);
  Tensor forward(const prep::TemporalInputs& in, bool training,
                 std::vector<AttentionTrace>* traces = nullptr);
  void backward(const Tensor& d_trig);

  GazePrediction predict(const prep::FrameInputs& in);
  GazePrediction predict(const prep::TemporalInputs& in);
  GazePrediction predict_static(const ImageTensor& head, const prep::Preprocessor& prep,
                                const std::string& source_id = "");
  /// Prediction is attached to the central frame (index 3) of the window.
  GazePrediction predict_temporal(const std::vector<ImageTensor>& frames,
                                  const prep::Preprocessor& prep,
                                  const std::vector<std::string>& source_ids = {});

  void collect(nn::ParamRefs& out);
  void zero_grads();
  void clear_cache();
  std::size_t parameter_count();

private:
  Tensor forward_tokens(const std::vector<const ImageTensor*>& head_imgs,
                        const std::vector<const ImageTensor*>& eye_imgs, bool training,
                        std::vector<AttentionTrace>* traces);

  ModelConfig config_;
  int head_len_ = 0, eye_len_ = 0;
  std::unique_ptr<FeatureExtractor> head_net_, eye_net_;
  std::unique_ptr<DhecaModule> fuse_;
  nn::Linear pred_fc1_, pred_fc2_;
  nn::Relu pred_act_;
  struct FwdShape {
    int n_head = 0, n_eye = 0, head_hw = 0, eye_hw = 0;
  };
  std::vector<FwdShape> fwd_shapes_;
};

/// Builds the preprocessing stage matching a model configuration.
prep::Preprocessor make_preprocessor(const ModelConfig& config,
                                     std::shared_ptr<const prep::LandmarkDetector> detector,
                                     std::shared_ptr<const prep::SuperResolver> sr);

}  // namespace supergaze::net
