#include "supergaze/model.hpp"

#include <stdexcept>

#include "supergaze/errors.hpp"

namespace supergaze::net {

void ModelConfig::validate_and_default() {
  if (mode != "static" && mode != "temporal")
    throw ConfigError("model mode must be 'static' or 'temporal', got '" + mode + "'");
  if (backbone != "resnet18" && backbone != "toy")
    throw ConfigError("unknown backbone '" + backbone + "'");
  const prep::ScaleSchedule expected =
      temporal() ? prep::ScaleSchedule::temporal_default() : prep::ScaleSchedule::static_default();
  if (schedule.scales.empty()) {
    schedule = expected;
  } else if (schedule.scales != expected.scales) {
    throw ConfigError("scale schedule does not match the '" + mode + "' mode");
  }
  schedule.validate(prep::kHeadResolution);
  if (fuse.depth < 1) throw ConfigError("fusion depth must be >= 1");
}

GazePrediction prediction_from_trig(const codec::TrigGaze& trig) {
  GazePrediction p;
  p.trig = trig;
  p.decoded = codec::decode(trig);
  p.vector = codec::angles_to_vector(p.decoded);
  return p;
}

GazeEstimator::GazeEstimator(ModelConfig config, uint64_t seed) : config_(std::move(config)) {
  config_.validate_and_default();
  head_net_ = make_extractor(config_.backbone, seed, "head");
  eye_net_ = make_extractor(config_.backbone, seed + 1, "eye");
  if (head_net_->channels() != eye_net_->channels())
    throw ConfigError("branch extractors must emit the same feature width");
  const int c = head_net_->channels();
  const int head_hw = prep::kHeadResolution / head_net_->stride();
  const int eye_hw = prep::kEyeResolution / eye_net_->stride();
  const int n_head = static_cast<int>(config_.schedule.size());
  const int n_eye = config_.temporal() ? 2 * prep::kTemporalWindow : 2;
  head_len_ = n_head * head_hw * head_hw;
  eye_len_ = n_eye * eye_hw * eye_hw;

  config_.fuse.dim = c;
  Rng rng(seed + 2);
  fuse_ = std::make_unique<DhecaModule>(config_.fuse, head_len_, eye_len_, rng);
  pred_fc1_ = nn::Linear("pred.fc1", 2 * c, c);
  pred_fc2_ = nn::Linear("pred.fc2", c, 3);
  pred_fc1_.init(rng);
  pred_fc2_.init(rng);
}

Tensor GazeEstimator::forward_tokens(const std::vector<const ImageTensor*>& head_imgs,
                                     const std::vector<const ImageTensor*>& eye_imgs,
                                     bool training, std::vector<AttentionTrace>* traces) {
  for (const auto* img : head_imgs)
    if (img->height() != prep::kHeadResolution || img->width() != prep::kHeadResolution)
      throw ConfigError("head crops must be " + std::to_string(prep::kHeadResolution) + "x" +
                        std::to_string(prep::kHeadResolution));
  for (const auto* img : eye_imgs)
    if (img->height() != prep::kEyeResolution || img->width() != prep::kEyeResolution)
      throw ConfigError("eye crops must be " + std::to_string(prep::kEyeResolution) + "x" +
                        std::to_string(prep::kEyeResolution));
  Tensor head_feats = head_net_->forward(images_to_batch(head_imgs), training);
  Tensor eye_feats = eye_net_->forward(images_to_batch(eye_imgs), training);
  FwdShape s;
  s.n_head = head_feats.dim(0);
  s.n_eye = eye_feats.dim(0);
  s.head_hw = head_feats.dim(2);
  s.eye_hw = eye_feats.dim(2);
  TokenBatch head_tokens = tokens_from_features(head_feats);
  TokenBatch eye_tokens = tokens_from_features(eye_feats);
  if (head_tokens.tokens.dim(0) != head_len_ || eye_tokens.tokens.dim(0) != eye_len_)
    throw ConfigError("token count mismatch: check input resolutions");
  Tensor fused = fuse_->forward(head_tokens.tokens, eye_tokens.tokens, traces);
  const int c = feature_dim();
  Tensor trig = pred_fc2_.forward(pred_act_.forward(pred_fc1_.forward(fused.reshaped({1, 2 * c}))));
  fwd_shapes_.push_back(s);
  return trig.reshaped({3});
}

Tensor GazeEstimator::forward(const prep::FrameInputs& in, bool training,
                              std::vector<AttentionTrace>* traces) {
  if (config_.temporal()) throw ConfigError("temporal model fed with static inputs");
  std::vector<const ImageTensor*> heads;
  for (const auto& img : in.head_scales) heads.push_back(&img);
  std::vector<const ImageTensor*> eyes{&in.left_eye, &in.right_eye};
  return forward_tokens(heads, eyes, training, traces);
}

Tensor GazeEstimator::forward(const prep::TemporalInputs& in, bool training,
                              std::vector<AttentionTrace>* traces) {
  if (!config_.temporal()) throw ConfigError("static model fed with temporal inputs");
  std::vector<const ImageTensor*> heads;
  for (const auto& img : in.head_frames) heads.push_back(&img);
  std::vector<const ImageTensor*> eyes;
  for (const auto& [left, right] : in.eyes) {
    eyes.push_back(&left);
    eyes.push_back(&right);
  }
  return forward_tokens(heads, eyes, training, traces);
}

void GazeEstimator::backward(const Tensor& d_trig) {
  if (fwd_shapes_.empty()) throw std::logic_error("GazeEstimator: backward without forward");
  FwdShape s = fwd_shapes_.back();
  fwd_shapes_.pop_back();
  const int c = feature_dim();
  Tensor d_fused =
      pred_fc1_.backward(pred_act_.backward(pred_fc2_.backward(d_trig.reshaped({1, 3}))));
  Tensor d_head_tokens, d_eye_tokens;
  fuse_->backward(d_fused.reshaped({2 * c}), d_head_tokens, d_eye_tokens);
  eye_net_->backward(token_grads_to_features(d_eye_tokens, s.n_eye, c, s.eye_hw, s.eye_hw));
  head_net_->backward(token_grads_to_features(d_head_tokens, s.n_head, c, s.head_hw, s.head_hw));
}

GazePrediction GazeEstimator::predict(const prep::FrameInputs& in) {
  Tensor trig = forward(in, /*training=*/false);
  clear_cache();
  return prediction_from_trig({trig(0), trig(1), trig(2)});
}

GazePrediction GazeEstimator::predict(const prep::TemporalInputs& in) {
  Tensor trig = forward(in, /*training=*/false);
  clear_cache();
  return prediction_from_trig({trig(0), trig(1), trig(2)});
}

GazePrediction GazeEstimator::predict_static(const ImageTensor& head,
                                             const prep::Preprocessor& prep,
                                             const std::string& source_id) {
  return predict(prep.static_inputs(head, source_id));
}

GazePrediction GazeEstimator::predict_temporal(const std::vector<ImageTensor>& frames,
                                               const prep::Preprocessor& prep,
                                               const std::vector<std::string>& source_ids) {
  return predict(prep.temporal_inputs(frames, source_ids));
}

void GazeEstimator::collect(nn::ParamRefs& out) {
  head_net_->collect(out);
  eye_net_->collect(out);
  fuse_->collect(out);
  pred_fc1_.collect(out);
  pred_fc2_.collect(out);
}

void GazeEstimator::zero_grads() {
  nn::ParamRefs refs;
  collect(refs);
  for (auto* p : refs) p->zero_grad();
}

void GazeEstimator::clear_cache() {
  head_net_->clear_cache();
  eye_net_->clear_cache();
  fuse_->clear_cache();
  pred_fc1_.clear_cache();
  pred_fc2_.clear_cache();
  pred_act_.clear_cache();
  fwd_shapes_.clear();
}

std::size_t GazeEstimator::parameter_count() {
  nn::ParamRefs refs;
  collect(refs);
  std::size_t n = 0;
  for (const auto* p : refs)
    if (p->trainable) n += p->value.size();
  return n;
}

prep::Preprocessor make_preprocessor(const ModelConfig& config,
                                     std::shared_ptr<const prep::LandmarkDetector> detector,
                                     std::shared_ptr<const prep::SuperResolver> sr) {
  ModelConfig c = config;
  c.validate_and_default();
  return prep::Preprocessor(c.sr, c.schedule, std::move(detector), std::move(sr));
}

}  // namespace supergaze::net
