#pragma once

#include <memory>
#include <string>
#include <vector>

#include "supergaze/image.hpp"
#include "supergaze/nn.hpp"
#include "supergaze/tensor.hpp"

namespace supergaze::net {

/// Convolutional feature extractor contract: consumes an NCHW batch of
/// RGB images in [0,1] and produces an NCHW feature map whose spatial
/// resolution is the input divided by stride(). All extractors here
/// reduce by a factor of 32, so 224 -> 7x7 and 64 -> 2x2.
class FeatureExtractor {
public:
  virtual ~FeatureExtractor() = default;

  virtual int channels() const = 0;
  virtual int stride() const = 0;
  virtual std::string name() const = 0;

  virtual Tensor forward(const Tensor& images, bool training) = 0;
  /// Gradient w.r.t. the input batch; parameter grads accumulate in place.
  virtual Tensor backward(const Tensor& d_features) = 0;

  virtual void collect(nn::ParamRefs& out) = 0;
  virtual void clear_cache() = 0;
};

/// Standard residual block: two 3x3 convolutions with batch norm, plus an
/// optional strided 1x1 projection on the skip path.
class BasicBlock {
public:
  BasicBlock(const std::string& name, int in_ch, int out_ch, int stride);

  void init(Rng& rng);
  Tensor forward(const Tensor& x, bool training);
  Tensor backward(const Tensor& dy);
  void collect(nn::ParamRefs& out);
  void clear_cache();

private:
  bool projected_;
  nn::Conv2d conv1_, conv2_, proj_;
  nn::BatchNorm2d bn1_, bn2_, bn_proj_;
  nn::Relu relu1_, relu2_;
};

/// 18-layer residual network truncated before global pooling:
/// 7x7/2 stem + 3x3/2 max pool, then four stages of two blocks with
/// widths 64/128/256/512. Output channels: 512.
class ResNet18Extractor : public FeatureExtractor {
public:
  explicit ResNet18Extractor(uint64_t seed = 0, const std::string& prefix = "resnet");

  int channels() const override { return 512; }
  int stride() const override { return 32; }
  std::string name() const override { return "resnet18"; }

  Tensor forward(const Tensor& images, bool training) override;
  Tensor backward(const Tensor& d_features) override;
  void collect(nn::ParamRefs& out) override;
  void clear_cache() override;

private:
  nn::Conv2d stem_;
  nn::BatchNorm2d stem_bn_;
  nn::Relu stem_relu_;
  nn::MaxPool2d pool_;
  std::vector<BasicBlock> blocks_;
};

/// Small stride-32 extractor for fast tests and CPU-scale experiments:
/// an 8x8/8 patchify convolution followed by two strided conv pairs.
class ToyExtractor : public FeatureExtractor {
public:
  explicit ToyExtractor(int channels = 32, uint64_t seed = 0, const std::string& prefix = "toy");

  int channels() const override { return channels_; }
  int stride() const override { return 32; }
  std::string name() const override { return "toy"; }

  Tensor forward(const Tensor& images, bool training) override;
  Tensor backward(const Tensor& d_features) override;
  void collect(nn::ParamRefs& out) override;
  void clear_cache() override;

private:
  int channels_;
  nn::Conv2d patch_, conv1_, conv2_, conv3_, conv4_;
  nn::Relu r0_, r1_, r2_, r3_, r4_;
};

/// `prefix` roots the parameter names (default: the extractor kind); the
/// model passes distinct prefixes so both branches checkpoint side by side.
std::unique_ptr<FeatureExtractor> make_extractor(const std::string& kind, uint64_t seed = 0,
                                                 const std::string& prefix = "");

enum class Branch { kHead, kEye };

/// Token sequence produced from one branch's feature maps, flattened in
/// image-major, then row-major, then column order.
struct TokenBatch {
  Tensor tokens;  // [n_images * h * w, channels]
  Branch branch = Branch::kHead;
  int n_images = 0;
  int height = 0;
  int width = 0;
};

/// Packs planar [0,1] RGB images of identical size into an NCHW batch.
Tensor images_to_batch(const std::vector<const ImageTensor*>& images);
Tensor images_to_batch(const std::vector<ImageTensor>& images);

TokenBatch tokens_from_features(const Tensor& features);
/// Inverse layout mapping for gradients: [L, C] back to [N, C, h, w].
Tensor token_grads_to_features(const Tensor& d_tokens, int n_images, int channels, int height,
                               int width);

/// Evaluation-mode feature extraction for one branch. Head images must be
/// 224x224 and eye images 64x64; anything else is a configuration error.
TokenBatch extract(const std::vector<ImageTensor>& images, Branch which,
                   FeatureExtractor& net);

}  // namespace supergaze::net
