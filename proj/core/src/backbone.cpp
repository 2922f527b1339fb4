#include "supergaze/backbone.hpp"

#include <stdexcept>

#include "supergaze/errors.hpp"

namespace supergaze::net {

// ------------------------------------------------------------ BasicBlock

BasicBlock::BasicBlock(const std::string& name, int in_ch, int out_ch, int stride)
    : projected_(stride != 1 || in_ch != out_ch),
      conv1_(name + ".conv1", in_ch, out_ch, 3, stride, 1, /*with_bias=*/false),
      conv2_(name + ".conv2", out_ch, out_ch, 3, 1, 1, /*with_bias=*/false),
      proj_(projected_ ? nn::Conv2d(name + ".proj", in_ch, out_ch, 1, stride, 0, false)
                       : nn::Conv2d()),
      bn1_(name + ".bn1", out_ch),
      bn2_(name + ".bn2", out_ch),
      bn_proj_(projected_ ? nn::BatchNorm2d(name + ".bn_proj", out_ch) : nn::BatchNorm2d()) {}

void BasicBlock::init(Rng& rng) {
  conv1_.init(rng);
  conv2_.init(rng);
  if (projected_) proj_.init(rng);
}

Tensor BasicBlock::forward(const Tensor& x, bool training) {
  Tensor main = relu1_.forward(bn1_.forward(conv1_.forward(x), training));
  main = bn2_.forward(conv2_.forward(main), training);
  Tensor skip = projected_ ? bn_proj_.forward(proj_.forward(x), training) : x;
  main += skip;
  return relu2_.forward(main);
}

Tensor BasicBlock::backward(const Tensor& dy) {
  Tensor d_sum = relu2_.backward(dy);
  Tensor d_main = conv1_.backward(bn1_.backward(
      relu1_.backward(conv2_.backward(bn2_.backward(d_sum)))));
  if (projected_) {
    Tensor d_skip = proj_.backward(bn_proj_.backward(d_sum));
    d_main += d_skip;
    return d_main;
  }
  d_main += d_sum;
  return d_main;
}

void BasicBlock::collect(nn::ParamRefs& out) {
  conv1_.collect(out);
  bn1_.collect(out);
  conv2_.collect(out);
  bn2_.collect(out);
  if (projected_) {
    proj_.collect(out);
    bn_proj_.collect(out);
  }
}

void BasicBlock::clear_cache() {
  conv1_.clear_cache();
  conv2_.clear_cache();
  bn1_.clear_cache();
  bn2_.clear_cache();
  relu1_.clear_cache();
  relu2_.clear_cache();
  if (projected_) {
    proj_.clear_cache();
    bn_proj_.clear_cache();
  }
}

// ------------------------------------------------------- ResNet18Extractor

ResNet18Extractor::ResNet18Extractor(uint64_t seed, const std::string& prefix)
    : stem_(prefix + ".stem.conv", 3, 64, 7, 2, 3, /*with_bias=*/false),
      stem_bn_(prefix + ".stem.bn", 64),
      pool_(3, 2, 1) {
  const int widths[4] = {64, 128, 256, 512};
  int in_ch = 64;
  for (int stage = 0; stage < 4; ++stage) {
    const int out_ch = widths[stage];
    const int first_stride = stage == 0 ? 1 : 2;
    const std::string base = prefix + ".stage" + std::to_string(stage + 1);
    blocks_.emplace_back(base + ".block1", in_ch, out_ch, first_stride);
    blocks_.emplace_back(base + ".block2", out_ch, out_ch, 1);
    in_ch = out_ch;
  }
  Rng rng(seed);
  stem_.init(rng);
  for (auto& b : blocks_) b.init(rng);
}

Tensor ResNet18Extractor::forward(const Tensor& images, bool training) {
  Tensor x = pool_.forward(stem_relu_.forward(stem_bn_.forward(stem_.forward(images), training)));
  for (auto& b : blocks_) x = b.forward(x, training);
  return x;
}

Tensor ResNet18Extractor::backward(const Tensor& d_features) {
  Tensor g = d_features;
  for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) g = it->backward(g);
  return stem_.backward(stem_bn_.backward(stem_relu_.backward(pool_.backward(g))));
}

void ResNet18Extractor::collect(nn::ParamRefs& out) {
  stem_.collect(out);
  stem_bn_.collect(out);
  for (auto& b : blocks_) b.collect(out);
}

void ResNet18Extractor::clear_cache() {
  stem_.clear_cache();
  stem_bn_.clear_cache();
  stem_relu_.clear_cache();
  pool_.clear_cache();
  for (auto& b : blocks_) b.clear_cache();
}

// ------------------------------------------------------------ ToyExtractor

ToyExtractor::ToyExtractor(int channels, uint64_t seed, const std::string& prefix)
    : channels_(channels),
      patch_(prefix + ".patch", 3, 16, 8, 8, 0),
      conv1_(prefix + ".conv1", 16, 24, 3, 2, 1),
      conv2_(prefix + ".conv2", 24, 24, 3, 1, 1),
      conv3_(prefix + ".conv3", 24, channels, 3, 2, 1),
      conv4_(prefix + ".conv4", channels, channels, 3, 1, 1) {
  Rng rng(seed);
  patch_.init(rng);
  conv1_.init(rng);
  conv2_.init(rng);
  conv3_.init(rng);
  conv4_.init(rng);
}

Tensor ToyExtractor::forward(const Tensor& images, bool) {
  Tensor x = r0_.forward(patch_.forward(images));
  x = r1_.forward(conv1_.forward(x));
  x = r2_.forward(conv2_.forward(x));
  x = r3_.forward(conv3_.forward(x));
  return r4_.forward(conv4_.forward(x));
}

Tensor ToyExtractor::backward(const Tensor& d_features) {
  Tensor g = conv4_.backward(r4_.backward(d_features));
  g = conv3_.backward(r3_.backward(g));
  g = conv2_.backward(r2_.backward(g));
  g = conv1_.backward(r1_.backward(g));
  return patch_.backward(r0_.backward(g));
}

void ToyExtractor::collect(nn::ParamRefs& out) {
  patch_.collect(out);
  conv1_.collect(out);
  conv2_.collect(out);
  conv3_.collect(out);
  conv4_.collect(out);
}

void ToyExtractor::clear_cache() {
  patch_.clear_cache();
  conv1_.clear_cache();
  conv2_.clear_cache();
  conv3_.clear_cache();
  conv4_.clear_cache();
  r0_.clear_cache();
  r1_.clear_cache();
  r2_.clear_cache();
  r3_.clear_cache();
  r4_.clear_cache();
}

std::unique_ptr<FeatureExtractor> make_extractor(const std::string& kind, uint64_t seed,
                                                 const std::string& prefix) {
  if (kind == "resnet18")
    return std::make_unique<ResNet18Extractor>(seed, prefix.empty() ? "resnet" : prefix);
  if (kind == "toy") return std::make_unique<ToyExtractor>(32, seed, prefix.empty() ? "toy" : prefix);
  throw ConfigError("unknown feature extractor: " + kind);
}

// ----------------------------------------------------------- tokenization

Tensor images_to_batch(const std::vector<const ImageTensor*>& images) {
  if (images.empty()) throw std::invalid_argument("images_to_batch: empty batch");
  const int h = images.front()->height();
  const int w = images.front()->width();
  const int n = static_cast<int>(images.size());
  Tensor batch({n, ImageTensor::kChannels, h, w});
  for (int i = 0; i < n; ++i) {
    const ImageTensor& img = *images[i];
    if (img.height() != h || img.width() != w)
      throw std::invalid_argument("images_to_batch: mixed sizes");
    std::copy(img.data(), img.data() + img.size(),
              batch.data() + static_cast<std::size_t>(i) * img.size());
  }
  return batch;
}

Tensor images_to_batch(const std::vector<ImageTensor>& images) {
  std::vector<const ImageTensor*> ptrs;
  ptrs.reserve(images.size());
  for (const auto& img : images) ptrs.push_back(&img);
  return images_to_batch(ptrs);
}

TokenBatch tokens_from_features(const Tensor& features) {
  if (features.rank() != 4) throw std::invalid_argument("tokens_from_features: expected NCHW");
  const int n = features.dim(0), c = features.dim(1), h = features.dim(2), w = features.dim(3);
  TokenBatch out;
  out.n_images = n;
  out.height = h;
  out.width = w;
  out.tokens = Tensor({n * h * w, c});
  for (int i = 0; i < n; ++i)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const int row = (i * h + y) * w + x;
        for (int ch = 0; ch < c; ++ch) out.tokens(row, ch) = features(i, ch, y, x);
      }
  return out;
}

TokenBatch extract(const std::vector<ImageTensor>& images, Branch which,
                   FeatureExtractor& net) {
  if (images.empty()) throw ConfigError("extract: empty image list");
  const int expect = which == Branch::kHead ? 224 : 64;
  for (const auto& img : images)
    if (img.height() != expect || img.width() != expect)
      throw ConfigError("extract: " + std::string(which == Branch::kHead ? "head" : "eye") +
                        " images must be " + std::to_string(expect) + " square");
  TokenBatch out = tokens_from_features(net.forward(images_to_batch(images), /*training=*/false));
  out.branch = which;
  net.clear_cache();
  return out;
}

Tensor token_grads_to_features(const Tensor& d_tokens, int n_images, int channels, int height,
                               int width) {
  if (d_tokens.rank() != 2 || d_tokens.dim(0) != n_images * height * width ||
      d_tokens.dim(1) != channels)
    throw std::invalid_argument("token_grads_to_features: shape mismatch");
  Tensor g({n_images, channels, height, width});
  for (int i = 0; i < n_images; ++i)
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const int row = (i * height + y) * width + x;
        for (int ch = 0; ch < channels; ++ch) g(i, ch, y, x) = d_tokens(row, ch);
      }
  return g;
}

}  // namespace supergaze::net
