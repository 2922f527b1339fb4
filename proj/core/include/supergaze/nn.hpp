#pragma once

#include <string>
#include <vector>

#include "supergaze/rng.hpp"
#include "supergaze/tensor.hpp"

namespace supergaze::nn {

/// Named parameter with its gradient accumulator. Non-trainable params
/// (running statistics) carry no gradient and are skipped by optimizers
/// but still serialized into checkpoints.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;

  Param() = default;
  Param(std::string n, std::vector<int> shape, bool train = true)
      : name(std::move(n)), value(shape), trainable(train) {
    if (trainable) grad = Tensor(shape);
  }

  void zero_grad() {
    if (trainable) grad.set_zero();
  }
};

using ParamRefs = std::vector<Param*>;

/// Kaiming-style uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
void init_fanin_uniform(Param& p, int fan_in, Rng& rng);
void init_normal(Param& p, double stddev, Rng& rng);

/// y = x W^T + b on row-major [L, in] -> [L, out].
/// Forward pushes a cache entry; backward pops it, so backward calls of
/// a shared layer must run in reverse forward order.
class Linear {
public:
  Linear() = default;
  Linear(const std::string& name, int in_dim, int out_dim);

  void init(Rng& rng);
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);
  void collect(ParamRefs& out);
  void clear_cache() { cache_.clear(); }

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  Param& weight() { return w_; }
  Param& bias() { return b_; }

private:
  int in_dim_ = 0, out_dim_ = 0;
  Param w_, b_;
  std::vector<Tensor> cache_;
};

/// Per-row layer normalization over the last (feature) dimension.
class LayerNorm {
public:
  LayerNorm() = default;
  LayerNorm(const std::string& name, int dim, double eps = 1e-5);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);
  void collect(ParamRefs& out);
  void clear_cache() { cache_.clear(); }

private:
  struct Cache {
    Tensor normalized;
    Tensor inv_std;  // per row
  };
  int dim_ = 0;
  double eps_ = 1e-5;
  Param gamma_, beta_;
  std::vector<Cache> cache_;
};

/// Exact (erf-based) GELU, elementwise over any shape.
class Gelu {
public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);
  void clear_cache() { cache_.clear(); }

private:
  std::vector<Tensor> cache_;
};

class Relu {
public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);
  void clear_cache() { cache_.clear(); }

private:
  std::vector<Tensor> cache_;
};

/// 2D convolution on [N, C, H, W] via im2col + GEMM. The input is cached
/// for backward; the column matrix is rebuilt there.
class Conv2d {
public:
  Conv2d() = default;
  Conv2d(const std::string& name, int in_ch, int out_ch, int kernel, int stride, int pad,
         bool with_bias = true);

  void init(Rng& rng);
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);
  void collect(ParamRefs& out);
  void clear_cache() { cache_.clear(); }

  int out_height(int h) const { return (h + 2 * pad_ - kernel_) / stride_ + 1; }
  int out_width(int w) const { return (w + 2 * pad_ - kernel_) / stride_ + 1; }
  int out_channels() const { return out_ch_; }

private:
  int in_ch_ = 0, out_ch_ = 0, kernel_ = 0, stride_ = 1, pad_ = 0;
  bool with_bias_ = true;
  Param w_, b_;
  std::vector<Tensor> cache_;
};

/// Batch normalization over (N, H, W) per channel. Training mode uses
/// statistics of the current call and updates the running buffers;
/// eval mode applies the running statistics. Backward is defined for
/// training mode.
class BatchNorm2d {
public:
  BatchNorm2d() = default;
  BatchNorm2d(const std::string& name, int channels, double momentum = 0.1,
              double eps = 1e-5);

  Tensor forward(const Tensor& x, bool training);
  Tensor backward(const Tensor& dy);
  void collect(ParamRefs& out);
  void clear_cache() { cache_.clear(); }

private:
  struct Cache {
    Tensor normalized;
    Tensor inv_std;  // per channel
    int n = 0, h = 0, w = 0;
  };
  int channels_ = 0;
  double momentum_ = 0.1, eps_ = 1e-5;
  Param gamma_, beta_, running_mean_, running_var_;
  std::vector<Cache> cache_;
};

/// Max pooling on [N, C, H, W]; caches argmax routing for backward.
class MaxPool2d {
public:
  MaxPool2d(int kernel, int stride, int pad) : kernel_(kernel), stride_(stride), pad_(pad) {}

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);
  void clear_cache() { cache_.clear(); }

private:
  struct Cache {
    std::vector<int> argmax;
    std::vector<int> in_shape;
  };
  int kernel_, stride_, pad_;
  std::vector<Cache> cache_;
};

/// Numerically stable row softmax, in place.
void softmax_rows(MatMap m);

}  // namespace supergaze::nn
