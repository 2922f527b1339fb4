#include "supergaze/nn.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace supergaze::nn {
namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

void check_4d(const Tensor& x, const char* who) {
  if (x.rank() != 4) throw std::invalid_argument(std::string(who) + ": expected NCHW tensor");
}

}  // namespace

void init_fanin_uniform(Param& p, int fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  double* d = p.value.data();
  for (std::size_t i = 0; i < p.value.size(); ++i) d[i] = rng.uniform(-bound, bound);
}

void init_normal(Param& p, double stddev, Rng& rng) {
  double* d = p.value.data();
  for (std::size_t i = 0; i < p.value.size(); ++i) d[i] = rng.normal(0.0, stddev);
}

// ---------------------------------------------------------------- Linear

Linear::Linear(const std::string& name, int in_dim, int out_dim)
    : in_dim_(in_dim),
      out_dim_(out_dim),
      w_(name + ".weight", {out_dim, in_dim}),
      b_(name + ".bias", {out_dim}) {}

void Linear::init(Rng& rng) {
  init_fanin_uniform(w_, in_dim_, rng);
  b_.value.set_zero();
}

Tensor Linear::forward(const Tensor& x) {
  const int rows = x.dim(0);
  if (x.rank() != 2 || x.dim(1) != in_dim_) throw std::invalid_argument("Linear: bad input shape");
  Tensor y({rows, out_dim_});
  y.mat().noalias() = x.mat() * w_.value.mat().transpose();
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < out_dim_; ++c) y(r, c) += b_.value(c);
  cache_.push_back(x);
  return y;
}

Tensor Linear::backward(const Tensor& dy) {
  if (cache_.empty()) throw std::logic_error("Linear: backward without forward");
  Tensor x = std::move(cache_.back());
  cache_.pop_back();
  w_.grad.mat() += dy.mat().transpose() * x.mat();
  b_.grad.vec() += dy.mat().colwise().sum().transpose();
  Tensor dx({x.dim(0), in_dim_});
  dx.mat() = dy.mat() * w_.value.mat();
  return dx;
}

void Linear::collect(ParamRefs& out) {
  out.push_back(&w_);
  out.push_back(&b_);
}

// ------------------------------------------------------------- LayerNorm

LayerNorm::LayerNorm(const std::string& name, int dim, double eps)
    : dim_(dim),
      eps_(eps),
      gamma_(name + ".gamma", {dim}),
      beta_(name + ".beta", {dim}) {
  gamma_.value.fill(1.0);
  beta_.value.set_zero();
}

Tensor LayerNorm::forward(const Tensor& x) {
  if (x.rank() != 2 || x.dim(1) != dim_) throw std::invalid_argument("LayerNorm: bad input shape");
  const int rows = x.dim(0);
  Tensor y({rows, dim_});
  Cache c;
  c.normalized = Tensor({rows, dim_});
  c.inv_std = Tensor({rows});
  for (int r = 0; r < rows; ++r) {
    double mean = 0.0;
    for (int j = 0; j < dim_; ++j) mean += x(r, j);
    mean /= dim_;
    double var = 0.0;
    for (int j = 0; j < dim_; ++j) {
      const double d = x(r, j) - mean;
      var += d * d;
    }
    var /= dim_;
    const double inv = 1.0 / std::sqrt(var + eps_);
    c.inv_std(r) = inv;
    for (int j = 0; j < dim_; ++j) {
      const double n = (x(r, j) - mean) * inv;
      c.normalized(r, j) = n;
      y(r, j) = n * gamma_.value(j) + beta_.value(j);
    }
  }
  cache_.push_back(std::move(c));
  return y;
}

Tensor LayerNorm::backward(const Tensor& dy) {
  if (cache_.empty()) throw std::logic_error("LayerNorm: backward without forward");
  Cache c = std::move(cache_.back());
  cache_.pop_back();
  const int rows = dy.dim(0);
  Tensor dx({rows, dim_});
  for (int r = 0; r < rows; ++r) {
    double sum_dn = 0.0, sum_dn_n = 0.0;
    for (int j = 0; j < dim_; ++j) {
      const double dn = dy(r, j) * gamma_.value(j);
      sum_dn += dn;
      sum_dn_n += dn * c.normalized(r, j);
      gamma_.grad(j) += dy(r, j) * c.normalized(r, j);
      beta_.grad(j) += dy(r, j);
    }
    const double mean_dn = sum_dn / dim_;
    const double mean_dn_n = sum_dn_n / dim_;
    for (int j = 0; j < dim_; ++j) {
      const double dn = dy(r, j) * gamma_.value(j);
      dx(r, j) = c.inv_std(r) * (dn - mean_dn - c.normalized(r, j) * mean_dn_n);
    }
  }
  return dx;
}

void LayerNorm::collect(ParamRefs& out) {
  out.push_back(&gamma_);
  out.push_back(&beta_);
}

// ------------------------------------------------------------ activations

Tensor Gelu::forward(const Tensor& x) {
  Tensor y(x.shape());
  const double* in = x.data();
  double* out = y.data();
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = 0.5 * in[i] * (1.0 + std::erf(in[i] * kInvSqrt2));
  cache_.push_back(x);
  return y;
}

Tensor Gelu::backward(const Tensor& dy) {
  if (cache_.empty()) throw std::logic_error("Gelu: backward without forward");
  Tensor x = std::move(cache_.back());
  cache_.pop_back();
  Tensor dx(x.shape());
  const double* in = x.data();
  const double* g = dy.data();
  double* out = dx.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cdf = 0.5 * (1.0 + std::erf(in[i] * kInvSqrt2));
    const double pdf = kInvSqrt2Pi * std::exp(-0.5 * in[i] * in[i]);
    out[i] = g[i] * (cdf + in[i] * pdf);
  }
  return dx;
}

Tensor Relu::forward(const Tensor& x) {
  Tensor y(x.shape());
  const double* in = x.data();
  double* out = y.data();
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
  cache_.push_back(x);
  return y;
}

Tensor Relu::backward(const Tensor& dy) {
  if (cache_.empty()) throw std::logic_error("Relu: backward without forward");
  Tensor x = std::move(cache_.back());
  cache_.pop_back();
  Tensor dx(x.shape());
  const double* in = x.data();
  const double* g = dy.data();
  double* out = dx.data();
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = in[i] > 0.0 ? g[i] : 0.0;
  return dx;
}

// ---------------------------------------------------------------- Conv2d

namespace {

/// Packs one image [C,H,W] into columns [C*k*k, Hout*Wout].
void im2col(const double* img, int ch, int h, int w, int kernel, int stride, int pad,
            int hout, int wout, MatrixRM& col) {
  for (int c = 0; c < ch; ++c) {
    for (int ki = 0; ki < kernel; ++ki) {
      for (int kj = 0; kj < kernel; ++kj) {
        const int row = (c * kernel + ki) * kernel + kj;
        for (int y = 0; y < hout; ++y) {
          const int sy = y * stride - pad + ki;
          for (int x = 0; x < wout; ++x) {
            const int sx = x * stride - pad + kj;
            double v = 0.0;
            if (sy >= 0 && sy < h && sx >= 0 && sx < w) v = img[(c * h + sy) * w + sx];
            col(row, y * wout + x) = v;
          }
        }
      }
    }
  }
}

/// Scatter-adds columns back into one image's gradient.
void col2im(const MatrixRM& col, int ch, int h, int w, int kernel, int stride, int pad,
            int hout, int wout, double* img) {
  for (int c = 0; c < ch; ++c) {
    for (int ki = 0; ki < kernel; ++ki) {
      for (int kj = 0; kj < kernel; ++kj) {
        const int row = (c * kernel + ki) * kernel + kj;
        for (int y = 0; y < hout; ++y) {
          const int sy = y * stride - pad + ki;
          if (sy < 0 || sy >= h) continue;
          for (int x = 0; x < wout; ++x) {
            const int sx = x * stride - pad + kj;
            if (sx < 0 || sx >= w) continue;
            img[(c * h + sy) * w + sx] += col(row, y * wout + x);
          }
        }
      }
    }
  }
}

}  // namespace

Conv2d::Conv2d(const std::string& name, int in_ch, int out_ch, int kernel, int stride, int pad,
               bool with_bias)
    : in_ch_(in_ch),
      out_ch_(out_ch),
      kernel_(kernel),
      stride_(stride),
      pad_(pad),
      with_bias_(with_bias),
      w_(name + ".weight", {out_ch, in_ch, kernel, kernel}) {
  if (with_bias_) b_ = Param(name + ".bias", {out_ch});
}

void Conv2d::init(Rng& rng) {
  init_fanin_uniform(w_, in_ch_ * kernel_ * kernel_, rng);
  if (with_bias_) b_.value.set_zero();
}

Tensor Conv2d::forward(const Tensor& x) {
  check_4d(x, "Conv2d");
  if (x.dim(1) != in_ch_) throw std::invalid_argument("Conv2d: channel mismatch");
  const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
  const int hout = out_height(h), wout = out_width(w);
  const int patch = in_ch_ * kernel_ * kernel_;
  Tensor y({n, out_ch_, hout, wout});
  ConstMatMap wmat(w_.value.data(), out_ch_, patch);
  MatrixRM col(patch, hout * wout);
  for (int i = 0; i < n; ++i) {
    im2col(x.data() + static_cast<std::size_t>(i) * in_ch_ * h * w, in_ch_, h, w, kernel_,
           stride_, pad_, hout, wout, col);
    MatMap out(y.data() + static_cast<std::size_t>(i) * out_ch_ * hout * wout, out_ch_,
               hout * wout);
    out.noalias() = wmat * col;
    if (with_bias_)
      for (int c = 0; c < out_ch_; ++c) out.row(c).array() += b_.value(c);
  }
  cache_.push_back(x);
  return y;
}

Tensor Conv2d::backward(const Tensor& dy) {
  if (cache_.empty()) throw std::logic_error("Conv2d: backward without forward");
  Tensor x = std::move(cache_.back());
  cache_.pop_back();
  const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
  const int hout = out_height(h), wout = out_width(w);
  const int patch = in_ch_ * kernel_ * kernel_;
  Tensor dx(x.shape());
  dx.set_zero();
  ConstMatMap wmat(w_.value.data(), out_ch_, patch);
  MatMap wgrad(w_.grad.data(), out_ch_, patch);
  MatrixRM col(patch, hout * wout);
  MatrixRM dcol(patch, hout * wout);
  for (int i = 0; i < n; ++i) {
    im2col(x.data() + static_cast<std::size_t>(i) * in_ch_ * h * w, in_ch_, h, w, kernel_,
           stride_, pad_, hout, wout, col);
    ConstMatMap g(dy.data() + static_cast<std::size_t>(i) * out_ch_ * hout * wout, out_ch_,
                  hout * wout);
    wgrad.noalias() += g * col.transpose();
    if (with_bias_)
      for (int c = 0; c < out_ch_; ++c) b_.grad(c) += g.row(c).sum();
    dcol.noalias() = wmat.transpose() * g;
    col2im(dcol, in_ch_, h, w, kernel_, stride_, pad_, hout, wout,
           dx.data() + static_cast<std::size_t>(i) * in_ch_ * h * w);
  }
  return dx;
}

void Conv2d::collect(ParamRefs& out) {
  out.push_back(&w_);
  if (with_bias_) out.push_back(&b_);
}

// ------------------------------------------------------------ BatchNorm2d

BatchNorm2d::BatchNorm2d(const std::string& name, int channels, double momentum, double eps)
    : channels_(channels),
      momentum_(momentum),
      eps_(eps),
      gamma_(name + ".gamma", {channels}),
      beta_(name + ".beta", {channels}),
      running_mean_(name + ".running_mean", {channels}, /*train=*/false),
      running_var_(name + ".running_var", {channels}, /*train=*/false) {
  gamma_.value.fill(1.0);
  beta_.value.set_zero();
  running_mean_.value.set_zero();
  running_var_.value.fill(1.0);
}

Tensor BatchNorm2d::forward(const Tensor& x, bool training) {
  check_4d(x, "BatchNorm2d");
  if (x.dim(1) != channels_) throw std::invalid_argument("BatchNorm2d: channel mismatch");
  const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  const double count = static_cast<double>(n) * plane;
  Tensor y(x.shape());
  if (!training) {
    for (int c = 0; c < channels_; ++c) {
      const double inv = 1.0 / std::sqrt(running_var_.value(c) + eps_);
      const double mean = running_mean_.value(c);
      const double g = gamma_.value(c), b = beta_.value(c);
      for (int i = 0; i < n; ++i) {
        const double* in = x.data() + (static_cast<std::size_t>(i) * channels_ + c) * plane;
        double* out = y.data() + (static_cast<std::size_t>(i) * channels_ + c) * plane;
        for (std::size_t k = 0; k < plane; ++k) out[k] = (in[k] - mean) * inv * g + b;
      }
    }
    return y;
  }
  Cache cache;
  cache.normalized = Tensor(x.shape());
  cache.inv_std = Tensor({channels_});
  cache.n = n;
  cache.h = h;
  cache.w = w;
  for (int c = 0; c < channels_; ++c) {
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
      const double* in = x.data() + (static_cast<std::size_t>(i) * channels_ + c) * plane;
      for (std::size_t k = 0; k < plane; ++k) mean += in[k];
    }
    mean /= count;
    double var = 0.0;
    for (int i = 0; i < n; ++i) {
      const double* in = x.data() + (static_cast<std::size_t>(i) * channels_ + c) * plane;
      for (std::size_t k = 0; k < plane; ++k) {
        const double d = in[k] - mean;
        var += d * d;
      }
    }
    var /= count;
    const double inv = 1.0 / std::sqrt(var + eps_);
    cache.inv_std(c) = inv;
    running_mean_.value(c) = (1.0 - momentum_) * running_mean_.value(c) + momentum_ * mean;
    running_var_.value(c) = (1.0 - momentum_) * running_var_.value(c) + momentum_ * var;
    const double g = gamma_.value(c), b = beta_.value(c);
    for (int i = 0; i < n; ++i) {
      const double* in = x.data() + (static_cast<std::size_t>(i) * channels_ + c) * plane;
      double* nrm =
          cache.normalized.data() + (static_cast<std::size_t>(i) * channels_ + c) * plane;
      double* out = y.data() + (static_cast<std::size_t>(i) * channels_ + c) * plane;
      for (std::size_t k = 0; k < plane; ++k) {
        nrm[k] = (in[k] - mean) * inv;
        out[k] = nrm[k] * g + b;
      }
    }
  }
  cache_.push_back(std::move(cache));
  return y;
}

Tensor BatchNorm2d::backward(const Tensor& dy) {
  if (cache_.empty()) throw std::logic_error("BatchNorm2d: backward without forward (eval mode?)");
  Cache cache = std::move(cache_.back());
  cache_.pop_back();
  const int n = cache.n;
  const std::size_t plane = static_cast<std::size_t>(cache.h) * cache.w;
  const double count = static_cast<double>(n) * plane;
  Tensor dx(dy.shape());
  for (int c = 0; c < channels_; ++c) {
    double sum_dy = 0.0, sum_dy_n = 0.0;
    for (int i = 0; i < n; ++i) {
      const double* g = dy.data() + (static_cast<std::size_t>(i) * channels_ + c) * plane;
      const double* nrm =
          cache.normalized.data() + (static_cast<std::size_t>(i) * channels_ + c) * plane;
      for (std::size_t k = 0; k < plane; ++k) {
        sum_dy += g[k];
        sum_dy_n += g[k] * nrm[k];
      }
    }
    gamma_.grad(c) += sum_dy_n;
    beta_.grad(c) += sum_dy;
    const double gam = gamma_.value(c);
    const double inv = cache.inv_std(c);
    const double mean_dy = sum_dy / count;
    const double mean_dy_n = sum_dy_n / count;
    for (int i = 0; i < n; ++i) {
      const double* g = dy.data() + (static_cast<std::size_t>(i) * channels_ + c) * plane;
      const double* nrm =
          cache.normalized.data() + (static_cast<std::size_t>(i) * channels_ + c) * plane;
      double* out = dx.data() + (static_cast<std::size_t>(i) * channels_ + c) * plane;
      for (std::size_t k = 0; k < plane; ++k)
        out[k] = gam * inv * (g[k] - mean_dy - nrm[k] * mean_dy_n);
    }
  }
  return dx;
}

void BatchNorm2d::collect(ParamRefs& out) {
  out.push_back(&gamma_);
  out.push_back(&beta_);
  out.push_back(&running_mean_);
  out.push_back(&running_var_);
}

// ------------------------------------------------------------- MaxPool2d

Tensor MaxPool2d::forward(const Tensor& x) {
  check_4d(x, "MaxPool2d");
  const int n = x.dim(0), ch = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int hout = (h + 2 * pad_ - kernel_) / stride_ + 1;
  const int wout = (w + 2 * pad_ - kernel_) / stride_ + 1;
  Tensor y({n, ch, hout, wout});
  Cache cache;
  cache.in_shape = x.shape();
  cache.argmax.resize(y.size());
  std::size_t oi = 0;
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < ch; ++c) {
      const double* in = x.data() + (static_cast<std::size_t>(i) * ch + c) * h * w;
      for (int yo = 0; yo < hout; ++yo) {
        for (int xo = 0; xo < wout; ++xo, ++oi) {
          double best = -std::numeric_limits<double>::infinity();
          int best_idx = -1;
          for (int ki = 0; ki < kernel_; ++ki) {
            const int sy = yo * stride_ - pad_ + ki;
            if (sy < 0 || sy >= h) continue;
            for (int kj = 0; kj < kernel_; ++kj) {
              const int sx = xo * stride_ - pad_ + kj;
              if (sx < 0 || sx >= w) continue;
              const double v = in[sy * w + sx];
              if (v > best) {
                best = v;
                best_idx = sy * w + sx;
              }
            }
          }
          y.data()[oi] = best;
          cache.argmax[oi] = best_idx;
        }
      }
    }
  }
  cache_.push_back(std::move(cache));
  return y;
}

Tensor MaxPool2d::backward(const Tensor& dy) {
  if (cache_.empty()) throw std::logic_error("MaxPool2d: backward without forward");
  Cache cache = std::move(cache_.back());
  cache_.pop_back();
  const int n = cache.in_shape[0], ch = cache.in_shape[1];
  const int h = cache.in_shape[2], w = cache.in_shape[3];
  Tensor dx(cache.in_shape);
  dx.set_zero();
  const int hout = dy.dim(2), wout = dy.dim(3);
  std::size_t oi = 0;
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < ch; ++c) {
      double* out = dx.data() + (static_cast<std::size_t>(i) * ch + c) * h * w;
      for (int k = 0; k < hout * wout; ++k, ++oi) {
        const int idx = cache.argmax[oi];
        if (idx >= 0) out[idx] += dy.data()[oi];
      }
    }
  }
  return dx;
}

// ----------------------------------------------------------------- utils

void softmax_rows(MatMap m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double mx = m.row(r).maxCoeff();
    m.row(r) = (m.row(r).array() - mx).exp();
    m.row(r) /= m.row(r).sum();
  }
}

}  // namespace supergaze::nn
