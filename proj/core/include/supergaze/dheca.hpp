#pragma once

#include <memory>
#include <string>
#include <vector>

#include "supergaze/nn.hpp"
#include "supergaze/rng.hpp"
#include "supergaze/tensor.hpp"

namespace supergaze::net {

enum class AttentionVariant { kNone, kSelf, kCrossGaze, kDheca };

AttentionVariant parse_attention_variant(const std::string& name);
std::string to_string(AttentionVariant v);

struct DhecaConfig {
  int depth = 4;
  int dim = 512;
  int heads = 8;
  int mlp_ratio = 4;
  AttentionVariant variant = AttentionVariant::kDheca;
};

/// Post-softmax attention rows for one multi-head application,
/// one [Lq, Lk] matrix per head.
struct AttentionTrace {
  std::vector<Tensor> head_rows;
};

/// Scaled dot-product attention over pre-projected Q/K/V token matrices.
/// Carries no parameters; caches activations for backward.
class AttnCore {
public:
  AttnCore(int dim, int heads);

  Tensor forward(const Tensor& q, const Tensor& k, const Tensor& v,
                 AttentionTrace* trace = nullptr);
  void backward(const Tensor& d_ctx, Tensor& dq, Tensor& dk, Tensor& dv);
  void clear_cache() { cache_.clear(); }

private:
  struct Cache {
    Tensor q, k, v;
    std::vector<MatrixRM> attn;
  };
  int dim_, heads_, head_dim_;
  std::vector<Cache> cache_;
};

/// Two-layer GELU MLP used inside transformer blocks.
class Mlp {
public:
  Mlp() = default;
  Mlp(const std::string& name, int dim, int hidden);

  void init(Rng& rng);
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);
  void collect(nn::ParamRefs& out);
  void clear_cache();

private:
  nn::Linear fc1_, fc2_;
  nn::Gelu act_;
};

/// Learned class token and positional table for one branch. The class
/// token, when present, occupies row 0 of the embedded sequence.
class BranchEmbed {
public:
  BranchEmbed() = default;
  BranchEmbed(const std::string& name, int tokens, int dim, bool with_cls);

  void init(Rng& rng);
  Tensor attach(const Tensor& tokens) const;
  /// Accumulates class-token/positional grads; returns the token grads.
  Tensor detach_grad(const Tensor& d_embedded);
  void collect(nn::ParamRefs& out);

  bool with_cls() const { return with_cls_; }
  int embedded_len() const { return tokens_ + (with_cls_ ? 1 : 0); }

private:
  int tokens_ = 0, dim_ = 0;
  bool with_cls_ = false;
  nn::Param cls_, pos_;
};

/// One dual cross-attention block. Both branches are updated in parallel
/// from the block inputs: head tokens query the eye tokens and vice
/// versa. Each branch owns its attention norm and Q/K/V projections;
/// each direction owns its output projection. Pre-norm residual layout.
class DualBlock {
public:
  DualBlock(const std::string& name, int dim, int heads, int mlp_ratio);

  void init(Rng& rng);
  void forward(const Tensor& head, const Tensor& eye, Tensor& head_out, Tensor& eye_out,
               std::vector<AttentionTrace>* traces);
  void backward(const Tensor& d_head_out, const Tensor& d_eye_out, Tensor& d_head,
                Tensor& d_eye);
  void collect(nn::ParamRefs& out);
  void clear_cache();

private:
  nn::LayerNorm ln1_h_, ln1_e_, ln2_h_, ln2_e_;
  nn::Linear wq_h_, wk_h_, wv_h_, wq_e_, wk_e_, wv_e_;
  nn::Linear wo_he_, wo_eh_;  // head-query and eye-query output projections
  AttnCore attn_he_, attn_eh_;
  Mlp mlp_h_, mlp_e_;
};

/// Standard pre-norm self-attention block applied to the concatenation
/// of both branch sequences.
class SelfBlock {
public:
  SelfBlock(const std::string& name, int dim, int heads, int mlp_ratio);

  void init(Rng& rng);
  Tensor forward(const Tensor& x, std::vector<AttentionTrace>* traces);
  Tensor backward(const Tensor& dy);
  void collect(nn::ParamRefs& out);
  void clear_cache();

private:
  nn::LayerNorm ln1_, ln2_;
  nn::Linear wq_, wk_, wv_, wo_;
  AttnCore attn_;
  Mlp mlp_;
};

/// Single-direction block: eye tokens query the head tokens; only the
/// eye branch is updated, the head sequence passes through unchanged.
class CrossGazeBlock {
public:
  CrossGazeBlock(const std::string& name, int dim, int heads, int mlp_ratio);

  void init(Rng& rng);
  Tensor forward(const Tensor& head, const Tensor& eye, std::vector<AttentionTrace>* traces);
  void backward(const Tensor& d_eye_out, Tensor& d_head, Tensor& d_eye);
  void collect(nn::ParamRefs& out);
  void clear_cache();

private:
  nn::LayerNorm ln1_h_, ln1_e_, ln2_e_;
  nn::Linear wq_e_, wk_h_, wv_h_, wo_;
  AttnCore attn_;
  Mlp mlp_e_;
};

/// Attention-free fusion: per branch, concatenated max+mean pooling over
/// tokens followed by a small MLP down to the model width.
class PooledFuse {
public:
  PooledFuse() = default;
  PooledFuse(const std::string& name, int dim);

  void init(Rng& rng);
  Tensor forward(const Tensor& tokens);  // [L, C] -> [C]
  Tensor backward(const Tensor& d_out);  // [C] -> [L, C]
  void collect(nn::ParamRefs& out);
  void clear_cache();

private:
  struct Cache {
    std::vector<int> argmax;
    int len = 0;
  };
  int dim_ = 0;
  nn::Linear fc1_, fc2_;
  nn::Relu act_;
  std::vector<Cache> cache_;
};

/// Head/eye token fusion module. Consumes the two branch token
/// sequences and produces one fused feature of width 2*dim:
/// the concatenation of the head summary and the eye summary.
class DhecaModule {
public:
  DhecaModule(const DhecaConfig& config, int head_tokens, int eye_tokens, Rng& rng);

  const DhecaConfig& config() const { return config_; }
  int fused_dim() const { return 2 * config_.dim; }

  Tensor forward(const Tensor& head_tokens, const Tensor& eye_tokens,
                 std::vector<AttentionTrace>* traces = nullptr);
  void backward(const Tensor& d_fused, Tensor& d_head_tokens, Tensor& d_eye_tokens);

  void collect(nn::ParamRefs& out);
  void clear_cache();
  std::size_t parameter_count();

private:
  DhecaConfig config_;
  int head_len_, eye_len_;
  BranchEmbed embed_h_, embed_e_;
  std::vector<DualBlock> dual_blocks_;
  std::vector<SelfBlock> self_blocks_;
  std::vector<CrossGazeBlock> cross_blocks_;
  PooledFuse pool_h_, pool_e_;
  struct ForwardShapes {
    int head_rows = 0;
    int eye_rows = 0;
  };
  std::vector<ForwardShapes> shape_cache_;
};

}  // namespace supergaze::net
