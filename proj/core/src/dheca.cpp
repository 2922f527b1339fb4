#include "supergaze/dheca.hpp"

#include <cmath>
#include <stdexcept>

#include "supergaze/errors.hpp"

namespace supergaze::net {

AttentionVariant parse_attention_variant(const std::string& name) {
  if (name == "none") return AttentionVariant::kNone;
  if (name == "self") return AttentionVariant::kSelf;
  if (name == "crossgaze") return AttentionVariant::kCrossGaze;
  if (name == "dheca") return AttentionVariant::kDheca;
  throw ConfigError("unknown attention variant: " + name);
}

std::string to_string(AttentionVariant v) {
  switch (v) {
    case AttentionVariant::kNone: return "none";
    case AttentionVariant::kSelf: return "self";
    case AttentionVariant::kCrossGaze: return "crossgaze";
    case AttentionVariant::kDheca: return "dheca";
  }
  return "?";
}

// --------------------------------------------------------------- AttnCore

AttnCore::AttnCore(int dim, int heads) : dim_(dim), heads_(heads), head_dim_(dim / heads) {
  if (dim % heads != 0) throw std::invalid_argument("AttnCore: dim must divide by heads");
}

Tensor AttnCore::forward(const Tensor& q, const Tensor& k, const Tensor& v,
                         AttentionTrace* trace) {
  const int lq = q.dim(0), lk = k.dim(0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim_));
  Cache c;
  c.q = q;
  c.k = k;
  c.v = v;
  Tensor ctx({lq, dim_});
  for (int h = 0; h < heads_; ++h) {
    const auto qh = q.mat().middleCols(h * head_dim_, head_dim_);
    const auto kh = k.mat().middleCols(h * head_dim_, head_dim_);
    const auto vh = v.mat().middleCols(h * head_dim_, head_dim_);
    MatrixRM scores = (qh * kh.transpose()) * scale;
    nn::softmax_rows(MatMap(scores.data(), lq, lk));
    ctx.mat().middleCols(h * head_dim_, head_dim_).noalias() = scores * vh;
    if (trace) {
      Tensor t({lq, lk});
      std::copy(scores.data(), scores.data() + static_cast<std::size_t>(lq) * lk, t.data());
      trace->head_rows.push_back(std::move(t));
    }
    c.attn.push_back(std::move(scores));
  }
  cache_.push_back(std::move(c));
  return ctx;
}

void AttnCore::backward(const Tensor& d_ctx, Tensor& dq, Tensor& dk, Tensor& dv) {
  if (cache_.empty()) throw std::logic_error("AttnCore: backward without forward");
  Cache c = std::move(cache_.back());
  cache_.pop_back();
  const int lq = c.q.dim(0), lk = c.k.dim(0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim_));
  dq = Tensor({lq, dim_});
  dk = Tensor({lk, dim_});
  dv = Tensor({lk, dim_});
  for (int h = 0; h < heads_; ++h) {
    const MatrixRM& attn = c.attn[static_cast<std::size_t>(h)];
    const auto g = d_ctx.mat().middleCols(h * head_dim_, head_dim_);
    const auto qh = c.q.mat().middleCols(h * head_dim_, head_dim_);
    const auto kh = c.k.mat().middleCols(h * head_dim_, head_dim_);
    const auto vh = c.v.mat().middleCols(h * head_dim_, head_dim_);
    MatrixRM d_attn = g * vh.transpose();
    dv.mat().middleCols(h * head_dim_, head_dim_).noalias() = attn.transpose() * g;
    MatrixRM d_scores(lq, lk);
    for (int r = 0; r < lq; ++r) {
      const double dot = (d_attn.row(r).array() * attn.row(r).array()).sum();
      d_scores.row(r) = attn.row(r).array() * (d_attn.row(r).array() - dot);
    }
    dq.mat().middleCols(h * head_dim_, head_dim_).noalias() = (d_scores * kh) * scale;
    dk.mat().middleCols(h * head_dim_, head_dim_).noalias() =
        (d_scores.transpose() * qh) * scale;
  }
}

// -------------------------------------------------------------------- Mlp

Mlp::Mlp(const std::string& name, int dim, int hidden)
    : fc1_(name + ".fc1", dim, hidden), fc2_(name + ".fc2", hidden, dim) {}

void Mlp::init(Rng& rng) {
  fc1_.init(rng);
  fc2_.init(rng);
}

Tensor Mlp::forward(const Tensor& x) { return fc2_.forward(act_.forward(fc1_.forward(x))); }

Tensor Mlp::backward(const Tensor& dy) {
  return fc1_.backward(act_.backward(fc2_.backward(dy)));
}

void Mlp::collect(nn::ParamRefs& out) {
  fc1_.collect(out);
  fc2_.collect(out);
}

void Mlp::clear_cache() {
  fc1_.clear_cache();
  fc2_.clear_cache();
  act_.clear_cache();
}

// ------------------------------------------------------------ BranchEmbed

BranchEmbed::BranchEmbed(const std::string& name, int tokens, int dim, bool with_cls)
    : tokens_(tokens), dim_(dim), with_cls_(with_cls) {
  if (with_cls_) cls_ = nn::Param(name + ".cls", {1, dim});
  pos_ = nn::Param(name + ".pos", {tokens + (with_cls_ ? 1 : 0), dim});
}

void BranchEmbed::init(Rng& rng) {
  if (with_cls_) nn::init_normal(cls_, 0.02, rng);
  nn::init_normal(pos_, 0.02, rng);
}

Tensor BranchEmbed::attach(const Tensor& tokens) const {
  if (tokens.rank() != 2 || tokens.dim(0) != tokens_ || tokens.dim(1) != dim_)
    throw std::invalid_argument("BranchEmbed: token shape mismatch");
  const int out_len = embedded_len();
  Tensor e({out_len, dim_});
  int row = 0;
  if (with_cls_) {
    for (int j = 0; j < dim_; ++j) e(0, j) = cls_.value(0, j);
    row = 1;
  }
  for (int i = 0; i < tokens_; ++i, ++row)
    for (int j = 0; j < dim_; ++j) e(row, j) = tokens(i, j);
  e.mat() += pos_.value.mat();
  return e;
}

Tensor BranchEmbed::detach_grad(const Tensor& d_embedded) {
  pos_.grad.mat() += d_embedded.mat();
  Tensor d_tokens({tokens_, dim_});
  int row = 0;
  if (with_cls_) {
    for (int j = 0; j < dim_; ++j) cls_.grad(0, j) += d_embedded(0, j);
    row = 1;
  }
  for (int i = 0; i < tokens_; ++i, ++row)
    for (int j = 0; j < dim_; ++j) d_tokens(i, j) = d_embedded(row, j);
  return d_tokens;
}

void BranchEmbed::collect(nn::ParamRefs& out) {
  if (with_cls_) out.push_back(&cls_);
  out.push_back(&pos_);
}

// -------------------------------------------------------------- DualBlock

DualBlock::DualBlock(const std::string& name, int dim, int heads, int mlp_ratio)
    : ln1_h_(name + ".ln1_h", dim),
      ln1_e_(name + ".ln1_e", dim),
      ln2_h_(name + ".ln2_h", dim),
      ln2_e_(name + ".ln2_e", dim),
      wq_h_(name + ".wq_h", dim, dim),
      wk_h_(name + ".wk_h", dim, dim),
      wv_h_(name + ".wv_h", dim, dim),
      wq_e_(name + ".wq_e", dim, dim),
      wk_e_(name + ".wk_e", dim, dim),
      wv_e_(name + ".wv_e", dim, dim),
      wo_he_(name + ".wo_he", dim, dim),
      wo_eh_(name + ".wo_eh", dim, dim),
      attn_he_(dim, heads),
      attn_eh_(dim, heads),
      mlp_h_(name + ".mlp_h", dim, dim * mlp_ratio),
      mlp_e_(name + ".mlp_e", dim, dim * mlp_ratio) {}

void DualBlock::init(Rng& rng) {
  wq_h_.init(rng);
  wk_h_.init(rng);
  wv_h_.init(rng);
  wq_e_.init(rng);
  wk_e_.init(rng);
  wv_e_.init(rng);
  wo_he_.init(rng);
  wo_eh_.init(rng);
  mlp_h_.init(rng);
  mlp_e_.init(rng);
}

void DualBlock::forward(const Tensor& head, const Tensor& eye, Tensor& head_out,
                        Tensor& eye_out, std::vector<AttentionTrace>* traces) {
  Tensor hn = ln1_h_.forward(head);
  Tensor en = ln1_e_.forward(eye);
  Tensor qh = wq_h_.forward(hn), kh = wk_h_.forward(hn), vh = wv_h_.forward(hn);
  Tensor qe = wq_e_.forward(en), ke = wk_e_.forward(en), ve = wv_e_.forward(en);
  AttentionTrace t_he, t_eh;
  Tensor ctx_h = attn_he_.forward(qh, ke, ve, traces ? &t_he : nullptr);
  Tensor ctx_e = attn_eh_.forward(qe, kh, vh, traces ? &t_eh : nullptr);
  if (traces) {
    traces->push_back(std::move(t_he));
    traces->push_back(std::move(t_eh));
  }
  Tensor h2 = head;
  h2 += wo_he_.forward(ctx_h);
  Tensor e2 = eye;
  e2 += wo_eh_.forward(ctx_e);
  head_out = h2;
  head_out += mlp_h_.forward(ln2_h_.forward(h2));
  eye_out = e2;
  eye_out += mlp_e_.forward(ln2_e_.forward(e2));
}

void DualBlock::backward(const Tensor& d_head_out, const Tensor& d_eye_out, Tensor& d_head,
                         Tensor& d_eye) {
  Tensor d_h2 = d_head_out;
  d_h2 += ln2_h_.backward(mlp_h_.backward(d_head_out));
  Tensor d_e2 = d_eye_out;
  d_e2 += ln2_e_.backward(mlp_e_.backward(d_eye_out));

  Tensor d_qh, d_ke, d_ve, d_qe, d_kh, d_vh;
  attn_he_.backward(wo_he_.backward(d_h2), d_qh, d_ke, d_ve);
  attn_eh_.backward(wo_eh_.backward(d_e2), d_qe, d_kh, d_vh);

  Tensor d_hn = wv_h_.backward(d_vh);
  d_hn += wk_h_.backward(d_kh);
  d_hn += wq_h_.backward(d_qh);
  Tensor d_en = wv_e_.backward(d_ve);
  d_en += wk_e_.backward(d_ke);
  d_en += wq_e_.backward(d_qe);

  d_head = d_h2;
  d_head += ln1_h_.backward(d_hn);
  d_eye = d_e2;
  d_eye += ln1_e_.backward(d_en);
}

void DualBlock::collect(nn::ParamRefs& out) {
  ln1_h_.collect(out);
  wq_h_.collect(out);
  wk_h_.collect(out);
  wv_h_.collect(out);
  ln1_e_.collect(out);
  wq_e_.collect(out);
  wk_e_.collect(out);
  wv_e_.collect(out);
  wo_he_.collect(out);
  wo_eh_.collect(out);
  ln2_h_.collect(out);
  mlp_h_.collect(out);
  ln2_e_.collect(out);
  mlp_e_.collect(out);
}

void DualBlock::clear_cache() {
  ln1_h_.clear_cache();
  ln1_e_.clear_cache();
  ln2_h_.clear_cache();
  ln2_e_.clear_cache();
  wq_h_.clear_cache();
  wk_h_.clear_cache();
  wv_h_.clear_cache();
  wq_e_.clear_cache();
  wk_e_.clear_cache();
  wv_e_.clear_cache();
  wo_he_.clear_cache();
  wo_eh_.clear_cache();
  attn_he_.clear_cache();
  attn_eh_.clear_cache();
  mlp_h_.clear_cache();
  mlp_e_.clear_cache();
}

// -------------------------------------------------------------- SelfBlock

SelfBlock::SelfBlock(const std::string& name, int dim, int heads, int mlp_ratio)
    : ln1_(name + ".ln1", dim),
      ln2_(name + ".ln2", dim),
      wq_(name + ".wq", dim, dim),
      wk_(name + ".wk", dim, dim),
      wv_(name + ".wv", dim, dim),
      wo_(name + ".wo", dim, dim),
      attn_(dim, heads),
      mlp_(name + ".mlp", dim, dim * mlp_ratio) {}

void SelfBlock::init(Rng& rng) {
  wq_.init(rng);
  wk_.init(rng);
  wv_.init(rng);
  wo_.init(rng);
  mlp_.init(rng);
}

Tensor SelfBlock::forward(const Tensor& x, std::vector<AttentionTrace>* traces) {
  Tensor xn = ln1_.forward(x);
  AttentionTrace t;
  Tensor ctx = attn_.forward(wq_.forward(xn), wk_.forward(xn), wv_.forward(xn),
                             traces ? &t : nullptr);
  if (traces) traces->push_back(std::move(t));
  Tensor x2 = x;
  x2 += wo_.forward(ctx);
  Tensor out = x2;
  out += mlp_.forward(ln2_.forward(x2));
  return out;
}

Tensor SelfBlock::backward(const Tensor& dy) {
  Tensor d_x2 = dy;
  d_x2 += ln2_.backward(mlp_.backward(dy));
  Tensor dq, dk, dv;
  attn_.backward(wo_.backward(d_x2), dq, dk, dv);
  Tensor d_xn = wv_.backward(dv);
  d_xn += wk_.backward(dk);
  d_xn += wq_.backward(dq);
  Tensor dx = d_x2;
  dx += ln1_.backward(d_xn);
  return dx;
}

void SelfBlock::collect(nn::ParamRefs& out) {
  ln1_.collect(out);
  wq_.collect(out);
  wk_.collect(out);
  wv_.collect(out);
  wo_.collect(out);
  ln2_.collect(out);
  mlp_.collect(out);
}

void SelfBlock::clear_cache() {
  ln1_.clear_cache();
  ln2_.clear_cache();
  wq_.clear_cache();
  wk_.clear_cache();
  wv_.clear_cache();
  wo_.clear_cache();
  attn_.clear_cache();
  mlp_.clear_cache();
}

// --------------------------------------------------------- CrossGazeBlock

CrossGazeBlock::CrossGazeBlock(const std::string& name, int dim, int heads, int mlp_ratio)
    : ln1_h_(name + ".ln1_h", dim),
      ln1_e_(name + ".ln1_e", dim),
      ln2_e_(name + ".ln2_e", dim),
      wq_e_(name + ".wq_e", dim, dim),
      wk_h_(name + ".wk_h", dim, dim),
      wv_h_(name + ".wv_h", dim, dim),
      wo_(name + ".wo", dim, dim),
      attn_(dim, heads),
      mlp_e_(name + ".mlp_e", dim, dim * mlp_ratio) {}

void CrossGazeBlock::init(Rng& rng) {
  wq_e_.init(rng);
  wk_h_.init(rng);
  wv_h_.init(rng);
  wo_.init(rng);
  mlp_e_.init(rng);
}

Tensor CrossGazeBlock::forward(const Tensor& head, const Tensor& eye,
                               std::vector<AttentionTrace>* traces) {
  Tensor hn = ln1_h_.forward(head);
  Tensor en = ln1_e_.forward(eye);
  AttentionTrace t;
  Tensor ctx = attn_.forward(wq_e_.forward(en), wk_h_.forward(hn), wv_h_.forward(hn),
                             traces ? &t : nullptr);
  if (traces) traces->push_back(std::move(t));
  Tensor e2 = eye;
  e2 += wo_.forward(ctx);
  Tensor out = e2;
  out += mlp_e_.forward(ln2_e_.forward(e2));
  return out;
}

void CrossGazeBlock::backward(const Tensor& d_eye_out, Tensor& d_head, Tensor& d_eye) {
  Tensor d_e2 = d_eye_out;
  d_e2 += ln2_e_.backward(mlp_e_.backward(d_eye_out));
  Tensor dq, dk, dv;
  attn_.backward(wo_.backward(d_e2), dq, dk, dv);
  Tensor d_hn = wv_h_.backward(dv);
  d_hn += wk_h_.backward(dk);
  d_head += ln1_h_.backward(d_hn);
  Tensor d_en = wq_e_.backward(dq);
  d_eye = d_e2;
  d_eye += ln1_e_.backward(d_en);
}

void CrossGazeBlock::collect(nn::ParamRefs& out) {
  ln1_h_.collect(out);
  ln1_e_.collect(out);
  wq_e_.collect(out);
  wk_h_.collect(out);
  wv_h_.collect(out);
  wo_.collect(out);
  ln2_e_.collect(out);
  mlp_e_.collect(out);
}

void CrossGazeBlock::clear_cache() {
  ln1_h_.clear_cache();
  ln1_e_.clear_cache();
  ln2_e_.clear_cache();
  wq_e_.clear_cache();
  wk_h_.clear_cache();
  wv_h_.clear_cache();
  wo_.clear_cache();
  attn_.clear_cache();
  mlp_e_.clear_cache();
}

// ------------------------------------------------------------- PooledFuse

PooledFuse::PooledFuse(const std::string& name, int dim)
    : dim_(dim), fc1_(name + ".fc1", 2 * dim, dim), fc2_(name + ".fc2", dim, dim) {}

void PooledFuse::init(Rng& rng) {
  fc1_.init(rng);
  fc2_.init(rng);
}

Tensor PooledFuse::forward(const Tensor& tokens) {
  const int len = tokens.dim(0);
  Cache c;
  c.len = len;
  c.argmax.resize(static_cast<std::size_t>(dim_));
  Tensor pooled({1, 2 * dim_});
  for (int j = 0; j < dim_; ++j) {
    double best = tokens(0, j), sum = 0.0;
    int best_row = 0;
    for (int i = 0; i < len; ++i) {
      const double v = tokens(i, j);
      sum += v;
      if (v > best) {
        best = v;
        best_row = i;
      }
    }
    pooled(0, j) = best;
    pooled(0, dim_ + j) = sum / len;
    c.argmax[static_cast<std::size_t>(j)] = best_row;
  }
  cache_.push_back(std::move(c));
  Tensor out = fc2_.forward(act_.forward(fc1_.forward(pooled)));
  return out.reshaped({dim_});
}

Tensor PooledFuse::backward(const Tensor& d_out) {
  if (cache_.empty()) throw std::logic_error("PooledFuse: backward without forward");
  Cache c = std::move(cache_.back());
  cache_.pop_back();
  Tensor d_pooled = fc1_.backward(act_.backward(fc2_.backward(d_out.reshaped({1, dim_}))));
  Tensor d_tokens({c.len, dim_});
  for (int j = 0; j < dim_; ++j) {
    d_tokens(c.argmax[static_cast<std::size_t>(j)], j) += d_pooled(0, j);
    const double per_row = d_pooled(0, dim_ + j) / c.len;
    for (int i = 0; i < c.len; ++i) d_tokens(i, j) += per_row;
  }
  return d_tokens;
}

void PooledFuse::collect(nn::ParamRefs& out) {
  fc1_.collect(out);
  fc2_.collect(out);
}

void PooledFuse::clear_cache() {
  fc1_.clear_cache();
  fc2_.clear_cache();
  act_.clear_cache();
  cache_.clear();
}

// ------------------------------------------------------------ DhecaModule

DhecaModule::DhecaModule(const DhecaConfig& config, int head_tokens, int eye_tokens, Rng& rng)
    : config_(config), head_len_(head_tokens), eye_len_(eye_tokens) {
  const int dim = config_.dim;
  switch (config_.variant) {
    case AttentionVariant::kDheca:
      embed_h_ = BranchEmbed("fuse.head", head_len_, dim, /*with_cls=*/true);
      embed_e_ = BranchEmbed("fuse.eye", eye_len_, dim, /*with_cls=*/true);
      for (int i = 0; i < config_.depth; ++i)
        dual_blocks_.emplace_back("fuse.block" + std::to_string(i), dim, config_.heads,
                                  config_.mlp_ratio);
      break;
    case AttentionVariant::kSelf:
      embed_h_ = BranchEmbed("fuse.head", head_len_, dim, /*with_cls=*/true);
      embed_e_ = BranchEmbed("fuse.eye", eye_len_, dim, /*with_cls=*/true);
      for (int i = 0; i < config_.depth; ++i)
        self_blocks_.emplace_back("fuse.block" + std::to_string(i), dim, config_.heads,
                                  config_.mlp_ratio);
      break;
    case AttentionVariant::kCrossGaze:
      embed_h_ = BranchEmbed("fuse.head", head_len_, dim, /*with_cls=*/false);
      embed_e_ = BranchEmbed("fuse.eye", eye_len_, dim, /*with_cls=*/true);
      for (int i = 0; i < config_.depth; ++i)
        cross_blocks_.emplace_back("fuse.block" + std::to_string(i), dim, config_.heads,
                                   config_.mlp_ratio);
      break;
    case AttentionVariant::kNone:
      pool_h_ = PooledFuse("fuse.pool_h", dim);
      pool_e_ = PooledFuse("fuse.pool_e", dim);
      break;
  }
  if (config_.variant != AttentionVariant::kNone) {
    embed_h_.init(rng);
    embed_e_.init(rng);
  }
  for (auto& b : dual_blocks_) b.init(rng);
  for (auto& b : self_blocks_) b.init(rng);
  for (auto& b : cross_blocks_) b.init(rng);
  if (config_.variant == AttentionVariant::kNone) {
    pool_h_.init(rng);
    pool_e_.init(rng);
  }
}

Tensor DhecaModule::forward(const Tensor& head_tokens, const Tensor& eye_tokens,
                            std::vector<AttentionTrace>* traces) {
  const int dim = config_.dim;
  Tensor fused({2 * dim});
  switch (config_.variant) {
    case AttentionVariant::kDheca: {
      Tensor h = embed_h_.attach(head_tokens);
      Tensor e = embed_e_.attach(eye_tokens);
      for (auto& b : dual_blocks_) {
        Tensor h2, e2;
        b.forward(h, e, h2, e2, traces);
        h = std::move(h2);
        e = std::move(e2);
      }
      for (int j = 0; j < dim; ++j) {
        fused(j) = h(0, j);
        fused(dim + j) = e(0, j);
      }
      break;
    }
    case AttentionVariant::kSelf: {
      Tensor h = embed_h_.attach(head_tokens);
      Tensor e = embed_e_.attach(eye_tokens);
      Tensor x({h.dim(0) + e.dim(0), dim});
      x.mat().topRows(h.dim(0)) = h.mat();
      x.mat().bottomRows(e.dim(0)) = e.mat();
      for (auto& b : self_blocks_) x = b.forward(x, traces);
      const int eye_cls_row = h.dim(0);
      for (int j = 0; j < dim; ++j) {
        fused(j) = x(0, j);
        fused(dim + j) = x(eye_cls_row, j);
      }
      break;
    }
    case AttentionVariant::kCrossGaze: {
      Tensor h = embed_h_.attach(head_tokens);
      Tensor e = embed_e_.attach(eye_tokens);
      for (auto& b : cross_blocks_) e = b.forward(h, e, traces);
      for (int j = 0; j < dim; ++j) {
        double mean = 0.0;
        for (int i = 0; i < h.dim(0); ++i) mean += h(i, j);
        fused(j) = mean / h.dim(0);
        fused(dim + j) = e(0, j);
      }
      break;
    }
    case AttentionVariant::kNone: {
      Tensor fh = pool_h_.forward(head_tokens);
      Tensor fe = pool_e_.forward(eye_tokens);
      for (int j = 0; j < dim; ++j) {
        fused(j) = fh(j);
        fused(dim + j) = fe(j);
      }
      break;
    }
  }
  shape_cache_.push_back({head_len_, eye_len_});
  return fused;
}

void DhecaModule::backward(const Tensor& d_fused, Tensor& d_head_tokens,
                           Tensor& d_eye_tokens) {
  if (shape_cache_.empty()) throw std::logic_error("DhecaModule: backward without forward");
  shape_cache_.pop_back();
  const int dim = config_.dim;
  switch (config_.variant) {
    case AttentionVariant::kDheca: {
      Tensor d_h({head_len_ + 1, dim}), d_e({eye_len_ + 1, dim});
      for (int j = 0; j < dim; ++j) {
        d_h(0, j) = d_fused(j);
        d_e(0, j) = d_fused(dim + j);
      }
      for (auto it = dual_blocks_.rbegin(); it != dual_blocks_.rend(); ++it) {
        Tensor d_h_in, d_e_in;
        it->backward(d_h, d_e, d_h_in, d_e_in);
        d_h = std::move(d_h_in);
        d_e = std::move(d_e_in);
      }
      d_head_tokens = embed_h_.detach_grad(d_h);
      d_eye_tokens = embed_e_.detach_grad(d_e);
      break;
    }
    case AttentionVariant::kSelf: {
      const int hl = head_len_ + 1, el = eye_len_ + 1;
      Tensor d_x({hl + el, dim});
      for (int j = 0; j < dim; ++j) {
        d_x(0, j) = d_fused(j);
        d_x(hl, j) = d_fused(dim + j);
      }
      for (auto it = self_blocks_.rbegin(); it != self_blocks_.rend(); ++it)
        d_x = it->backward(d_x);
      Tensor d_h({hl, dim}), d_e({el, dim});
      d_h.mat() = d_x.mat().topRows(hl);
      d_e.mat() = d_x.mat().bottomRows(el);
      d_head_tokens = embed_h_.detach_grad(d_h);
      d_eye_tokens = embed_e_.detach_grad(d_e);
      break;
    }
    case AttentionVariant::kCrossGaze: {
      Tensor d_h({head_len_, dim}), d_e({eye_len_ + 1, dim});
      for (int j = 0; j < dim; ++j) {
        const double per_row = d_fused(j) / head_len_;
        for (int i = 0; i < head_len_; ++i) d_h(i, j) = per_row;
        d_e(0, j) = d_fused(dim + j);
      }
      for (auto it = cross_blocks_.rbegin(); it != cross_blocks_.rend(); ++it) {
        Tensor d_e_in;
        it->backward(d_e, d_h, d_e_in);
        d_e = std::move(d_e_in);
      }
      d_head_tokens = embed_h_.detach_grad(d_h);
      d_eye_tokens = embed_e_.detach_grad(d_e);
      break;
    }
    case AttentionVariant::kNone: {
      Tensor d_fh({dim}), d_fe({dim});
      for (int j = 0; j < dim; ++j) {
        d_fh(j) = d_fused(j);
        d_fe(j) = d_fused(dim + j);
      }
      d_eye_tokens = pool_e_.backward(d_fe);
      d_head_tokens = pool_h_.backward(d_fh);
      break;
    }
  }
}

void DhecaModule::collect(nn::ParamRefs& out) {
  if (config_.variant != AttentionVariant::kNone) {
    embed_h_.collect(out);
    embed_e_.collect(out);
  }
  for (auto& b : dual_blocks_) b.collect(out);
  for (auto& b : self_blocks_) b.collect(out);
  for (auto& b : cross_blocks_) b.collect(out);
  if (config_.variant == AttentionVariant::kNone) {
    pool_h_.collect(out);
    pool_e_.collect(out);
  }
}

void DhecaModule::clear_cache() {
  for (auto& b : dual_blocks_) b.clear_cache();
  for (auto& b : self_blocks_) b.clear_cache();
  for (auto& b : cross_blocks_) b.clear_cache();
  pool_h_.clear_cache();
  pool_e_.clear_cache();
  shape_cache_.clear();
}

std::size_t DhecaModule::parameter_count() {
  nn::ParamRefs refs;
  collect(refs);
  std::size_t n = 0;
  for (const auto* p : refs)
    if (p->trainable) n += p->value.size();
  return n;
}

}  // namespace supergaze::net
