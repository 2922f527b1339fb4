#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "supergaze/dheca.hpp"
#include "supergaze/errors.hpp"
#include "supergaze/rng.hpp"
#include "support/oracles.hpp"

using namespace supergaze;
using net::AttentionVariant;

namespace {

Tensor random_tokens(int rows, int dim, Rng& rng) {
  Tensor t({rows, dim});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.normal();
  return t;
}

double max_rel_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::fabs(a[i]), std::fabs(b[i]), 1e-12});
    m = std::max(m, std::fabs(a[i] - b[i]) / denom);
  }
  return m;
}

void zero_param(nn::ParamRefs& params, const std::string& name) {
  for (auto* p : params)
    if (p->name == name) {
      p->value.set_zero();
      return;
    }
  FAIL("missing parameter ", name);
}

const Tensor& find_param(const nn::ParamRefs& params, const std::string& name) {
  for (const auto* p : params)
    if (p->name == name) return p->value;
  throw std::logic_error("missing parameter " + name);
}

net::DhecaConfig small_config(AttentionVariant v, int depth = 2) {
  net::DhecaConfig cfg;
  cfg.depth = depth;
  cfg.dim = 16;
  cfg.heads = 4;
  cfg.mlp_ratio = 2;
  cfg.variant = v;
  return cfg;
}

}  // namespace

TEST_CASE("attention variant names round trip") {
  for (auto v : {AttentionVariant::kNone, AttentionVariant::kSelf, AttentionVariant::kCrossGaze,
                 AttentionVariant::kDheca})
    CHECK(net::parse_attention_variant(net::to_string(v)) == v);
  CHECK_THROWS_AS(net::parse_attention_variant("full"), ConfigError);
}

TEST_CASE("dual block matches the loop reference on random tokens") {
  Rng rng(31);
  net::DualBlock block("blk", 16, 4, 2);
  block.init(rng);
  nn::ParamRefs params;
  block.collect(params);
  const auto table = oracle::param_table(params);

  const Tensor head = random_tokens(5, 16, rng);
  const Tensor eye = random_tokens(3, 16, rng);

  Tensor head_out, eye_out;
  block.forward(head, eye, head_out, eye_out, nullptr);
  block.clear_cache();

  Tensor ref_head, ref_eye;
  oracle::dual_block_ref(table, "blk", head, eye, 4, ref_head, ref_eye);

  CHECK(max_rel_diff(head_out, ref_head) < 1e-10);
  CHECK(max_rel_diff(eye_out, ref_eye) < 1e-10);
}

TEST_CASE("dual block attention rows are probability distributions") {
  Rng rng(32);
  net::DualBlock block("blk", 16, 4, 2);
  block.init(rng);
  const Tensor head = random_tokens(5, 16, rng);
  const Tensor eye = random_tokens(3, 16, rng);

  std::vector<net::AttentionTrace> traces;
  Tensor head_out, eye_out;
  block.forward(head, eye, head_out, eye_out, &traces);
  REQUIRE(traces.size() == 2);  // head->eye first, then eye->head
  REQUIRE(traces[0].head_rows.size() == 4);
  CHECK(traces[0].head_rows[0].shape() == std::vector<int>{5, 3});
  CHECK(traces[1].head_rows[0].shape() == std::vector<int>{3, 5});
  for (const auto& trace : traces) {
    for (const auto& rows : trace.head_rows) {
      for (int i = 0; i < rows.dim(0); ++i) {
        double s = 0.0;
        for (int j = 0; j < rows.dim(1); ++j) {
          s += rows(i, j);
          CHECK(rows(i, j) >= 0.0);
        }
        CHECK(std::fabs(s - 1.0) < 1e-6);
      }
    }
  }
}

TEST_CASE("fusion trunk has no output normalization: zeroed residual writes pass "
          "the class tokens through untouched") {
  Rng rng(33);
  auto cfg = small_config(AttentionVariant::kDheca);
  net::DhecaModule module(cfg, 6, 4, rng);
  nn::ParamRefs params;
  module.collect(params);
  for (int b = 0; b < cfg.depth; ++b) {
    const std::string blk = "fuse.block" + std::to_string(b);
    for (const char* n : {".wo_he.weight", ".wo_he.bias", ".wo_eh.weight", ".wo_eh.bias",
                          ".mlp_h.fc2.weight", ".mlp_h.fc2.bias", ".mlp_e.fc2.weight",
                          ".mlp_e.fc2.bias"})
      zero_param(params, blk + n);
  }

  const Tensor head = random_tokens(6, 16, rng);
  const Tensor eye = random_tokens(4, 16, rng);
  const Tensor fused = module.forward(head, eye);
  REQUIRE(fused.shape() == std::vector<int>{32});

  const Tensor& cls_h = find_param(params, "fuse.head.cls");
  const Tensor& pos_h = find_param(params, "fuse.head.pos");
  const Tensor& cls_e = find_param(params, "fuse.eye.cls");
  const Tensor& pos_e = find_param(params, "fuse.eye.pos");
  for (int j = 0; j < 16; ++j) {
    CHECK(fused(j) == doctest::Approx(cls_h(0, j) + pos_h(0, j)).epsilon(1e-12));
    CHECK(fused(16 + j) == doctest::Approx(cls_e(0, j) + pos_e(0, j)).epsilon(1e-12));
  }
}

TEST_CASE("with a zeroed positional table the fused output is permutation invariant") {
  Rng rng(34);
  auto cfg = small_config(AttentionVariant::kDheca);
  net::DhecaModule module(cfg, 6, 4, rng);
  nn::ParamRefs params;
  module.collect(params);
  zero_param(params, "fuse.head.pos");
  zero_param(params, "fuse.eye.pos");

  const Tensor head = random_tokens(6, 16, rng);
  const Tensor eye = random_tokens(4, 16, rng);
  const Tensor base = module.forward(head, eye);
  module.clear_cache();

  // Reverse the token order in both branches.
  Tensor head_r({6, 16}), eye_r({4, 16});
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 16; ++j) head_r(i, j) = head(5 - i, j);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 16; ++j) eye_r(i, j) = eye(3 - i, j);
  const Tensor permuted = module.forward(head_r, eye_r);

  CHECK(max_rel_diff(base, permuted) < 1e-9);
}

TEST_CASE("trainable parameter count matches the closed form") {
  Rng rng(35);
  auto cfg = small_config(AttentionVariant::kDheca, 3);
  net::DhecaModule module(cfg, 6, 4, rng);
  CHECK(module.parameter_count() ==
        oracle::dheca_param_count(cfg.depth, cfg.dim, cfg.mlp_ratio, 6, 4));

  // Full-size fusion configuration, static token counts.
  net::DhecaConfig full;  // depth 4, dim 512, heads 8, ratio 4
  CHECK(oracle::dheca_param_count(full.depth, full.dim, full.mlp_ratio, 4 * 49, 2 * 4) ==
        static_cast<std::size_t>(4) * (4 * 2 * 512 + 8 * (512 * 512 + 512) +
                                       2 * ((2048 * 512 + 2048) + (512 * 2048 + 512))) +
            2 * 512 + (4 * 49 + 1) * 512 + (2 * 4 + 1) * 512);
}

TEST_CASE("every variant yields a fused feature of twice the width") {
  Rng rng(36);
  for (auto v : {AttentionVariant::kNone, AttentionVariant::kSelf, AttentionVariant::kCrossGaze,
                 AttentionVariant::kDheca}) {
    auto cfg = small_config(v);
    net::DhecaModule module(cfg, 6, 4, rng);
    CHECK(module.fused_dim() == 32);
    Tensor head = random_tokens(6, 16, rng);
    Tensor eye = random_tokens(4, 16, rng);
    std::vector<net::AttentionTrace> traces;
    const Tensor fused = module.forward(head, eye, &traces);
    REQUIRE(fused.shape() == std::vector<int>{32});
    for (std::size_t i = 0; i < fused.size(); ++i) CHECK(std::isfinite(fused[i]));

    const std::size_t expected_traces =
        v == AttentionVariant::kDheca ? 4 : (v == AttentionVariant::kNone ? 0 : 2);
    CHECK(traces.size() == expected_traces);
  }
}

TEST_CASE("single-direction variant: the head summary is the mean of the embedded "
          "head tokens, untouched by the blocks") {
  Rng rng(37);
  auto cfg = small_config(AttentionVariant::kCrossGaze);
  net::DhecaModule module(cfg, 5, 3, rng);
  nn::ParamRefs params;
  module.collect(params);
  // No class token on the head branch in this variant.
  for (const auto* p : params) CHECK(p->name != "fuse.head.cls");
  const Tensor& pos_h = find_param(params, "fuse.head.pos");
  REQUIRE(pos_h.shape() == std::vector<int>{5, 16});

  const Tensor head = random_tokens(5, 16, rng);
  const Tensor eye = random_tokens(3, 16, rng);
  const Tensor fused = module.forward(head, eye);
  for (int j = 0; j < 16; ++j) {
    double mean = 0.0;
    for (int i = 0; i < 5; ++i) mean += head(i, j) + pos_h(i, j);
    CHECK(fused(j) == doctest::Approx(mean / 5.0).epsilon(1e-9));
  }
}

TEST_CASE("attention-free fusion matches a loop over max and mean pooling") {
  Rng rng(38);
  net::PooledFuse pool("p", 8);
  pool.init(rng);
  nn::ParamRefs params;
  pool.collect(params);

  const Tensor tokens = random_tokens(5, 8, rng);
  const Tensor out = pool.forward(tokens);
  REQUIRE(out.shape() == std::vector<int>{8});

  Tensor pooled({1, 16});
  for (int j = 0; j < 8; ++j) {
    double best = tokens(0, j), sum = 0.0;
    for (int i = 0; i < 5; ++i) {
      best = std::max(best, tokens(i, j));
      sum += tokens(i, j);
    }
    pooled(0, j) = best;
    pooled(0, 8 + j) = sum / 5.0;
  }
  Tensor hidden = oracle::linear_ref(pooled, find_param(params, "p.fc1.weight"),
                                     find_param(params, "p.fc1.bias"));
  for (std::size_t i = 0; i < hidden.size(); ++i) hidden[i] = std::max(0.0, hidden[i]);
  const Tensor ref = oracle::linear_ref(hidden, find_param(params, "p.fc2.weight"),
                                        find_param(params, "p.fc2.bias"));
  for (int j = 0; j < 8; ++j) CHECK(out(j) == doctest::Approx(ref(0, j)).epsilon(1e-10));
}

TEST_CASE("module input gradients agree with central differences") {
  Rng rng(39);
  net::DhecaConfig cfg;
  cfg.depth = 1;
  cfg.dim = 8;
  cfg.heads = 2;
  cfg.mlp_ratio = 2;
  cfg.variant = AttentionVariant::kDheca;
  net::DhecaModule module(cfg, 3, 2, rng);

  Tensor head = random_tokens(3, 8, rng);
  Tensor eye = random_tokens(2, 8, rng);
  Tensor r({16});
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = rng.normal();

  auto loss = [&] {
    const Tensor fused = module.forward(head, eye);
    module.clear_cache();
    double s = 0.0;
    for (std::size_t i = 0; i < fused.size(); ++i) s += fused[i] * r[i];
    return s;
  };

  nn::ParamRefs params;
  module.collect(params);
  for (auto* p : params) p->zero_grad();
  module.forward(head, eye);
  Tensor d_head, d_eye;
  module.backward(r, d_head, d_eye);

  const double h = 1e-6;
  auto probe = [&](Tensor& t, const Tensor& analytic) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double keep = t[i];
      t[i] = keep + h;
      const double up = loss();
      t[i] = keep - h;
      const double down = loss();
      t[i] = keep;
      const double fd = (up - down) / (2 * h);
      CHECK(std::fabs(fd - analytic[i]) < 1e-5 * std::max(1.0, std::fabs(fd)));
    }
  };
  probe(head, d_head);
  probe(eye, d_eye);
}
