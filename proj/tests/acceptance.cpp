// Release gate: one check per shipped guarantee, each printed as a
// [PASS]/[FAIL] line with its runtime. The process exits nonzero when any
// check fails, so this binary is the single source of truth for "done".

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "supergaze/checkpoint.hpp"
#include "supergaze/data.hpp"
#include "supergaze/dheca.hpp"
#include "supergaze/errors.hpp"
#include "supergaze/evaluation.hpp"
#include "supergaze/gaze_codec.hpp"
#include "supergaze/model.hpp"
#include "supergaze/preprocessing.hpp"
#include "supergaze/rng.hpp"
#include "supergaze/superres.hpp"
#include "supergaze/training.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace supergaze;
namespace fs = std::filesystem;

namespace {

std::string format_num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

double wrap_angle(double a) {
  while (a > codec::kPi) a -= 2.0 * codec::kPi;
  while (a <= -codec::kPi) a += 2.0 * codec::kPi;
  return a;
}

// ---------------------------------------------------------------- codec

/// 3600 yaw values covering (-pi, pi] crossed with 100 pitches strictly
/// inside the open pitch range survive encode/decode within 1e-6 rad.
std::string check_trig_round_trip() {
  const auto start = std::chrono::steady_clock::now();
  const int n_yaw = 3600, n_pitch = 100;
  const double pitch_lo = -codec::kPi / 2 + 1e-3;
  const double pitch_span = codec::kPi - 2e-3;
  double worst = 0.0;
  for (int j = 0; j < n_yaw; ++j) {
    const double yaw = -codec::kPi + (j + 1) * (2.0 * codec::kPi / n_yaw);
    for (int i = 0; i < n_pitch; ++i) {
      const double pitch = pitch_lo + (i + 0.5) * (pitch_span / n_pitch);
      const codec::YawPitch out = codec::decode(codec::encode({yaw, pitch}));
      const double dy = std::fabs(wrap_angle(out.yaw - yaw));
      const double dp = std::fabs(out.pitch - pitch);
      worst = std::max(worst, std::max(dy, dp));
      if (dy > 1e-6 || dp > 1e-6) {
        return "yaw " + format_num(yaw) + ", pitch " + format_num(pitch) +
               " came back off by (" + format_num(dy) + ", " + format_num(dp) + ") rad";
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs >= 1.0) return "round trip took " + format_num(secs) + " s (budget 1 s)";
  return "";
}

/// The yaw decoder's blend weight hands control to the sine route near 0
/// and to the cosine route near +-pi/2.
std::string check_blend_weight() {
  const auto start = std::chrono::steady_clock::now();
  for (int t = 0; t < 1000; ++t) {
    const double off = -0.01 + (t + 0.5) * (0.02 / 1000.0);  // |off| < 0.01
    const double w0 = codec::decode_yaw_weight(codec::encode({off, 0.0}));
    if (!(w0 > 0.99))
      return "w(" + format_num(off) + ") = " + format_num(w0) + ", expected > 0.99";
    for (const double pole : {codec::kPi / 2, -codec::kPi / 2}) {
      const double w = codec::decode_yaw_weight(codec::encode({pole + off, 0.0}));
      if (!(w < 0.01))
        return "w(" + format_num(pole + off) + ") = " + format_num(w) + ", expected < 0.01";
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs >= 1.0) return "weight sweep took " + format_num(secs) + " s (budget 1 s)";
  return "";
}

/// Angular error agrees with an extended-precision oracle on random pairs
/// and is exact on identity and antipodal pairs.
std::string check_angular_error() {
  Rng rng(101);
  auto random_vec = [&] {
    codec::GazeVector v;
    do {
      v = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    } while (v.norm() < 1e-3);
    return v;
  };
  for (int i = 0; i < 1000; ++i) {
    const codec::GazeVector a = random_vec(), b = random_vec();
    const double got = codec::angular_error_deg(a, b);
    const double want = static_cast<double>(oracle::angular_error_deg_ld(a.x, a.y, a.z, b.x, b.y, b.z));
    if (std::fabs(got - want) > 1e-6)
      return "pair " + std::to_string(i) + ": " + format_num(got) + " vs oracle " +
             format_num(want);
  }
  for (int i = 0; i < 200; ++i) {
    const codec::GazeVector v = random_vec();
    const double same = codec::angular_error_deg(v, v);
    if (std::fabs(same) > 1e-6)
      return "identity pair gave " + format_num(same) + " deg, expected 0";
    const double anti = codec::angular_error_deg(v, -v);
    if (std::fabs(anti - 180.0) > 1e-6)
      return "antipodal pair gave " + format_num(anti) + " deg, expected 180";
  }
  return "";
}

// ------------------------------------------------------------- attention

/// The dual cross-attention block matches a loop-based reference on
/// random 5+3-token inputs, and every attention row is a distribution.
std::string check_attention_oracle() {
  const int dim = 16, heads = 4;
  Rng rng(11);
  net::DualBlock block("blk", dim, heads, 2);
  block.init(rng);

  Tensor head({5, dim}), eye({3, dim});
  for (std::size_t i = 0; i < head.size(); ++i) head[i] = rng.uniform(-1, 1);
  for (std::size_t i = 0; i < eye.size(); ++i) eye[i] = rng.uniform(-1, 1);

  std::vector<net::AttentionTrace> traces;
  Tensor head_out, eye_out;
  block.forward(head, eye, head_out, eye_out, &traces);
  block.clear_cache();

  nn::ParamRefs params;
  block.collect(params);
  const auto table = oracle::param_table(params);
  Tensor ref_head, ref_eye;
  oracle::dual_block_ref(table, "blk", head, eye, heads, ref_head, ref_eye);

  auto compare = [](const Tensor& got, const Tensor& want, const char* tag) -> std::string {
    for (std::size_t i = 0; i < got.size(); ++i) {
      const double rel = std::fabs(got[i] - want[i]) / std::max(1.0, std::fabs(want[i]));
      if (rel > 1e-5)
        return std::string(tag) + " diverges from the loop reference by " + format_num(rel) +
               " relative";
    }
    return "";
  };
  if (auto err = compare(head_out, ref_head, "head branch"); !err.empty()) return err;
  if (auto err = compare(eye_out, ref_eye, "eye branch"); !err.empty()) return err;

  if (traces.size() != 2) return "expected 2 attention traces, got " + std::to_string(traces.size());
  for (const auto& trace : traces) {
    if (static_cast<int>(trace.head_rows.size()) != heads)
      return "trace holds " + std::to_string(trace.head_rows.size()) + " heads";
    for (const Tensor& rows : trace.head_rows) {
      for (int i = 0; i < rows.dim(0); ++i) {
        double sum = 0.0;
        for (int j = 0; j < rows.dim(1); ++j) sum += rows(i, j);
        if (std::fabs(sum - 1.0) > 1e-6)
          return "softmax row sums to " + format_num(sum) + ", expected 1";
      }
    }
  }
  return "";
}

/// Analytic gradients of a scalar loss through the fusion module agree
/// with central finite differences on the tiny configuration.
std::string check_gradient() {
  const auto start = std::chrono::steady_clock::now();
  net::DhecaConfig cfg;
  cfg.depth = 1;
  cfg.dim = 8;
  cfg.heads = 2;
  cfg.mlp_ratio = 2;
  Rng rng(5);
  net::DhecaModule module(cfg, /*head_tokens=*/3, /*eye_tokens=*/2, rng);

  Tensor head({3, 8}), eye({2, 8}), direction({16});
  for (std::size_t i = 0; i < head.size(); ++i) head[i] = rng.uniform(-1, 1);
  for (std::size_t i = 0; i < eye.size(); ++i) eye[i] = rng.uniform(-1, 1);
  for (std::size_t i = 0; i < direction.size(); ++i) direction[i] = rng.uniform(-1, 1);

  auto loss = [&]() -> double {
    const Tensor fused = module.forward(head, eye);
    module.clear_cache();
    long double s = 0;
    for (std::size_t k = 0; k < fused.size(); ++k) s += static_cast<long double>(fused[k]) * direction(k);
    return static_cast<double>(s);
  };

  nn::ParamRefs params;
  module.collect(params);
  for (auto* p : params) p->zero_grad();
  module.forward(head, eye);
  Tensor d_head, d_eye;
  module.backward(direction, d_head, d_eye);
  module.clear_cache();

  const double h = 1e-5;
  auto fd_matches = [&](double analytic, double* slot, const std::string& label) -> std::string {
    const double saved = *slot;
    *slot = saved + h;
    const double up = loss();
    *slot = saved - h;
    const double down = loss();
    *slot = saved;
    const double fd = (up - down) / (2.0 * h);
    if (std::fabs(analytic - fd) > 1e-4 * std::max({1.0, std::fabs(fd), std::fabs(analytic)}))
      return label + ": analytic " + format_num(analytic) + " vs finite difference " +
             format_num(fd);
    return "";
  };

  for (auto* p : params) {
    if (!p->trainable) continue;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      if (auto err = fd_matches(p->grad[i], &p->value[i], p->name + "[" + std::to_string(i) + "]");
          !err.empty())
        return err;
    }
  }
  for (std::size_t i = 0; i < head.size(); ++i) {
    if (auto err = fd_matches(d_head[i], &head[i], "head input[" + std::to_string(i) + "]");
        !err.empty())
      return err;
  }
  for (std::size_t i = 0; i < eye.size(); ++i) {
    if (auto err = fd_matches(d_eye[i], &eye[i], "eye input[" + std::to_string(i) + "]");
        !err.empty())
      return err;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs >= 30.0) return "gradient check took " + format_num(secs) + " s (budget 30 s)";
  return "";
}

// ----------------------------------------------------------------- model

/// Token budgets for both modes and both backbones, and one class token
/// per branch visible in the attention shapes.
std::string check_shape_contracts() {
  struct Case {
    const char* backbone;
    const char* mode;
    int head_tokens, eye_tokens;
  };
  const Case cases[] = {
      {"toy", "static", 4 * 49, 2 * 4},
      {"toy", "temporal", 7 * 49, 2 * 7 * 4},
      {"resnet18", "static", 4 * 49, 2 * 4},
      {"resnet18", "temporal", 7 * 49, 2 * 7 * 4},
  };
  for (const Case& c : cases) {
    net::ModelConfig cfg;
    cfg.mode = c.mode;
    cfg.backbone = c.backbone;
    cfg.fuse.depth = 1;
    cfg.fuse.heads = 4;
    cfg.fuse.mlp_ratio = 2;
    cfg.validate_and_default();
    net::GazeEstimator model(cfg, /*seed=*/0);
    const std::string tag = std::string(c.backbone) + "/" + c.mode;

    if (model.head_token_count() != c.head_tokens)
      return tag + ": head tokens " + std::to_string(model.head_token_count()) + ", expected " +
             std::to_string(c.head_tokens);
    if (model.eye_token_count() != c.eye_tokens)
      return tag + ": eye tokens " + std::to_string(model.eye_token_count()) + ", expected " +
             std::to_string(c.eye_tokens);

    // One forward through real inputs; attention rows expose the +1 CLS.
    Rng rng(77);
    auto noise = [&rng](int size) {
      ImageTensor img(size, size);
      for (std::size_t i = 0; i < img.size(); ++i) img.data()[i] = rng.uniform();
      return img;
    };
    std::vector<net::AttentionTrace> traces;
    Tensor trig;
    if (cfg.temporal()) {
      prep::TemporalInputs in;
      for (int k = 0; k < prep::kTemporalWindow; ++k) {
        in.head_frames.push_back(noise(224));
        in.eyes.emplace_back(noise(64), noise(64));
      }
      trig = model.forward(in, false, &traces);
    } else {
      prep::FrameInputs in;
      for (std::size_t k = 0; k < cfg.schedule.scales.size(); ++k) in.head_scales.push_back(noise(224));
      in.left_eye = noise(64);
      in.right_eye = noise(64);
      trig = model.forward(in, false, &traces);
    }
    model.clear_cache();
    if (trig.size() != 3) return tag + ": output size " + std::to_string(trig.size());

    if (traces.size() != 2) return tag + ": expected 2 traces, got " + std::to_string(traces.size());
    const Tensor& he = traces[0].head_rows.at(0);  // head queries, eye keys
    const Tensor& eh = traces[1].head_rows.at(0);  // eye queries, head keys
    if (he.dim(0) != c.head_tokens + 1 || he.dim(1) != c.eye_tokens + 1)
      return tag + ": head-query attention is [" + std::to_string(he.dim(0)) + ", " +
             std::to_string(he.dim(1)) + "], expected CLS-extended sequence lengths";
    if (eh.dim(0) != c.eye_tokens + 1 || eh.dim(1) != c.head_tokens + 1)
      return tag + ": eye-query attention is [" + std::to_string(eh.dim(0)) + ", " +
             std::to_string(eh.dim(1)) + "], expected CLS-extended sequence lengths";
  }
  return "";
}

net::ModelConfig toy_model_config(net::AttentionVariant variant = net::AttentionVariant::kDheca,
                                  prep::SrMode sr = prep::SrMode::kNone) {
  net::ModelConfig cfg;
  cfg.mode = "static";
  cfg.backbone = "toy";
  cfg.sr = sr;
  cfg.fuse.depth = 1;
  cfg.fuse.heads = 4;
  cfg.fuse.mlp_ratio = 2;
  cfg.fuse.variant = variant;
  cfg.validate_and_default();
  return cfg;
}

/// Marker-image training set: the pattern position encodes the target.
train::TrainData marker_train_data(const net::ModelConfig& cfg, int n) {
  const auto images = fixtures::learnable_fixture(n);
  const auto pipeline = net::make_preprocessor(cfg, prep::make_detector("none"),
                                               prep::make_super_resolver("identity", ""));
  train::TrainData data;
  for (int i = 0; i < n; ++i) {
    data.static_inputs.push_back(
        pipeline.static_inputs(images[i].image, "marker" + std::to_string(i), std::nullopt));
    data.targets.push_back(codec::encode(codec::vector_to_angles(images[i].gaze)));
    data.gaze.push_back(images[i].gaze);
  }
  return data;
}

/// The static toy model overfits 32 synthetic samples below 5 deg mean
/// angular error within 300 epochs.
std::string check_toy_overfit() {
  const net::ModelConfig cfg = toy_model_config();
  const train::TrainData data = marker_train_data(cfg, 32);

  train::TrainConfig tc;
  tc.epochs = 300;
  tc.batch_size = 8;
  tc.learning_rate = 1e-3;
  tc.seed = 1;
  tc.early_stop_train_ae = 4.5;

  net::GazeEstimator model(cfg, tc.seed);
  const auto run_dir = fixtures::temp_dir("acceptance_overfit");
  const train::RunRecord record = train::train(model, tc, data, run_dir, {{"tag", "overfit"}});

  if (record.train_ae.empty()) return "no train error trajectory was recorded";
  const double final_ae = record.train_ae.back();
  if (!(final_ae < 5.0))
    return "train error stalled at " + format_num(final_ae) + " deg after " +
           std::to_string(record.train_ae.size()) + " epochs";
  return "";
}

// ------------------------------------------------------------------ data

/// 1000 annotated frames with 50 planted bystander boxes: the planted
/// boxes are all flagged and re-detected, the result is inside the valid
/// intervals, and a second pass changes nothing.
std::string check_rectification() {
  const auto fx = fixtures::rectification_fixture(1000, 50);
  const auto intervals = data::ValidIntervals::published_defaults();
  const prep::BlobFaceDetector detector;

  const auto [rectified, report] = data::rectify(fx.samples, intervals, detector, fx.loader());
  const auto totals = report.totals();
  if (totals.inspected != 1000)
    return "inspected " + std::to_string(totals.inspected) + " of 1000";
  if (totals.invalid != 50) return "flagged " + std::to_string(totals.invalid) + " invalid, expected 50";
  if (totals.redetected != 50)
    return "re-detected " + std::to_string(totals.redetected) + ", expected 50";
  if (totals.discarded != 0) return "discarded " + std::to_string(totals.discarded) + ", expected 0";

  for (const auto& s : rectified) {
    if (!s.face_box) return s.image_path + " lost its face box";
    if (!data::classify_validity(s.face_box->center_x(), s.face_box->center_y(), intervals,
                                 s.subset))
      return s.image_path + " still has an out-of-cluster center after rectification";
  }

  const auto [second, report2] = data::rectify(rectified, intervals, detector, fx.loader());
  const auto totals2 = report2.totals();
  if (totals2.invalid != 0 || totals2.redetected != 0)
    return "second pass flagged " + std::to_string(totals2.invalid) + " invalid";
  for (std::size_t i = 0; i < second.size(); ++i) {
    const auto& a = rectified[i].face_box;
    const auto& b = second[i].face_box;
    if (a->x0 != b->x0 || a->y0 != b->y0 || a->x1 != b->x1 || a->y1 != b->y1)
      return second[i].image_path + " changed on the second pass";
  }
  return "";
}

/// Yaw partition: front and backward cover the full set exactly, their
/// weighted means recombine to the full mean, and +-90 deg counts as front.
std::string check_partition() {
  Rng rng(202);
  std::vector<data::GazeSample> samples;
  auto add = [&samples](double yaw_deg, double pitch_deg) {
    data::GazeSample s;
    s.image_path = "p" + std::to_string(samples.size()) + ".png";
    s.subject_id = "s";
    s.sequence_id = "q";
    s.frame_index = static_cast<int>(samples.size());
    s.gaze = codec::angles_to_vector(
        {codec::deg_to_rad(yaw_deg), codec::deg_to_rad(pitch_deg)});
    s.subset = "test";
    samples.push_back(s);
  };
  for (int i = 0; i < 2000; ++i) add(rng.uniform(-180.0, 180.0), rng.uniform(-60.0, 60.0));
  add(90.0, 0.0);
  add(-90.0, 0.0);

  eval::ConstantPredictor predictor({0.1, 0.2, 0.97});
  std::vector<eval::SamplePrediction> preds;
  const eval::EvalReport report = eval::evaluate(predictor, samples, &preds);

  const auto& full = report.subsets.at("full");
  const auto& front = report.subsets.at("front");
  const auto& backward = report.subsets.at("backward");
  if (front.count + backward.count != full.count)
    return "front " + std::to_string(front.count) + " + backward " +
           std::to_string(backward.count) + " != full " + std::to_string(full.count);

  const double recombined =
      (front.mean_ae_deg * front.count + backward.mean_ae_deg * backward.count) / full.count;
  if (std::fabs(recombined - full.mean_ae_deg) > 1e-9)
    return "recombined mean " + format_num(recombined) + " vs full " + format_num(full.mean_ae_deg);

  for (const auto& p : preds) {
    if (p.image_path == "p2000.png" || p.image_path == "p2001.png") {
      if (p.subset != "front") return p.image_path + " (yaw +-90) classified as " + p.subset;
    }
  }
  return "";
}

// -------------------------------------------------------------- training

/// In-memory face-frame training set used by the switchboard and
/// determinism checks; every SR placement and detector path is exercised.
train::TrainData face_train_data(const net::ModelConfig& cfg, int n) {
  const auto fx = fixtures::rectification_fixture(n, 0);
  const auto pipeline = net::make_preprocessor(cfg, prep::make_detector("blob"),
                                               prep::make_super_resolver("identity", ""));
  return train::prepare_training_data(cfg, pipeline, fx.samples, fx.loader());
}

/// Every attention variant crossed with every SR placement trains end to
/// end into its own run directory.
std::string check_switchboard() {
  const net::AttentionVariant variants[] = {
      net::AttentionVariant::kNone, net::AttentionVariant::kSelf,
      net::AttentionVariant::kCrossGaze, net::AttentionVariant::kDheca};
  const prep::SrMode modes[] = {prep::SrMode::kNone, prep::SrMode::kHead,
                                prep::SrMode::kHeadEyeCrops, prep::SrMode::kHeadAndEyes};

  const fs::path root = fixtures::temp_dir("acceptance_switchboard");
  std::vector<fs::path> run_dirs;
  for (const auto variant : variants) {
    for (const auto sr : modes) {
      const net::ModelConfig cfg = toy_model_config(variant, sr);
      const std::string tag = net::to_string(variant) + "_" + prep::to_string(sr);
      try {
        const train::TrainData data = face_train_data(cfg, 4);
        if (data.size() != 4) return tag + ": expected 4 training inputs";

        train::TrainConfig tc;
        tc.epochs = 1;
        tc.batch_size = 4;
        tc.seed = 3;
        const fs::path run_root = root / tag;
        const auto result = train::multi_run(cfg, tc, data, run_root, {{"tag", tag}}, 1);
        if (!result.failures.empty()) return tag + ": " + result.failures.front();
        if (!fs::exists(run_root / "run0" / "model.ckpt")) return tag + ": checkpoint missing";
        run_dirs.push_back(run_root);
      } catch (const std::exception& e) {
        return tag + ": " + e.what();
      }
    }
  }
  if (run_dirs.size() != 16) return "expected 16 combinations, ran " + std::to_string(run_dirs.size());
  for (std::size_t i = 0; i < run_dirs.size(); ++i)
    for (std::size_t j = i + 1; j < run_dirs.size(); ++j)
      if (run_dirs[i] == run_dirs[j]) return "run directories collide: " + run_dirs[i].string();
  return "";
}

/// Identical seed and config reproduce the loss trajectory exactly and
/// the probe predictions bitwise.
std::string check_determinism() {
  const net::ModelConfig cfg = toy_model_config();
  const train::TrainData data = face_train_data(cfg, 6);

  train::TrainConfig tc;
  tc.epochs = 3;
  tc.batch_size = 2;
  tc.learning_rate = 1e-3;
  tc.seed = 13;

  net::GazeEstimator m1(cfg, tc.seed);
  net::GazeEstimator m2(cfg, tc.seed);
  const train::RunRecord r1 =
      train::train(m1, tc, data, fixtures::temp_dir("acceptance_det_a"), {});
  const train::RunRecord r2 =
      train::train(m2, tc, data, fixtures::temp_dir("acceptance_det_b"), {});

  if (r1.train_loss.size() != r2.train_loss.size())
    return "trajectory lengths differ: " + std::to_string(r1.train_loss.size()) + " vs " +
           std::to_string(r2.train_loss.size());
  for (std::size_t e = 0; e < r1.train_loss.size(); ++e) {
    if (r1.train_loss[e] != r2.train_loss[e])
      return "epoch " + std::to_string(e) + " losses differ: " + format_num(r1.train_loss[e]) +
             " vs " + format_num(r2.train_loss[e]);
  }

  for (std::size_t i = 0; i < data.size(); ++i) {
    const Tensor t1 = m1.forward(data.static_inputs[i], false);
    const Tensor t2 = m2.forward(data.static_inputs[i], false);
    m1.clear_cache();
    m2.clear_cache();
    if (std::memcmp(t1.data(), t2.data(), 3 * sizeof(double)) != 0)
      return "probe prediction " + std::to_string(i) + " is not bitwise identical";
  }
  return "";
}

}  // namespace

int main() {
  struct Check {
    const char* name;
    std::function<std::string()> run;
  };
  const std::vector<Check> checks = {
      {"trig codec round trip", check_trig_round_trip},
      {"yaw decoder blend weight", check_blend_weight},
      {"angular error oracle", check_angular_error},
      {"attention block oracle", check_attention_oracle},
      {"fusion gradient check", check_gradient},
      {"token shape contracts", check_shape_contracts},
      {"toy overfit", check_toy_overfit},
      {"rectification recovery", check_rectification},
      {"evaluation partition identity", check_partition},
      {"ablation switchboard", check_switchboard},
      {"seeded determinism", check_determinism},
  };

  int failures = 0;
  for (const auto& check : checks) {
    const auto start = std::chrono::steady_clock::now();
    std::string err;
    try {
      err = check.run();
    } catch (const std::exception& e) {
      err = std::string("unexpected exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (err.empty()) {
      std::printf("[PASS] %s (%.2f s)\n", check.name, secs);
    } else {
      std::printf("[FAIL] %s (%.2f s): %s\n", check.name, secs, err.c_str());
      ++failures;
    }
    std::fflush(stdout);
  }
  if (failures > 0) std::printf("%d of %zu checks failed\n", failures, checks.size());
  return failures == 0 ? 0 : 1;
}
