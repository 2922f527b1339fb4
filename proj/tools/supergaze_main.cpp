// Command-line front end: rectify | train | eval | cross-eval | plot | inspect.
//
// Exit codes: 0 success, 2 configuration error (missing files, bad flag
// values), 3 schema violation (malformed annotations/configs/checkpoints),
// 4 runtime failure.

#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "supergaze/checkpoint.hpp"
#include "supergaze/data.hpp"
#include "supergaze/errors.hpp"
#include "supergaze/evaluation.hpp"
#include "supergaze/model.hpp"
#include "supergaze/plotting.hpp"
#include "supergaze/run_config.hpp"
#include "supergaze/training.hpp"

namespace sg = supergaze;
namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSchema = 3;
constexpr int kExitRuntime = 4;

/// Dataset location flags shared by the data-consuming verbs. Two spellings
/// are accepted: `--dataset <dir>` (with `--format`), or
/// `--dataset <format> --root <dir>`.
struct DataArgs {
  std::string dataset;
  std::string root;
  std::string format = "jsonl";

  void attach(CLI::App& cmd, bool required = true) {
    auto* opt = cmd.add_option("--dataset", dataset,
                               "Dataset directory/annotation file, or a format name "
                               "(gaze360|gfie|jsonl|csv) when --root is given");
    if (required) opt->required();
    cmd.add_option("--root", root, "Dataset directory when --dataset names a format");
    cmd.add_option("--format", format, "Annotation format when --dataset is a path")
        ->default_val("jsonl");
  }

  fs::path resolved_root() const { return root.empty() ? fs::path(dataset) : fs::path(root); }
  std::string resolved_format() const { return root.empty() ? format : dataset; }

  /// Directory to resolve image paths against.
  fs::path image_root() const {
    const fs::path r = resolved_root();
    return fs::is_directory(r) ? r : r.parent_path();
  }

  std::vector<sg::data::GazeSample> load(std::vector<std::string>* warnings) const {
    return sg::data::load_dataset(resolved_root(), resolved_format(), warnings);
  }
};

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

sg::data::ValidIntervals load_intervals(const std::string& path) {
  return path.empty() ? sg::data::ValidIntervals::published_defaults()
                      : sg::data::ValidIntervals::load(path);
}

/// Splits CLI override plumbing from RunConfig defaults: only flags the
/// user actually passed replace file/default values.
struct TrainOverrides {
  std::string config_path, mode, backbone, sr_mode, attention, out_dir, warm_start;
  std::string detector, sr_impl, intervals;
  int runs = 0, epochs = 0, batch_size = 0, depth = 0;
  double lr = 0.0, early_stop = 0.0;
  std::uint64_t seed = 0;
  bool best_val = false;

  CLI::App* cmd = nullptr;

  void attach(CLI::App& c) {
    cmd = &c;
    c.add_option("--config", config_path, "Run configuration JSON; flags override its values");
    c.add_option("--mode", mode, "static|temporal");
    c.add_option("--backbone", backbone, "resnet18|toy");
    c.add_option("--sr", sr_mode, "none|head|head-eyecrops|head-and-eyes");
    c.add_option("--attention", attention, "none|self|crossgaze|dheca");
    c.add_option("--depth", depth, "Fusion block count");
    c.add_option("--runs", runs, "Independent training runs");
    c.add_option("--seed", seed, "Base seed; run r uses seed+r");
    c.add_option("--epochs", epochs, "Training epochs");
    c.add_option("--batch-size", batch_size, "Optimizer batch size");
    c.add_option("--lr", lr, "Constant learning rate");
    c.add_option("--early-stop-ae", early_stop,
                 "Stop when train AE (degrees) drops below this; 0 disables");
    c.add_option("--out", out_dir, "Run directory root");
    c.add_option("--warm-start", warm_start, "Checkpoint to copy matching weights from");
    c.add_option("--detector", detector, "Eye/face detector (none|blob)");
    c.add_option("--sr-impl", sr_impl, "Enhancer implementation (identity|bicubic|cached:<dir>)");
    c.add_option("--intervals", intervals, "Validity-interval JSON override");
    c.add_flag("--best-val", best_val, "Keep the best-validation checkpoint instead of the last");
  }

  bool passed(const std::string& flag) const { return cmd->count(flag) > 0; }

  sg::cfg::RunConfig apply() const {
    sg::cfg::RunConfig cfg;
    cfg.train.device = sg::cfg::default_device();
    if (!config_path.empty()) cfg = sg::cfg::RunConfig::load(config_path);
    if (passed("--mode")) cfg.model.mode = mode;
    if (passed("--backbone")) cfg.model.backbone = backbone;
    if (passed("--sr")) cfg.model.sr = sg::prep::parse_sr_mode(sr_mode);
    if (passed("--attention")) cfg.model.fuse.variant = sg::net::parse_attention_variant(attention);
    if (passed("--depth")) cfg.model.fuse.depth = depth;
    if (passed("--runs")) cfg.runs = runs;
    if (passed("--seed")) cfg.train.seed = seed;
    if (passed("--epochs")) cfg.train.epochs = epochs;
    if (passed("--batch-size")) cfg.train.batch_size = batch_size;
    if (passed("--lr")) cfg.train.learning_rate = lr;
    if (passed("--early-stop-ae")) cfg.train.early_stop_train_ae = early_stop;
    if (passed("--out")) cfg.out_dir = out_dir;
    if (passed("--warm-start")) cfg.train.warm_start = warm_start;
    if (passed("--detector")) cfg.detector = detector;
    if (passed("--sr-impl")) cfg.sr = sr_impl;
    if (passed("--intervals")) cfg.intervals_path = intervals;
    if (passed("--best-val")) cfg.train.select_best_val = best_val;
    cfg.model.validate_and_default();
    cfg.train.validate();
    if (cfg.runs < 1) throw sg::ConfigError("--runs must be at least 1");
    return cfg;
  }
};

int cmd_rectify(const DataArgs& data, const std::string& intervals_path,
                const std::string& detector_name, const std::string& out_path) {
  std::vector<std::string> warnings;
  auto samples = data.load(&warnings);
  print_warnings(warnings);

  const auto intervals = load_intervals(intervals_path);
  const auto detector = sg::prep::make_detector(detector_name);
  auto loader = sg::data::disk_frame_loader(data.image_root());

  auto [rectified, report] = sg::data::rectify(samples, intervals, *detector, loader);
  print_warnings(report.warnings);

  const fs::path out =
      out_path.empty() ? data.image_root() / "annotations.rectified.jsonl" : fs::path(out_path);
  sg::data::save_jsonl(out, rectified);
  {
    fs::path report_path = out;
    report_path += ".report.json";
    std::ofstream rf(report_path);
    rf << report.to_json().dump(2) << '\n';
  }

  const auto t = report.totals();
  std::cout << "rectify: inspected " << t.inspected << ", valid " << t.valid << ", invalid "
            << t.invalid << ", re-detected " << t.redetected << ", discarded " << t.discarded
            << '\n'
            << "rectified annotations written to " << out.string() << '\n';
  return 0;
}

int cmd_train(const DataArgs& data, const TrainOverrides& over) {
  sg::cfg::RunConfig cfg = over.apply();
  if (!data.dataset.empty()) {
    cfg.dataset_root = data.resolved_root().string();
    cfg.dataset_format = data.resolved_format();
  }
  if (cfg.dataset_root.empty()) throw sg::ConfigError("no dataset given (--dataset or config)");

  std::vector<std::string> warnings;
  auto samples = sg::data::load_dataset(cfg.dataset_root, cfg.dataset_format, &warnings);
  print_warnings(warnings);

  std::vector<sg::data::GazeSample> train_split, val_split;
  for (auto& s : samples) {
    if (s.subset == "train") train_split.push_back(s);
    else if (s.subset == "val") val_split.push_back(s);
  }
  if (train_split.empty()) throw sg::ConfigError("dataset has no train-subset samples");

  std::shared_ptr<const sg::prep::LandmarkDetector> detector = sg::prep::make_detector(cfg.detector);
  const auto sr = sg::prep::make_super_resolver(cfg.sr, cfg.dataset_root);
  const auto prep = sg::net::make_preprocessor(cfg.model, detector, sr);
  auto loader = sg::data::disk_frame_loader(fs::is_directory(cfg.dataset_root)
                                                ? fs::path(cfg.dataset_root)
                                                : fs::path(cfg.dataset_root).parent_path());

  std::cout << "train: device " << cfg.train.device << ", " << train_split.size()
            << " train samples, " << val_split.size() << " val samples, " << cfg.runs
            << " run(s)\n";
  const auto train_data = sg::train::prepare_training_data(cfg.model, prep, train_split, loader);
  const auto val_data = sg::train::prepare_training_data(cfg.model, prep, val_split, loader);
  if (train_data.size() == 0)
    throw sg::ConfigError("no trainable inputs (temporal mode needs 7-frame sequences)");

  const fs::path out_root(cfg.out_dir);
  fs::create_directories(out_root);
  cfg.save(out_root / "config.json");

  const auto result =
      sg::train::multi_run(cfg.model, cfg.train, train_data, out_root, cfg.to_json(), cfg.runs,
                           val_data.size() > 0 ? &val_data : nullptr);
  for (const auto& f : result.failures) std::cerr << "warning: " << f << '\n';
  for (std::size_t r = 0; r < result.records.size(); ++r) {
    const auto& rec = result.records[r];
    std::cout << "run " << r << ": seed " << rec.seed << ", final loss "
              << (rec.train_loss.empty() ? 0.0 : rec.train_loss.back());
    if (!rec.val_ae.empty()) std::cout << ", final val AE " << rec.val_ae.back() << " deg";
    std::cout << ", checkpoint " << rec.checkpoint_path << '\n';
  }
  if (result.records.empty()) throw sg::PipelineError("train", "all runs failed");
  return 0;
}

/// Builds the predictor described by a checkpoint: either a protocol stub
/// ({"predictor": "oracle"|"inverted"}) or a full model restore.
struct LoadedPredictor {
  std::unique_ptr<sg::eval::Predictor> predictor;
  // Model path keeps the estimator and pipeline alive behind the predictor.
  std::unique_ptr<sg::net::GazeEstimator> model;
  std::shared_ptr<const sg::prep::Preprocessor> prep;
};

LoadedPredictor make_predictor(const fs::path& checkpoint, const DataArgs& data,
                               const std::vector<sg::data::GazeSample>& samples,
                               const std::string& detector_override) {
  LoadedPredictor out;
  const nlohmann::json config = sg::ckpt::peek_config(checkpoint);

  if (config.contains("predictor")) {
    const std::string kind = config.at("predictor").get<std::string>();
    if (kind == "oracle") {
      out.predictor = std::make_unique<sg::eval::OraclePredictor>();
    } else if (kind == "inverted") {
      out.predictor = std::make_unique<sg::eval::InvertedPredictor>();
    } else {
      throw sg::SchemaError("unknown stub predictor '" + kind + "' in " + checkpoint.string());
    }
    return out;
  }

  if (!config.contains("model"))
    throw sg::SchemaError("checkpoint " + checkpoint.string() + " carries no model config");
  const auto model_cfg = sg::cfg::model_from_json(config.at("model"));
  out.model = std::make_unique<sg::net::GazeEstimator>(model_cfg, /*seed=*/0);
  sg::nn::ParamRefs params;
  out.model->collect(params);
  sg::ckpt::load_checkpoint(checkpoint, params);

  std::string detector_name = detector_override;
  if (detector_name.empty()) detector_name = config.value("detector", "blob");
  const std::string sr_spec = config.value("sr", "identity");
  out.prep = std::make_shared<sg::prep::Preprocessor>(sg::net::make_preprocessor(
      model_cfg, sg::prep::make_detector(detector_name),
      sg::prep::make_super_resolver(sr_spec, data.image_root())));

  auto loader = sg::data::disk_frame_loader(data.image_root());
  if (model_cfg.temporal()) {
    out.predictor = std::make_unique<sg::eval::TemporalModelPredictor>(*out.model, *out.prep,
                                                                       samples, loader);
  } else {
    out.predictor = std::make_unique<sg::eval::ModelPredictor>(*out.model, *out.prep, loader);
  }
  return out;
}

int cmd_eval(const DataArgs& data, const std::string& checkpoint, const std::string& split,
             const std::string& out_dir, const std::string& detector_override,
             const std::string& train_id, const std::string& test_id, bool cross) {
  std::vector<std::string> warnings;
  auto samples = data.load(&warnings);
  print_warnings(warnings);

  std::vector<sg::data::GazeSample> subset;
  for (auto& s : samples)
    if (split == "all" || s.subset == split) subset.push_back(s);
  if (subset.empty()) throw sg::ConfigError("no samples in split '" + split + "'");

  auto loaded = make_predictor(checkpoint, data, samples, detector_override);

  std::vector<sg::eval::SamplePrediction> preds;
  const sg::eval::EvalReport report =
      cross ? sg::eval::cross_dataset_eval(*loaded.predictor, subset, train_id, test_id, &preds)
            : sg::eval::evaluate(*loaded.predictor, subset, &preds);

  const fs::path out(out_dir);
  fs::create_directories(out);
  sg::eval::save_report(out / "report.json", report);
  sg::eval::save_predictions(out / "predictions.jsonl", preds);
  std::cout << report.render_table() << "reports written to " << out.string() << '\n';
  return 0;
}

int cmd_plot(const std::string& predictions_path, const std::string& out_path, double max_ae) {
  const auto preds = sg::eval::load_predictions(predictions_path);
  const auto image = sg::plot::polar_error_plot(preds, 640, max_ae);
  sg::plot::save_plot(image, out_path);
  std::cout << "plot of " << preds.size() << " predictions written to " << out_path << '\n';
  return 0;
}

int cmd_inspect(const DataArgs& data, const std::string& intervals_path,
                const std::string& out_path) {
  std::vector<std::string> warnings;
  const auto samples = data.load(&warnings);
  print_warnings(warnings);

  const auto intervals = load_intervals(intervals_path);
  int with_box = 0, outside = 0;
  for (const auto& s : samples) {
    if (!s.face_box) continue;
    ++with_box;
    if (!sg::data::classify_validity(s.face_box->center_x(), s.face_box->center_y(), intervals,
                                     s.subset))
      ++outside;
  }
  sg::plot::save_plot(sg::plot::face_center_plot(samples, intervals), out_path);
  std::cout << "inspect: " << samples.size() << " samples, " << with_box << " with face boxes, "
            << outside << " centers outside their subset intervals\n"
            << "scatter written to " << out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SuperGaze: dual head-eye cross-attention gaze estimation"};
  app.require_subcommand(1);

  // rectify
  auto* rectify = app.add_subcommand("rectify", "Re-detect annotations with invalid face centers");
  DataArgs rectify_data;
  rectify_data.attach(*rectify);
  std::string rectify_intervals, rectify_detector = "blob", rectify_out;
  rectify->add_option("--intervals", rectify_intervals, "Validity-interval JSON override");
  rectify->add_option("--detector", rectify_detector, "Detector for re-detection")
      ->default_val("blob");
  rectify->add_option("--out", rectify_out, "Output annotation file (JSONL)");

  // train
  auto* train = app.add_subcommand("train", "Optimize a gaze estimator");
  DataArgs train_data;
  train_data.attach(*train, /*required=*/false);
  TrainOverrides over;
  over.attach(*train);

  // eval / cross-eval
  auto add_eval_flags = [](CLI::App& c, DataArgs& d, std::string& ckpt, std::string& split,
                           std::string& out, std::string& detector) {
    d.attach(c);
    c.add_option("--checkpoint", ckpt, "Model checkpoint or protocol stub")->required();
    c.add_option("--split", split, "test|train|val|all")->default_val("test");
    c.add_option("--out", out, "Report directory")->default_val("eval-out");
    c.add_option("--detector", detector, "Override the checkpoint's detector");
  };
  auto* eval_cmd = app.add_subcommand("eval", "Within-dataset evaluation");
  DataArgs eval_data;
  std::string eval_ckpt, eval_split, eval_out, eval_detector;
  add_eval_flags(*eval_cmd, eval_data, eval_ckpt, eval_split, eval_out, eval_detector);

  auto* cross = app.add_subcommand("cross-eval", "Evaluate on a foreign dataset's test split");
  DataArgs cross_data;
  std::string cross_ckpt, cross_split, cross_out, cross_detector;
  std::string cross_train_id, cross_test_id;
  add_eval_flags(*cross, cross_data, cross_ckpt, cross_split, cross_out, cross_detector);
  cross->add_option("--train-id", cross_train_id, "Name of the training dataset")->required();
  cross->add_option("--test-id", cross_test_id, "Name of the evaluation dataset")->required();

  // plot
  auto* plot = app.add_subcommand("plot", "Polar scatter of per-sample angular error vs yaw");
  std::string plot_preds, plot_out = "error_polar.png";
  double plot_max_ae = 0.0;
  plot->add_option("--predictions", plot_preds, "predictions.jsonl from eval")->required();
  plot->add_option("--out", plot_out, "Output PNG")->default_val("error_polar.png");
  plot->add_option("--max-ae", plot_max_ae, "Radial limit in degrees (0: fit to data)");

  // inspect
  auto* inspect = app.add_subcommand("inspect", "Render the face-center distribution scatter");
  DataArgs inspect_data;
  inspect_data.attach(*inspect);
  std::string inspect_intervals, inspect_out = "face_centers.png";
  inspect->add_option("--intervals", inspect_intervals, "Validity-interval JSON override");
  inspect->add_option("--out", inspect_out, "Output PNG")->default_val("face_centers.png");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (rectify->parsed())
      return cmd_rectify(rectify_data, rectify_intervals, rectify_detector, rectify_out);
    if (train->parsed()) return cmd_train(train_data, over);
    if (eval_cmd->parsed())
      return cmd_eval(eval_data, eval_ckpt, eval_split, eval_out, eval_detector, "", "", false);
    if (cross->parsed())
      return cmd_eval(cross_data, cross_ckpt, cross_split, cross_out, cross_detector,
                      cross_train_id, cross_test_id, true);
    if (plot->parsed()) return cmd_plot(plot_preds, plot_out, plot_max_ae);
    if (inspect->parsed()) return cmd_inspect(inspect_data, inspect_intervals, inspect_out);
  } catch (const sg::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const sg::SchemaError& e) {
    std::cerr << "schema violation: " << e.what() << '\n';
    return kExitSchema;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
