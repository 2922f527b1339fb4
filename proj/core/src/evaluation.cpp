#include "supergaze/evaluation.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "supergaze/errors.hpp"

namespace supergaze::eval {

const char* const kSubsetOrder[4] = {"full", "front", "front_facing", "backward"};

// ------------------------------------------------------------- predictors

ModelPredictor::ModelPredictor(net::GazeEstimator& model, const prep::Preprocessor& prep,
                               std::function<ImageTensor(const data::GazeSample&)> loader)
    : model_(model), prep_(prep), loader_(std::move(loader)) {}

namespace {

std::optional<prep::EyeRegions> prior_regions(const data::GazeSample& s, int width, int height) {
  if (!s.left_eye_box && !s.right_eye_box) return std::nullopt;
  prep::EyeRegions r;
  if (s.left_eye_box) r.left = s.left_eye_box->to_pixels(width, height);
  if (s.right_eye_box) r.right = s.right_eye_box->to_pixels(width, height);
  return r;
}

}  // namespace

codec::GazeVector ModelPredictor::predict(const data::GazeSample& s) {
  const ImageTensor frame = loader_(s);
  const auto prior = prior_regions(s, frame.width(), frame.height());
  return model_.predict(prep_.static_inputs(frame, s.image_path, prior)).vector;
}

TemporalModelPredictor::TemporalModelPredictor(
    net::GazeEstimator& model, const prep::Preprocessor& prep,
    const std::vector<data::GazeSample>& dataset,
    std::function<ImageTensor(const data::GazeSample&)> loader)
    : model_(model), prep_(prep), dataset_(dataset), loader_(std::move(loader)) {
  for (auto& w : data::temporal_windows(dataset_))
    windows_[dataset_[w.label_index].image_path] = w;
}

codec::GazeVector TemporalModelPredictor::predict(const data::GazeSample& s) {
  auto it = windows_.find(s.image_path);
  if (it == windows_.end())
    throw PipelineError(s.image_path, "sample is not the central frame of any 7-frame window");
  std::vector<ImageTensor> frames;
  std::vector<std::string> ids;
  std::vector<std::optional<prep::EyeRegions>> priors;
  for (std::size_t idx : it->second.frame_indices) {
    const data::GazeSample& f = dataset_[idx];
    frames.push_back(loader_(f));
    ids.push_back(f.image_path);
    priors.push_back(prior_regions(f, frames.back().width(), frames.back().height()));
  }
  return model_.predict(prep_.temporal_inputs(frames, ids, priors)).vector;
}

// ----------------------------------------------------------------- subsets

std::vector<std::string> classify_subset(double yaw_deg) {
  std::vector<std::string> out{"full"};
  if (yaw_deg >= -90.0 && yaw_deg <= 90.0) {
    out.emplace_back("front");
    if (yaw_deg >= -20.0 && yaw_deg <= 20.0) out.emplace_back("front_facing");
  } else {
    out.emplace_back("backward");
  }
  return out;
}

// ---------------------------------------------------------------- evaluate

EvalReport evaluate(Predictor& predictor, const std::vector<data::GazeSample>& samples,
                    std::vector<SamplePrediction>* per_sample) {
  if (samples.empty()) throw ConfigError("no samples to evaluate");
  std::map<std::string, double> sums;
  std::map<std::string, int> counts;
  EvalReport report;
  for (const auto& s : samples) {
    const codec::YawPitch gt = codec::vector_to_angles(s.gaze);
    const double yaw_deg = codec::rad_to_deg(gt.yaw);
    const codec::GazeVector pred = predictor.predict(s);
    const double ae = codec::angular_error_deg(s.gaze, pred);
    const auto names = classify_subset(yaw_deg);
    for (const auto& n : names) {
      sums[n] += ae;
      counts[n] += 1;
    }
    for (double edge : {-90.0, 90.0, -20.0, 20.0}) {
      if (std::fabs(yaw_deg - edge) < 1e-6) {
        report.boundary_flags.push_back(s.image_path);
        break;
      }
    }
    if (per_sample) {
      SamplePrediction p;
      p.image_path = s.image_path;
      p.subset = names.size() > 1 ? names.back() : names.front();
      p.yaw_deg = yaw_deg;
      p.pitch_deg = codec::rad_to_deg(gt.pitch);
      p.ae_deg = ae;
      p.predicted = pred;
      per_sample->push_back(std::move(p));
    }
  }
  report.sample_count = static_cast<int>(samples.size());
  for (const auto& [name, count] : counts)
    report.subsets[name] = {sums[name] / count, count};
  return report;
}

EvalReport cross_dataset_eval(Predictor& predictor, const std::vector<data::GazeSample>& test,
                              const std::string& train_id, const std::string& test_id,
                              std::vector<SamplePrediction>* per_sample) {
  EvalReport r = evaluate(predictor, test, per_sample);
  r.train_dataset = train_id;
  r.test_dataset = test_id;
  return r;
}

EvalReport aggregate(const std::vector<EvalReport>& runs) {
  if (runs.empty()) throw ConfigError("cannot aggregate zero evaluation runs");
  EvalReport out;
  out.run_count = static_cast<int>(runs.size());
  out.sample_count = runs.front().sample_count;
  out.train_dataset = runs.front().train_dataset;
  out.test_dataset = runs.front().test_dataset;
  for (const auto* name : kSubsetOrder) {
    double sum = 0.0;
    int present = 0, count = 0;
    for (const auto& r : runs) {
      auto it = r.subsets.find(name);
      if (it == r.subsets.end()) continue;
      sum += it->second.mean_ae_deg;
      if (present == 0) count = it->second.count;
      ++present;
    }
    if (present > 0) out.subsets[name] = {sum / present, count};
  }
  return out;
}

// ----------------------------------------------------------------- reports

nlohmann::json EvalReport::to_json() const {
  nlohmann::json subs;
  for (const auto& [name, r] : subsets)
    subs[name] = {{"mean_ae_deg", r.mean_ae_deg}, {"count", r.count}};
  return {{"schema", "supergaze-eval-report"},
          {"version", 1},
          {"train_dataset", train_dataset},
          {"test_dataset", test_dataset},
          {"run_count", run_count},
          {"sample_count", sample_count},
          {"subsets", subs},
          {"boundary_flags", boundary_flags}};
}

std::string EvalReport::render_table() const {
  std::ostringstream os;
  std::string tag = train_dataset.empty() && test_dataset.empty()
                        ? std::string("dataset")
                        : train_dataset + " -> " + test_dataset;
  os << std::left << std::setw(28) << "" << std::setw(16) << "Full" << std::setw(16) << "Front"
     << std::setw(16) << "Front facing" << std::setw(16) << "Backward" << '\n';
  os << std::left << std::setw(28) << tag;
  for (const auto* name : kSubsetOrder) {
    auto it = subsets.find(name);
    if (it == subsets.end()) {
      os << std::setw(16) << "-";
    } else {
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(2) << it->second.mean_ae_deg << " ("
           << it->second.count << ")";
      os << std::setw(16) << cell.str();
    }
  }
  os << '\n'
     << "runs: " << run_count << ", samples: " << sample_count
     << (boundary_flags.empty()
             ? std::string()
             : ", near-boundary samples: " + std::to_string(boundary_flags.size()))
     << '\n';
  return os.str();
}

void save_report(const std::filesystem::path& path, const EvalReport& report) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw PipelineError(path.string(), "cannot open report for writing");
  out << report.to_json().dump(2) << '\n';
  out.flush();
  if (!out) throw PipelineError(path.string(), "report write failed");
}

void save_predictions(const std::filesystem::path& path,
                      const std::vector<SamplePrediction>& preds) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw PipelineError(path.string(), "cannot open predictions for writing");
  out << nlohmann::json{{"schema", "supergaze-predictions"}, {"version", 1}}.dump() << '\n';
  for (const auto& p : preds) {
    out << nlohmann::json{{"image_path", p.image_path},
                          {"subset", p.subset},
                          {"yaw_deg", p.yaw_deg},
                          {"pitch_deg", p.pitch_deg},
                          {"ae_deg", p.ae_deg},
                          {"predicted", {p.predicted.x, p.predicted.y, p.predicted.z}}}
               .dump()
        << '\n';
  }
  out.flush();
  if (!out) throw PipelineError(path.string(), "prediction write failed");
}

std::vector<SamplePrediction> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read predictions: " + path.string());
  std::vector<SamplePrediction> out;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object())
      throw SchemaError(path.string() + " line " + std::to_string(line_no) +
                        ": not a JSON object");
    if (!header_seen) {
      header_seen = true;
      if (j.value("schema", "") != "supergaze-predictions" || j.value("version", -1) != 1)
        throw SchemaError(path.string() + ": missing or unsupported predictions header");
      continue;
    }
    try {
      SamplePrediction p;
      p.image_path = j.at("image_path").get<std::string>();
      p.subset = j.value("subset", "full");
      p.yaw_deg = j.at("yaw_deg").get<double>();
      p.pitch_deg = j.at("pitch_deg").get<double>();
      p.ae_deg = j.at("ae_deg").get<double>();
      const auto& v = j.at("predicted");
      p.predicted = {v.at(0).get<double>(), v.at(1).get<double>(), v.at(2).get<double>()};
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace supergaze::eval
