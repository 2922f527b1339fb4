#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "supergaze/data.hpp"
#include "supergaze/gaze_codec.hpp"
#include "supergaze/model.hpp"

namespace supergaze::eval {

/// Anything that can produce a gaze direction for an annotated sample.
class Predictor {
public:
  virtual ~Predictor() = default;
  virtual codec::GazeVector predict(const data::GazeSample& sample) = 0;
  virtual std::string name() const = 0;
};

/// Returns the ground-truth gaze (protocol plumbing and CLI stubs).
class OraclePredictor : public Predictor {
public:
  codec::GazeVector predict(const data::GazeSample& s) override { return s.gaze; }
  std::string name() const override { return "oracle"; }
};

/// Returns the opposite of the ground truth (180 degrees off everywhere).
class InvertedPredictor : public Predictor {
public:
  codec::GazeVector predict(const data::GazeSample& s) override { return -s.gaze; }
  std::string name() const override { return "inverted"; }
};

class ConstantPredictor : public Predictor {
public:
  explicit ConstantPredictor(codec::GazeVector g) : g_(g) {}
  codec::GazeVector predict(const data::GazeSample&) override { return g_; }
  std::string name() const override { return "constant"; }

private:
  codec::GazeVector g_;
};

/// Runs the static estimator end to end: frame load, preprocessing with
/// annotated eye boxes as priors when present, prediction.
class ModelPredictor : public Predictor {
public:
  ModelPredictor(net::GazeEstimator& model, const prep::Preprocessor& prep,
                 std::function<ImageTensor(const data::GazeSample&)> loader);

  codec::GazeVector predict(const data::GazeSample& s) override;
  std::string name() const override { return "model"; }

private:
  net::GazeEstimator& model_;
  const prep::Preprocessor& prep_;
  std::function<ImageTensor(const data::GazeSample&)> loader_;
};

/// Temporal counterpart: predicts for samples that are central frames of
/// a 7-frame window; samples without a window raise a pipeline error.
class TemporalModelPredictor : public Predictor {
public:
  TemporalModelPredictor(net::GazeEstimator& model, const prep::Preprocessor& prep,
                         const std::vector<data::GazeSample>& dataset,
                         std::function<ImageTensor(const data::GazeSample&)> loader);

  codec::GazeVector predict(const data::GazeSample& s) override;
  std::string name() const override { return "model-temporal"; }

private:
  net::GazeEstimator& model_;
  const prep::Preprocessor& prep_;
  const std::vector<data::GazeSample>& dataset_;
  std::function<ImageTensor(const data::GazeSample&)> loader_;
  std::map<std::string, data::TemporalWindow> windows_;  // keyed by label image path
};

/// Yaw-interval subsets, closed/open boundaries following the published
/// bracket notation: full (always); front [-90, 90]; front_facing
/// [-20, 20]; backward [-180, -90) u (90, 180].
std::vector<std::string> classify_subset(double yaw_deg);
extern const char* const kSubsetOrder[4];

struct SubsetResult {
  double mean_ae_deg = 0.0;
  int count = 0;
};

struct EvalReport {
  std::map<std::string, SubsetResult> subsets;  // empty subsets are absent
  int sample_count = 0;
  int run_count = 1;
  std::string train_dataset, test_dataset;
  std::vector<std::string> boundary_flags;  // samples within 1e-6 deg of a subset edge

  nlohmann::json to_json() const;
  std::string render_table() const;
};

struct SamplePrediction {
  std::string image_path;
  std::string subset;
  double yaw_deg = 0.0;    // ground truth
  double pitch_deg = 0.0;  // ground truth
  double ae_deg = 0.0;
  codec::GazeVector predicted;
};

EvalReport evaluate(Predictor& predictor, const std::vector<data::GazeSample>& samples,
                    std::vector<SamplePrediction>* per_sample = nullptr);

/// Same mechanics as evaluate, tagged with the train->test dataset pair.
EvalReport cross_dataset_eval(Predictor& predictor, const std::vector<data::GazeSample>& test,
                              const std::string& train_id, const std::string& test_id,
                              std::vector<SamplePrediction>* per_sample = nullptr);

/// Mean of per-run subset means; counts taken from the first run carrying
/// each subset.
EvalReport aggregate(const std::vector<EvalReport>& runs);

void save_report(const std::filesystem::path& path, const EvalReport& report);
void save_predictions(const std::filesystem::path& path,
                      const std::vector<SamplePrediction>& preds);
std::vector<SamplePrediction> load_predictions(const std::filesystem::path& path);

}  // namespace supergaze::eval
