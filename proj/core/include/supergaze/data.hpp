#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "supergaze/detectors.hpp"
#include "supergaze/gaze_codec.hpp"
#include "supergaze/image.hpp"

namespace supergaze::data {

/// One annotated frame. Gaze is unit-norm in the internal convention
/// (x right, y up, z forward; see gaze_codec); boxes are normalized to
/// the frame and carry positive area when present.
struct GazeSample {
  std::string image_path;
  std::string subject_id;
  std::string sequence_id;
  int frame_index = 0;
  codec::GazeVector gaze{0.0, 0.0, 1.0};
  std::optional<NormBox> face_box;
  std::optional<NormBox> left_eye_box;
  std::optional<NormBox> right_eye_box;
  std::string subset = "train";  // train | val | test
};

struct Interval {
  double lo = 0.0, hi = 1.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

struct SubsetIntervals {
  Interval x, y;
};

/// Valid face-center intervals per subset, closed on both ends.
struct ValidIntervals {
  SubsetIntervals train, val, test;

  static ValidIntervals published_defaults();
  static ValidIntervals from_json(const nlohmann::json& j);
  static ValidIntervals load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  const SubsetIntervals& for_subset(const std::string& subset) const;
};

struct RectificationReport {
  struct Counts {
    int inspected = 0;
    int valid = 0;
    int invalid = 0;
    int redetected = 0;
    int discarded = 0;
  };
  std::map<std::string, Counts> per_subset;
  std::vector<std::string> rectified_frames;  // image paths of re-detected samples
  std::vector<std::string> warnings;

  Counts totals() const;
  nlohmann::json to_json() const;
};

/// Line-delimited interchange format. The first line of a non-empty file
/// is a header object {"schema": "supergaze-annotations", "version": 1};
/// each following line is one sample record.
std::vector<GazeSample> load_jsonl(const std::filesystem::path& path,
                                   std::vector<std::string>* warnings = nullptr);
void save_jsonl(const std::filesystem::path& path, const std::vector<GazeSample>& samples);

/// Gaze360-style CSV: native vectors point from the subject's eyes in a
/// camera frame whose axes are all mirrored relative to the internal
/// convention; converted here as g_internal = normalize(-g_native).
std::vector<GazeSample> load_gaze360_csv(const std::filesystem::path& path,
                                         std::vector<std::string>* warnings = nullptr);

/// GFIE-style CSV: native frame is y-down; converted here as
/// g_internal = normalize((x, -y, z)).
std::vector<GazeSample> load_gfie_csv(const std::filesystem::path& path,
                                      std::vector<std::string>* warnings = nullptr);

/// Dispatches on format ("gaze360" | "gfie" | "jsonl"). `root` may be the
/// annotation file itself or a directory holding annotations.csv /
/// annotations.jsonl.
std::vector<GazeSample> load_dataset(const std::filesystem::path& root, const std::string& format,
                                     std::vector<std::string>* warnings = nullptr);

/// Normalized face-box midpoints; samples without a face box are skipped.
std::vector<std::pair<double, double>> face_center_distribution(
    const std::vector<GazeSample>& samples);

/// True iff both coordinates fall inside the subset's closed intervals.
bool classify_validity(double cx, double cy, const ValidIntervals& intervals,
                       const std::string& subset);

/// Annotation rectification: samples with a face box whose center falls
/// outside the valid intervals lose their boxes and are re-detected via
/// the provided detector; re-detected boxes are stored only when the
/// detected face center is valid. Gaze annotations are never touched.
std::pair<std::vector<GazeSample>, RectificationReport> rectify(
    const std::vector<GazeSample>& samples, const ValidIntervals& intervals,
    const prep::LandmarkDetector& detector,
    const std::function<ImageTensor(const GazeSample&)>& frame_loader);

/// Loads the sample's image from disk, resolving relative paths against
/// `root`. Suitable as the rectify() frame loader.
std::function<ImageTensor(const GazeSample&)> disk_frame_loader(
    const std::filesystem::path& root);

/// Sliding 7-frame windows over consecutive frame indices within one
/// sequence; the label belongs to the central frame (offset 3).
struct TemporalWindow {
  std::vector<std::size_t> frame_indices;  // indices into the input vector
  std::size_t label_index = 0;
};
std::vector<TemporalWindow> temporal_windows(const std::vector<GazeSample>& samples);

}  // namespace supergaze::data
